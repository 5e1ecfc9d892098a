"""Acceptance checks and the deterministic bench artifact tree.

Each criterion function returns (passed, detail) with a short, fully
deterministic detail string (numbers come from deterministic solves).
run_criteria drives all eight and never lets one criterion's exception
break the others: a raise becomes a FAIL line with the exception text.

The numeric thresholds pinned here are either stated contract values or
values frozen from the calibration runs recorded in docs/calibration.md.
"""

from __future__ import annotations

import filecmp
import tempfile
import warnings
from contextlib import contextmanager
from pathlib import Path
from typing import Callable, List, NamedTuple, Tuple

import numpy as np

from .benchmarks import builtin_cases, error_vs_exact, get_case
from .continuation import homotopy_jacobian, homotopy_residual, trace_path
from .engine import Workspace, partial_sum, run_ham
from .errors import DivergenceWarning
from .expressions import Coord, Const, OperatorExpr, Power, Product, Sum, U
from .hbar import optimal_hbar, scan_hbar
from .hpm import check_equivalence
from .jets import jet_expand
from .problem import HamConfig
from .reports import (
    write_curve_csv,
    write_equivalence_json,
    write_json,
    write_path_csv,
    write_series_csv,
    write_solution_csv,
)

TRACE_HBAR = 1.0
TRACE_STEPS = 16
LONG_BRACKET = (-2.0, -0.01)
SHORT_BRACKET = (-1.5, -0.5)
# frozen by the calibration run; see docs/calibration.md
MANUFACTURED_ORDER = 15
MANUFACTURED_HBAR = -1.020021147


class CriterionResult(NamedTuple):
    number: int
    name: str
    passed: bool
    detail: str


@contextmanager
def _silence():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DivergenceWarning)
        yield


def criterion_1_equivalence() -> Tuple[bool, str]:
    """check_equivalence passes on every builtin; mutation control fails."""
    worst = 0.0
    mutated_best = float("inf")
    ok = True
    for case in builtin_cases():
        report = check_equivalence(case.spec, order=10, tolerance=1e-10)
        worst = max(worst, report.max_rel_diff)
        ok = ok and report.passed
        mutated = check_equivalence(
            case.spec, order=10, tolerance=1e-10, hbar=-1.01
        )
        mutated_best = min(mutated_best, mutated.max_rel_diff)
        ok = ok and (not mutated.passed) and mutated.max_rel_diff > 1e-3
    detail = (
        f"max_rel_diff={worst:.3e} (tol 1e-10), "
        f"mutation min diff={mutated_best:.3e} (> 1e-3)"
    )
    return ok, detail


def criterion_2_endpoints() -> Tuple[bool, str]:
    """G(0, u0) ~ 0 and G(1, w) = hbar H F(w) for random w."""
    ok = True
    worst0 = 0.0
    worst1 = 0.0
    for case in builtin_cases():
        config = HamConfig()
        ws = Workspace(case.spec, config)
        g0 = homotopy_residual(0.0, ws.u0, case.spec, config, ws=ws)
        n0 = float(np.max(np.abs(g0)))
        worst0 = max(worst0, n0)
        ok = ok and n0 < 1e-9
        rng = np.random.default_rng(20240 + len(case.id))
        for _ in range(10):
            w = rng.standard_normal(ws.grid.n)
            g1 = homotopy_residual(1.0, w, case.spec, config, ws=ws)
            target = config.hbar * (ws.H_vals * ws.operator_values(w))
            mask = ws.lopt.interior
            scale = float(np.max(np.abs(target[mask])))
            rel = float(np.max(np.abs(g1[mask] - target[mask]))) / scale
            worst1 = max(worst1, rel)
            ok = ok and rel < 1e-12
    return ok, f"|G(0,u0)|={worst0:.3e} (< 1e-9), G(1,w) rel={worst1:.3e} (< 1e-12)"


def criterion_3_continuation() -> Tuple[bool, str]:
    """Paths reach eps=1 with small residual, sane conditioning, and
    first-order refinement of consecutive differences."""
    ok = True
    worst_f = 0.0
    worst_cond = 0.0
    worst_ratio = float("inf")
    for case in builtin_cases():
        config = HamConfig(hbar=TRACE_HBAR)
        ws = Workspace(case.spec, config)
        path = trace_path(case.spec, config, initial_steps=TRACE_STEPS)
        ok = ok and path.final.eps == 1.0 and path.final.converged
        fvals = ws.operator_values(path.final.u)
        fnorm = float(np.max(np.abs(fvals)))
        worst_f = max(worst_f, fnorm)
        ok = ok and fnorm < 1e-8
        conds = [s.jac_condition for s in path.steps]
        worst_cond = max(worst_cond, max(conds))
        ok = ok and max(conds) < 1e12

        coarse = trace_path(case.spec, config, initial_steps=TRACE_STEPS // 2)
        ratio = _max_consecutive_diff(coarse) / _max_consecutive_diff(path)
        worst_ratio = min(worst_ratio, ratio)
        ok = ok and ratio >= 1.9
    detail = (
        f"|F(u(1))|={worst_f:.3e} (< 1e-8), max cond={worst_cond:.3e} "
        f"(< 1e12), refinement ratio={worst_ratio:.3f} (>= 1.9)"
    )
    return ok, detail


def _max_consecutive_diff(path) -> float:
    diffs = [
        float(np.max(np.abs(b.u - a.u)))
        for a, b in zip(path.steps, path.steps[1:])
    ]
    return max(diffs)


def criterion_4_frechet() -> Tuple[bool, str]:
    """Jacobian-vector products vs central differences of the residual."""
    ok = True
    worst = 0.0
    h = 1e-6
    for case in builtin_cases():
        config = HamConfig()
        ws = Workspace(case.spec, config)
        rng = np.random.default_rng(77 + len(case.id))
        for _ in range(20):
            eps = float(rng.uniform(0.0, 1.0))
            u = rng.standard_normal(ws.grid.n)
            v = rng.standard_normal(ws.grid.n)
            J = homotopy_jacobian(eps, u, case.spec, config, ws=ws)
            jv = J @ v
            gp = homotopy_residual(eps, u + h * v, case.spec, config, ws=ws)
            gm = homotopy_residual(eps, u - h * v, case.spec, config, ws=ws)
            fd = (gp - gm) / (2.0 * h)
            rel = float(np.max(np.abs(jv - fd))) / max(1.0, float(np.max(np.abs(jv))))
            worst = max(worst, rel)
            ok = ok and rel < 1e-6
    return ok, f"max rel error={worst:.3e} (< 1e-6), 20 triples x 4 benchmarks"


def criterion_5_convergence_control() -> Tuple[bool, str]:
    """Fixed hbar=-1 diverges on the long domain; a tuned hbar does not."""
    long_case = get_case("riccati-tanh-long")
    short_case = get_case("riccati-tanh-short")
    with _silence():
        fixed = run_ham(long_case.spec, HamConfig(hbar=-1.0, order=15))
        star = optimal_hbar(
            long_case.spec, HamConfig(order=15), LONG_BRACKET
        )
        short_star = optimal_hbar(
            short_case.spec, HamConfig(order=10), SHORT_BRACKET
        )
        short_fixed = run_ham(short_case.spec, HamConfig(hbar=-1.0, order=10))
    ok = fixed.diverged
    ok = ok and star.residual_star < 1e-2
    at_minus_one = short_fixed.residual_history[-1]
    ok = ok and short_star.residual_star <= at_minus_one
    detail = (
        f"long: diverged={str(fixed.diverged).lower()}, hbar*={star.hbar_star:.4f}, "
        f"residual*={star.residual_star:.3e} (< 1e-2); short: residual*="
        f"{short_star.residual_star:.3e} <= residual(-1)={at_minus_one:.3e}"
    )
    return ok, detail


def criterion_6_exact_recovery() -> Tuple[bool, str]:
    """Benchmark errors against exact solutions at pinned parameters."""
    short_case = get_case("riccati-tanh-short")
    with _silence():
        short = run_ham(short_case.spec, HamConfig(hbar=-1.0, order=10))
    short_err = error_vs_exact(short_case, partial_sum(short, 10))
    short_ok = short_err < 1e-4

    poisson_case = get_case("linear-poisson")
    lin = run_ham(poisson_case.spec, HamConfig(hbar=-1.0, order=1))
    lin_err = error_vs_exact(poisson_case, partial_sum(lin, 1))
    lin_ok = lin_err < 1e-10

    quad_case = get_case("manufactured-quad")
    with _silence():
        quad = run_ham(
            quad_case.spec,
            HamConfig(hbar=MANUFACTURED_HBAR, order=MANUFACTURED_ORDER),
        )
    quad_err = error_vs_exact(quad_case, partial_sum(quad, MANUFACTURED_ORDER))
    quad_ok = quad_err < 1e-5

    ok = short_ok and lin_ok and quad_ok
    detail = (
        f"tanh-short err={short_err:.3e} (< 1e-4), poisson err={lin_err:.3e} "
        f"(< 1e-10), manufactured err={quad_err:.3e} (< 1e-5)"
    )
    return ok, detail


def _random_polynomial_expr(rng) -> OperatorExpr:
    """Random polynomial tree in r, u, u', u'' of total u-degree <= 4."""
    atoms = [Coord(), U(0), U(1), U(2)]
    terms = []
    for _ in range(int(rng.integers(1, 5))):
        factors: list = [Const(float(np.round(rng.uniform(-2.0, 2.0), 3)))]
        n_factors = int(rng.integers(0, 4))
        for _ in range(n_factors):
            atom = atoms[int(rng.integers(0, len(atoms)))]
            if rng.uniform() < 0.25:
                factors.append(Power(atom, float(int(rng.integers(2, 4)))))
            else:
                factors.append(atom)
        terms.append(Product(tuple(factors)) if len(factors) > 1 else factors[0])
    return Sum(tuple(terms)) if len(terms) > 1 else terms[0]


def _polynomial_reference(expr: OperatorExpr, r: np.ndarray, u_jets: dict, depth: int) -> np.ndarray:
    """Brute-force jet of a polynomial expression via numpy Polynomial."""
    from numpy.polynomial import polynomial as P

    width = r.shape[0]
    out = np.zeros((depth, width))
    for j in range(width):

        def rec(node):
            if isinstance(node, Const):
                return np.array([node.value])
            if isinstance(node, Coord):
                return np.array([r[j]])
            if isinstance(node, U):
                return np.array(u_jets[node.order][:, j])
            if isinstance(node, Sum):
                acc = rec(node.terms[0])
                for t in node.terms[1:]:
                    acc = P.polyadd(acc, rec(t))
                return acc
            if isinstance(node, Product):
                acc = rec(node.factors[0])
                for f in node.factors[1:]:
                    acc = P.polymul(acc, rec(f))
                return acc
            if isinstance(node, Power):
                return P.polypow(rec(node.base), int(node.exponent))
            raise TypeError(f"non-polynomial node {node!r}")

        coeffs = rec(expr)[:depth]
        out[: len(coeffs), j] = coeffs
    return out


def criterion_7_jet_oracle() -> Tuple[bool, str]:
    """jet_expand vs brute-force polynomial expansion, 100 random trees."""
    rng = np.random.default_rng(4242)
    worst = 0.0
    ok = True
    for _ in range(100):
        depth = int(rng.integers(1, 7))
        width = 5
        r = rng.uniform(-1.0, 1.0, width)
        u_jets = {
            k: rng.standard_normal((depth, width)) for k in range(3)
        }
        expr = _random_polynomial_expr(rng)
        got = jet_expand(expr, r, u_jets, depth)
        want = _polynomial_reference(expr, r, u_jets, depth)
        rel = float(np.max(np.abs(got - want) / (1.0 + np.abs(want))))
        worst = max(worst, rel)
        ok = ok and rel < 1e-12
    return ok, f"max rel diff={worst:.3e} (< 1e-12), 100 expressions"


def criterion_8_determinism() -> Tuple[bool, str]:
    """Two bench artifact trees must match byte for byte."""
    with tempfile.TemporaryDirectory() as tmp:
        first = Path(tmp) / "first"
        second = Path(tmp) / "second"
        write_bench_artifacts(first)
        write_bench_artifacts(second)
        same, differing = _trees_identical(first, second)
    if same:
        return True, "byte-identical artifact trees across two runs"
    return False, f"differing files: {', '.join(differing)}"


def _trees_identical(a: Path, b: Path) -> Tuple[bool, List[str]]:
    files_a = sorted(p.relative_to(a) for p in a.rglob("*") if p.is_file())
    files_b = sorted(p.relative_to(b) for p in b.rglob("*") if p.is_file())
    if files_a != files_b:
        extra = set(map(str, files_a)) ^ set(map(str, files_b))
        return False, sorted(extra)
    differing = [
        str(rel)
        for rel in files_a
        if not filecmp.cmp(a / rel, b / rel, shallow=False)
    ]
    return not differing, differing


CRITERIA = (
    (1, "reduced-method-equivalence", criterion_1_equivalence),
    (2, "embedding-endpoints", criterion_2_endpoints),
    (3, "path-tracing", criterion_3_continuation),
    (4, "jacobian-fd-agreement", criterion_4_frechet),
    (5, "convergence-control", criterion_5_convergence_control),
    (6, "exact-recovery", criterion_6_exact_recovery),
    (7, "jet-oracle", criterion_7_jet_oracle),
    (8, "determinism", criterion_8_determinism),
)


def run_criteria(echo: Callable[[str], None] = print) -> List[CriterionResult]:
    results = []
    for number, name, func in CRITERIA:
        try:
            passed, detail = func()
        except Exception as exc:  # noqa: BLE001 - one criterion must not sink the rest
            passed, detail = False, f"raised {type(exc).__name__}: {exc}"
        results.append(CriterionResult(number, name, passed, detail))
        echo(f"{'PASS' if passed else 'FAIL'} {number} {name}: {detail}")
    return results


def write_bench_artifacts(outdir) -> None:
    """Per-benchmark CSV/JSON artifacts, fully deterministic."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    for case in builtin_cases():
        case_dir = outdir / case.id
        case_dir.mkdir(parents=True, exist_ok=True)
        config = HamConfig()
        grid = case.spec.make_grid()
        with _silence():
            series = run_ham(case.spec, config, grid)
            write_series_csv(case_dir / "series.csv", series)
            write_solution_csv(case_dir / "solution.csv", case.spec, series, grid)
            curve = scan_hbar(
                case.spec, config, np.linspace(-2.0, -0.1, 17)
            )
            write_curve_csv(case_dir / "hbar_curve.csv", curve)
            trace_config = HamConfig(hbar=TRACE_HBAR)
            path = trace_path(case.spec, trace_config, initial_steps=TRACE_STEPS)
            write_path_csv(
                case_dir / "path.csv", case.spec, trace_config, path
            )
            report = check_equivalence(case.spec, order=10, tolerance=1e-10)
            write_equivalence_json(case_dir / "equivalence.json", report)


def bench(outdir, echo: Callable[[str], None] = print) -> int:
    """Write artifacts, run all criteria, emit summary.json; 0 iff all pass."""
    outdir = Path(outdir)
    write_bench_artifacts(outdir)
    results = run_criteria(echo)
    summary = {
        "criteria": [
            {
                "detail": r.detail,
                "name": r.name,
                "number": r.number,
                "pass": r.passed,
            }
            for r in results
        ],
        "pass": all(r.passed for r in results),
    }
    write_json(outdir / "summary.json", summary)
    return 0 if summary["pass"] else 1
