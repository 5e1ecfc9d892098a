"""Path tracing for the embedded family G(eps, u) = 0 on eps in [0, 1].

G(eps, u) = (1 - eps) L_opt(u - u_0) + eps hbar H(r) F(u) on interior rows;
boundary rows carry the BC residual of u itself, so a path point satisfies
the problem's boundary conditions at every eps. Natural-parameter marching
with Newton correction and step halving; no fold traversal. A fold or a
singular embedding direction surfaces as PathAbortError with the partial
path attached rather than being silently skipped.

Note the embedding direction matters: for hbar < 0 the convex combination
(1 - eps) L_opt + eps hbar L can pass through an exactly singular matrix at
eps = 1/(1 - hbar). Tracing is therefore healthiest at hbar > 0 (the series
machinery, which never assembles that combination, keeps its usual negative
hbar). demos/path_tracing.py walks through both regimes.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np
from scipy.linalg import LinAlgWarning, lu_factor, lu_solve

from .errors import ConfigError, PathAbortError, SingularSystemError
from .engine import Workspace
from .grids import bc_row
from .jets import frechet_at_reference
from .problem import HamConfig, ProblemSpec

NEWTON_TOL = 1e-10
NEWTON_MAX_ITERS = 50
MAX_HALVINGS = 8
MIN_STEP = 1e-4


@dataclass(frozen=True)
class PathStep:
    eps: float
    u: np.ndarray
    newton_iters: int
    jac_condition: float
    converged: bool


@dataclass(frozen=True)
class ContinuationPath:
    """Accepted steps of one trace, eps strictly increasing from 0 to 1."""

    steps: tuple
    config: HamConfig

    def __post_init__(self):
        object.__setattr__(self, "steps", tuple(self.steps))

    @property
    def final(self) -> PathStep:
        return self.steps[-1]

    def eps_values(self) -> np.ndarray:
        return np.array([s.eps for s in self.steps])


class NewtonResult(NamedTuple):
    u: np.ndarray
    iters: int
    converged: bool


class _PathOps:
    """Residual/Jacobian assembly bound to one workspace."""

    def __init__(self, ws: Workspace):
        self.ws = ws
        grid = ws.grid
        self.bc_rows = [bc_row(grid, bc) for bc in ws.lopt.bcs]
        self.bc_values = np.array([bc.value for bc in ws.lopt.bcs])
        self.row_idx = ws.lopt.rows

    def residual(self, eps: float, u: np.ndarray) -> np.ndarray:
        ws = self.ws
        u = ws.grid.check_length(u)
        core = ws.lopt.matrix @ (u - ws.u0)
        forcing = ws.H_vals * ws.operator_values(u)
        g = (1.0 - eps) * core + (eps * ws.config.hbar) * forcing
        for i, row, val in zip(self.row_idx, self.bc_rows, self.bc_values):
            g[i] = row @ u - val
        return g

    def jacobian(self, eps: float, u: np.ndarray) -> np.ndarray:
        ws = self.ws
        u = ws.grid.check_length(u)
        df = frechet_at_reference(ws.problem.L, ws.problem.N, ws.grid, u)
        J = (1.0 - eps) * ws.lopt.matrix + (eps * ws.config.hbar) * (
            ws.H_vals[:, None] * df
        )
        for i, row in zip(self.row_idx, self.bc_rows):
            J[i] = row
        return J

    def newton(self, eps: float, warm_start: np.ndarray) -> NewtonResult:
        u = self.ws.grid.check_length(warm_start).copy()
        g = self.residual(eps, u)
        gnorm = float(np.max(np.abs(g)))
        for it in range(NEWTON_MAX_ITERS):
            if gnorm < NEWTON_TOL * (1.0 + float(np.max(np.abs(u)))):
                return NewtonResult(u, it, True)
            J = self.jacobian(eps, u)
            try:
                with warnings.catch_warnings():
                    # an exactly singular matrix is treated as a step
                    # failure just below; scipy's warning is noise here
                    warnings.simplefilter("ignore", LinAlgWarning)
                    lu = lu_factor(J)
                    delta = lu_solve(lu, -g)
            except Exception as exc:
                raise SingularSystemError(
                    f"embedding jacobian factorization failed at eps={eps:g}"
                ) from exc
            if not np.all(np.isfinite(delta)):
                raise SingularSystemError(
                    f"embedding jacobian is singular at eps={eps:g}"
                )
            scale = 1.0
            for _ in range(MAX_HALVINGS + 1):
                trial = u + scale * delta
                g_trial = self.residual(eps, trial)
                t_norm = float(np.max(np.abs(g_trial)))
                if t_norm < gnorm:
                    u, g, gnorm = trial, g_trial, t_norm
                    break
                scale *= 0.5
            else:
                return NewtonResult(u, it + 1, False)
        converged = gnorm < NEWTON_TOL * (1.0 + float(np.max(np.abs(u))))
        return NewtonResult(u, NEWTON_MAX_ITERS, converged)

    def condition(self, eps: float, u: np.ndarray) -> float:
        return float(np.linalg.cond(self.jacobian(eps, u), 1))


def homotopy_residual(eps: float, u: np.ndarray, problem: ProblemSpec, config: HamConfig, ws: Optional[Workspace] = None) -> np.ndarray:
    """G(eps, u) with BC residuals on the boundary rows."""
    if not 0.0 <= eps <= 1.0:
        raise ConfigError(f"eps={eps} outside [0, 1]")
    ws = ws if ws is not None else Workspace(problem, config)
    return _PathOps(ws).residual(float(eps), u)


def homotopy_jacobian(eps: float, u: np.ndarray, problem: ProblemSpec, config: HamConfig, ws: Optional[Workspace] = None) -> np.ndarray:
    """d G/d u at (eps, u), dense, with BC rows in place."""
    if not 0.0 <= eps <= 1.0:
        raise ConfigError(f"eps={eps} outside [0, 1]")
    ws = ws if ws is not None else Workspace(problem, config)
    return _PathOps(ws).jacobian(float(eps), u)


def newton_at(eps: float, warm_start: np.ndarray, problem: ProblemSpec, config: HamConfig, ws: Optional[Workspace] = None) -> NewtonResult:
    """Correct a warm start to the solution of G(eps, u) = 0.

    Never raises on slow convergence (returns converged = False);
    SingularSystemError only when the factorization itself fails.
    """
    if not 0.0 <= eps <= 1.0:
        raise ConfigError(f"eps={eps} outside [0, 1]")
    ws = ws if ws is not None else Workspace(problem, config)
    return _PathOps(ws).newton(float(eps), warm_start)


def trace_path(problem: ProblemSpec, config: HamConfig, initial_steps: int = 16) -> ContinuationPath:
    """March eps from 0 to 1 with warm-started Newton correction.

    Failed steps halve the increment (a singular jacobian mid-path counts
    as a failure); below the 1e-4 floor the trace aborts with the partial
    path attached to the error. Successful steps grow the increment back,
    capped at the initial 1/initial_steps. The last step lands on eps = 1
    exactly.
    """
    if initial_steps < 2:
        raise ConfigError(f"initial_steps must be >= 2, got {initial_steps}")
    ws = Workspace(problem, config)
    ops = _PathOps(ws)
    g0 = ops.residual(0.0, ws.u0)
    start_ok = float(np.max(np.abs(g0))) < NEWTON_TOL * (
        1.0 + float(np.max(np.abs(ws.u0)))
    )
    steps = [PathStep(0.0, ws.u0, 0, ops.condition(0.0, ws.u0), start_ok)]
    deps0 = 1.0 / initial_steps
    deps = deps0
    eps = 0.0
    u = ws.u0
    while eps < 1.0:
        target = min(eps + deps, 1.0)
        if 1.0 - target < 1e-12:
            target = 1.0
        try:
            result = ops.newton(target, u)
        except SingularSystemError:
            result = NewtonResult(u, 0, False)
        if result.converged:
            eps, u = target, result.u
            steps.append(
                PathStep(eps, u, result.iters, ops.condition(eps, u), True)
            )
            deps = min(2.0 * deps, deps0)
        else:
            deps *= 0.5
            if deps < MIN_STEP:
                partial = ContinuationPath(steps=tuple(steps), config=config)
                raise PathAbortError(
                    f"continuation stalled near eps={eps:g}: step underflowed "
                    f"{MIN_STEP:g} without Newton convergence",
                    partial,
                )
    return ContinuationPath(steps=tuple(steps), config=config)
