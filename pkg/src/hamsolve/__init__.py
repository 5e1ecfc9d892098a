"""Series solver for nonlinear two-point ODE problems on spectral grids.

Core workflow: describe a problem as F(u) = L(u) + N(u) - s(r) = 0 with
explicit boundary conditions (ProblemSpec), pick the linear core, hbar,
weight, and truncation order (HamConfig), then run_ham to get the series.
Convergence tuning lives in scan_hbar/optimal_hbar, path validation in
trace_path, and the independent fixed-parameter oracle in hpm_recursion /
check_equivalence.
"""

from .errors import (
    ConfigError,
    DivergenceWarning,
    DomainError,
    GridMismatchError,
    HamError,
    ParseError,
    PathAbortError,
    RangeError,
    SingularOperatorError,
    SingularSystemError,
)
from .expressions import (
    Call,
    Const,
    Coord,
    LinearOperator,
    OperatorExpr,
    Power,
    Product,
    Sum,
    U,
    contains_u,
    eval_expr,
    max_u_order,
    parse_expr,
    walk,
)
from .grids import (
    BcSystem,
    BoundaryCondition,
    Grid,
    assemble_linear,
    bc_row,
    bc_row_indices,
    build_grid,
    integrate,
    solve_with_bcs,
)
from .jets import frechet_apply, frechet_at_reference, jet_expand
from .problem import HamConfig, ProblemSpec, SeriesSolution
from .engine import (
    Workspace,
    mth_order_rhs,
    partial_sum,
    resolve_lopt,
    run_ham,
    solve_zeroth,
    squared_residual,
    weak_nonlinearity_ratio,
)
from .hbar import HbarCurve, HbarEntry, OptimalHbar, optimal_hbar, scan_hbar
from .continuation import (
    ContinuationPath,
    NewtonResult,
    PathStep,
    homotopy_jacobian,
    homotopy_residual,
    newton_at,
    trace_path,
)
from .hpm import EquivalenceReport, check_equivalence, hpm_config, hpm_recursion
from .benchmarks import (
    BenchmarkCase,
    builtin_cases,
    case_ids,
    error_vs_exact,
    get_case,
)
from .problemfile import ParsedProblem, parse_problem_file, parse_problem_text

__version__ = "0.1.0"

__all__ = [
    "BcSystem",
    "BenchmarkCase",
    "BoundaryCondition",
    "Call",
    "ConfigError",
    "Const",
    "ContinuationPath",
    "Coord",
    "DivergenceWarning",
    "DomainError",
    "EquivalenceReport",
    "Grid",
    "GridMismatchError",
    "HamConfig",
    "HamError",
    "HbarCurve",
    "HbarEntry",
    "LinearOperator",
    "NewtonResult",
    "OperatorExpr",
    "OptimalHbar",
    "ParseError",
    "ParsedProblem",
    "PathAbortError",
    "PathStep",
    "Power",
    "ProblemSpec",
    "Product",
    "RangeError",
    "SeriesSolution",
    "SingularOperatorError",
    "SingularSystemError",
    "Sum",
    "U",
    "Workspace",
    "assemble_linear",
    "bc_row",
    "bc_row_indices",
    "build_grid",
    "builtin_cases",
    "case_ids",
    "check_equivalence",
    "contains_u",
    "error_vs_exact",
    "eval_expr",
    "frechet_apply",
    "frechet_at_reference",
    "get_case",
    "homotopy_jacobian",
    "homotopy_residual",
    "hpm_config",
    "hpm_recursion",
    "integrate",
    "jet_expand",
    "max_u_order",
    "mth_order_rhs",
    "newton_at",
    "optimal_hbar",
    "parse_expr",
    "parse_problem_file",
    "parse_problem_text",
    "partial_sum",
    "resolve_lopt",
    "run_ham",
    "scan_hbar",
    "solve_with_bcs",
    "solve_zeroth",
    "squared_residual",
    "trace_path",
    "walk",
    "weak_nonlinearity_ratio",
]
