"""Series solver: zeroth-order solve, order-m recursion, residuals.

The homotopy family is (1 - p) L_opt(u - u_0) + p hbar H(r) F(u) = 0 with
F(u) = L(u) + N(u) - s(r). Expanding u = sum_m u_m p^m and matching powers
of p gives the order-m equations

    L_opt(u_m - chi_m u_{m-1}) = hbar H(r) D_{m-1}[F],   chi_1 = 0, chi_m = 1,

where D_k[F] is the k-th Taylor coefficient of F applied to the series
(docs/recursions.md carries the derivation). The right-hand side passed to
the factored L_opt solve is therefore

    rhs_m = (hbar H + chi_m) (L u_{m-1}) + hbar H (D_{m-1}[N] - delta_{m,1} s)

grouped so that the special case hbar = -1, H = 1 cancels the L u_{m-1}
term exactly (coefficient 0.0, not a difference of rounded terms), which is
what makes the reduced-method comparison meaningful at tight tolerances.
"""

from __future__ import annotations

import warnings
from typing import Optional, Sequence

import numpy as np

from .errors import ConfigError, DivergenceWarning, RangeError, SingularSystemError
from .expressions import LinearOperator, eval_expr, max_u_order
from .grids import BcSystem, Grid, assemble_linear, integrate
from .jets import frechet_at_reference, jet_expand, series_jets
from .problem import HamConfig, ProblemSpec, SeriesSolution

DIVERGENCE_STREAK = 3


def _grid_values(expr, grid: Grid) -> np.ndarray:
    vals = np.asarray(eval_expr(expr, grid.nodes), dtype=float)
    return np.ascontiguousarray(np.broadcast_to(vals, (grid.n,)))


class Workspace:
    """Assembled matrices, factorization, and u_0 for one problem + config.

    Everything here is independent of hbar and of the truncation order, so
    one workspace serves a whole hbar scan. Instances are not thread-safe to
    build but immutable afterwards.
    """

    def __init__(self, problem: ProblemSpec, config: HamConfig, grid: Optional[Grid] = None):
        self.problem = problem
        self.config = config
        self.grid = grid if grid is not None else problem.make_grid()
        self.A_L = assemble_linear(problem.L, self.grid)
        self.s_vals = _grid_values(problem.s, self.grid)
        self.H_vals = _grid_values(config.H, self.grid)
        if np.any(self.H_vals == 0.0):
            raise ConfigError("auxiliary weight H vanishes at a grid node")
        self.lopt = _build_lopt_system(problem, config, self.grid, self.A_L)
        self.u0 = self._solve_zeroth()

    def _solve_zeroth(self) -> np.ndarray:
        u0 = self.lopt.solve(np.zeros(self.grid.n))
        resid = self.lopt.matrix @ u0
        # BC rows of the factored matrix are condition rows; skip them
        sup = float(np.max(np.abs(resid[self.lopt.interior]), initial=0.0))
        if sup >= 1e-9 * (1.0 + float(np.max(np.abs(u0)))):
            raise SingularSystemError(
                f"zeroth-order solve left interior residual {sup:.3e}; the "
                "linear core is too ill-conditioned to define u_0"
            )
        return u0

    def nonlinear_coefficients(self, orders: Sequence[np.ndarray]) -> np.ndarray:
        """Taylor rows of N applied to the series, shape (len(orders), n)."""
        depth = len(orders)
        jets = series_jets(self.grid, orders, self.problem.N)
        return jet_expand(self.problem.N, self.grid.nodes, jets, depth)

    def mth_order_rhs(self, m: int, orders: Sequence[np.ndarray], hbar: float) -> np.ndarray:
        if m < 1:
            raise RangeError(f"order-m right-hand side needs m >= 1, got {m}")
        if len(orders) < m:
            raise RangeError(f"need orders u_0..u_{m-1} to form rhs_{m}, got {len(orders)}")
        u_prev = self.grid.check_length(orders[m - 1])
        chi = 0.0 if m == 1 else 1.0
        t = self.A_L @ u_prev
        forcing = self.nonlinear_coefficients(orders[:m])[m - 1]
        if m == 1:
            forcing = forcing - self.s_vals
        return (hbar * self.H_vals + chi) * t + hbar * (self.H_vals * forcing)

    def run(self, hbar: Optional[float] = None, order: Optional[int] = None) -> SeriesSolution:
        hbar = self.config.hbar if hbar is None else float(hbar)
        order = self.config.order if order is None else int(order)
        if hbar == 0.0:
            raise ConfigError("hbar must be nonzero")
        if order < 0:
            raise ConfigError(f"truncation order must be >= 0, got {order}")
        homogeneous = np.zeros(len(self.problem.bcs))
        orders = [self.u0]
        norms = [float(np.max(np.abs(self.u0)))]
        running = self.u0.copy()
        history = [self.squared_residual(running)]
        streak = 0
        diverged = False
        # Growth is judged over the nonzero norms only.  At special hbar
        # values whole orders cancel exactly (tanh at hbar = -1 has even
        # orders identically zero); a zero term says nothing about growth
        # and must not reset the streak.
        last_nonzero = norms[0] if norms[0] > 0.0 else None
        for m in range(1, order + 1):
            rhs = self.mth_order_rhs(m, orders, hbar)
            um = self.lopt.solve(rhs, bc_values=homogeneous)
            orders.append(um)
            norms.append(float(np.max(np.abs(um))))
            running = running + um
            history.append(self.squared_residual(running))
            if norms[-1] > 0.0:
                if last_nonzero is not None:
                    streak = streak + 1 if norms[-1] > last_nonzero else 0
                last_nonzero = norms[-1]
            if streak >= DIVERGENCE_STREAK:
                diverged = True
        cfg = self.config.with_hbar(hbar).with_order(order)
        if diverged:
            warnings.warn(
                f"per-order norms grew for {DIVERGENCE_STREAK} consecutive "
                f"orders at hbar={hbar:g}; series looks divergent",
                DivergenceWarning,
                stacklevel=2,
            )
        return SeriesSolution(
            orders=tuple(orders),
            config=cfg,
            per_order_norms=tuple(norms),
            residual_history=tuple(history),
            diverged=diverged,
        )

    def operator_values(self, U: np.ndarray) -> np.ndarray:
        """F(U) = L U + N(U) - s sampled at every node (BC rows included)."""
        U = self.grid.check_length(U)
        upto = max(max_u_order(self.problem.N), 0)
        stack = self.grid.derivative_stack(U, upto)
        nl = np.broadcast_to(
            np.asarray(eval_expr(self.problem.N, self.grid.nodes, stack), dtype=float),
            (self.grid.n,),
        )
        return self.A_L @ U + nl - self.s_vals

    def squared_residual(self, U: np.ndarray) -> float:
        f = self.operator_values(U)
        return integrate(self.grid, f * f) / (self.grid.b - self.grid.a)

    def weak_nonlinearity_ratio(self, U: np.ndarray, hbar: Optional[float] = None) -> float:
        """Diagnostic: |hbar H F(U) - L_opt(U - u_0)| / |L_opt(U - u_0)|.

        Sup norms over interior rows. Purely informational; no pass/fail
        threshold is attached.
        """
        hbar = self.config.hbar if hbar is None else float(hbar)
        U = self.grid.check_length(U)
        mask = self.lopt.interior
        core = (self.lopt.matrix @ (U - self.u0))[mask]
        forcing = (hbar * self.H_vals * self.operator_values(U))[mask]
        denom = float(np.max(np.abs(core), initial=0.0))
        if denom == 0.0:
            return float("inf")
        return float(np.max(np.abs(forcing - core))) / denom


def _build_lopt_system(problem: ProblemSpec, config: HamConfig, grid: Grid, A_L: np.ndarray, u0=None) -> BcSystem:
    mode = config.lopt_mode
    if isinstance(mode, LinearOperator):
        if mode.order != len(problem.bcs):
            raise ConfigError(
                f"substitute linear operator of order {mode.order} needs "
                f"{mode.order} BCs, problem has {len(problem.bcs)}"
            )
        return BcSystem(assemble_linear(mode, grid), problem.bcs, grid)
    if mode == "use-L":
        return BcSystem(A_L, problem.bcs, grid)
    # frechet-at-u0: linearize F at u0, bootstrapping u0 from plain L when
    # the caller has none (breaks the circular definition deterministically)
    if u0 is None:
        u0 = BcSystem(A_L, problem.bcs, grid).solve(np.zeros(grid.n))
    matrix = frechet_at_reference(problem.L, problem.N, grid, u0)
    return BcSystem(matrix, problem.bcs, grid)


def resolve_lopt(problem: ProblemSpec, config: HamConfig, u0: Optional[np.ndarray] = None, grid: Optional[Grid] = None) -> BcSystem:
    """Discretize and factor the configured linear core.

    Returns the BC-modified, LU-factored system; reuse it for every solve in
    a session. For frechet-at-u0 mode with no u0 supplied, a bootstrap u0 is
    computed from the plain linear part first.
    """
    grid = grid if grid is not None else problem.make_grid()
    return _build_lopt_system(problem, config, grid, assemble_linear(problem.L, grid), u0)


def solve_zeroth(problem: ProblemSpec, config: HamConfig, grid: Optional[Grid] = None) -> np.ndarray:
    """u_0: the linear-core solution under the problem's own BCs."""
    return Workspace(problem, config, grid).u0


def mth_order_rhs(m: int, orders: Sequence[np.ndarray], problem: ProblemSpec, config: HamConfig, grid: Optional[Grid] = None) -> np.ndarray:
    """Right-hand side of the order-m solve given u_0..u_{m-1}."""
    return Workspace(problem, config, grid).mth_order_rhs(m, orders, config.hbar)


def run_ham(problem: ProblemSpec, config: HamConfig, grid: Optional[Grid] = None) -> SeriesSolution:
    """Full series run: u_0 then order-m solves up to the truncation order.

    Emits DivergenceWarning (and sets the flag on the result) when per-order
    sup norms grow three times in a row; the series is still returned.
    """
    return Workspace(problem, config, grid).run()


def partial_sum(series: SeriesSolution, upto: int) -> np.ndarray:
    if not 0 <= upto <= series.truncation_order:
        raise RangeError(
            f"partial sum order {upto} outside 0..{series.truncation_order}"
        )
    return np.add.reduce(np.stack(series.orders[: upto + 1]), axis=0)


def squared_residual(problem: ProblemSpec, U: np.ndarray, grid: Optional[Grid] = None) -> float:
    """Mean of F(U)^2 over the domain, by the grid's quadrature rule."""
    grid = grid if grid is not None else problem.make_grid()
    U = grid.check_length(U)
    A_L = assemble_linear(problem.L, grid)
    upto = max(max_u_order(problem.N), 0)
    stack = grid.derivative_stack(U, upto)
    nl = np.broadcast_to(
        np.asarray(eval_expr(problem.N, grid.nodes, stack), dtype=float), (grid.n,)
    )
    s_vals = _grid_values(problem.s, grid)
    f = A_L @ U + nl - s_vals
    return integrate(grid, f * f) / (grid.b - grid.a)


def weak_nonlinearity_ratio(problem: ProblemSpec, config: HamConfig, U: np.ndarray, grid: Optional[Grid] = None) -> float:
    """See Workspace.weak_nonlinearity_ratio."""
    return Workspace(problem, config, grid).weak_nonlinearity_ratio(U)
