"""Collocation grids, differentiation matrices, quadrature and BC solves.

Two grid kinds: ``chebyshev-lobatto`` (spectral, with Clenshaw-Curtis
quadrature) and ``uniform-fd`` (second-order finite differences with
trapezoid quadrature). Nodes are always ascending with nodes[0] = a and
nodes[-1] = b. Differentiation matrices are dense and built once per grid;
boundary conditions are imposed by row replacement.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import lu_factor, lu_solve, toeplitz
from .errors import (
    ConfigError,
    GridMismatchError,
    SingularOperatorError,
    SingularSystemError,
)
from .expressions import LinearOperator, eval_expr

GRID_KINDS = ("chebyshev-lobatto", "uniform-fd")
MAX_DIFF_ORDER = 4
COND_LIMIT = 1e14


def _chebdif(n: int, mmax: int):
    """Chebyshev-Lobatto nodes (descending on [-1,1]) and diff matrices 1..mmax.

    Uses the trig-identity form of the node differences, the flipping trick
    and the negative-sum trick, which keeps higher-order matrices far more
    accurate than repeated squaring of the first-order matrix.
    """
    k = np.arange(n)
    th = k * np.pi / (n - 1)
    x = np.sin(np.pi * (n - 1 - 2 * k) / (2 * (n - 1)))
    n1, n2 = n // 2, (n + 1) // 2
    T = np.tile(th / 2, (n, 1))
    DX = 2 * np.sin(T.T + T) * np.sin(T - T.T)  # x_i - x_j, accurately
    DX = np.vstack((DX[:n1], -np.flipud(np.fliplr(DX[:n2]))))
    np.fill_diagonal(DX, 1.0)
    C = toeplitz((-1.0) ** k)
    C[0, :] *= 2
    C[-1, :] *= 2
    C[:, 0] /= 2
    C[:, -1] /= 2
    Z = 1.0 / DX
    np.fill_diagonal(Z, 0.0)
    D = np.eye(n)
    out = []
    for ell in range(1, mmax + 1):
        D = ell * Z * (C * np.tile(np.diag(D), (n, 1)).T - D)
        np.fill_diagonal(D, -D.sum(axis=1))
        out.append(D.copy())
    return x, out


def _clencurt(n: int) -> np.ndarray:
    """Clenshaw-Curtis weights for n Chebyshev-Lobatto points on [-1,1]."""
    N = n - 1
    theta = np.pi * np.arange(n) / N
    w = np.zeros(n)
    ii = np.arange(1, N)
    v = np.ones(N - 1)
    if N % 2 == 0:
        w[0] = w[N] = 1.0 / (N * N - 1)
        for k in range(1, N // 2):
            v -= 2.0 * np.cos(2 * k * theta[ii]) / (4 * k * k - 1)
        v -= np.cos(N * theta[ii]) / (N * N - 1)
    else:
        w[0] = w[N] = 1.0 / (N * N)
        for k in range(1, (N - 1) // 2 + 1):
            v -= 2.0 * np.cos(2 * k * theta[ii]) / (4 * k * k - 1)
    w[ii] = 2.0 * v / N
    return w


def _fd_first(n: int, h: float) -> np.ndarray:
    D = np.zeros((n, n))
    for i in range(1, n - 1):
        D[i, i - 1] = -0.5 / h
        D[i, i + 1] = 0.5 / h
    D[0, :3] = np.array([-1.5, 2.0, -0.5]) / h
    D[-1, -3:] = np.array([0.5, -2.0, 1.5]) / h
    return D


def _fd_second(n: int, h: float) -> np.ndarray:
    D = np.zeros((n, n))
    for i in range(1, n - 1):
        D[i, i - 1 : i + 2] = np.array([1.0, -2.0, 1.0]) / h**2
    D[0, :4] = np.array([2.0, -5.0, 4.0, -1.0]) / h**2
    D[-1, -4:] = np.array([-1.0, 4.0, -5.0, 2.0]) / h**2
    return D


@dataclass(frozen=True, eq=False)
class Grid:
    """A fixed 1-D collocation grid with its derivative and quadrature data."""

    kind: str
    n: int
    a: float
    b: float
    nodes: np.ndarray
    _diffs: tuple
    quad_weights: np.ndarray

    def diff_matrix(self, order: int) -> np.ndarray:
        if not 1 <= order <= MAX_DIFF_ORDER:
            raise ConfigError(f"derivative order {order} outside 1..{MAX_DIFF_ORDER}")
        return self._diffs[order - 1]

    def check_length(self, values: np.ndarray) -> np.ndarray:
        values = np.asarray(values, dtype=float)
        if values.shape != (self.n,):
            raise GridMismatchError(
                f"expected a grid function of length {self.n}, got shape {values.shape}"
            )
        return values

    def derivative_stack(self, values: np.ndarray, upto: int) -> dict:
        """{k: d^k values/dr^k} for k = 0..upto, via the diff matrices."""
        values = self.check_length(values)
        stack = {0: values}
        for k in range(1, upto + 1):
            stack[k] = self.diff_matrix(k) @ values
        return stack

    def interpolate(self, values: np.ndarray, x: float) -> float:
        """Value of the grid function at an off-grid point x in [a, b]."""
        values = self.check_length(values)
        if not (self.a <= x <= self.b):
            raise ConfigError(f"{x} is outside [{self.a}, {self.b}]")
        if self.kind == "chebyshev-lobatto":
            # Closed-form barycentric weights for Lobatto nodes:
            # (-1)^j, halved at both endpoints.  The affine map to [a, b]
            # rescales all weights equally, which cancels in the ratio.
            diff = x - self.nodes
            hit = np.nonzero(diff == 0.0)[0]
            if hit.size:
                return float(values[hit[0]])
            w = np.ones(self.n)
            w[1::2] = -1.0
            w[0] *= 0.5
            w[-1] *= 0.5
            q = w / diff
            return float(q @ values / np.sum(q))
        return float(np.interp(x, self.nodes, values))


def build_grid(kind: str, n: int, a: float, b: float) -> Grid:
    """Construct a grid of ``n`` nodes on [a, b].

    Raises ConfigError for unknown kinds, n < 8, or a degenerate interval.
    """
    if kind not in GRID_KINDS:
        raise ConfigError(f"unknown grid kind {kind!r}; use one of {GRID_KINDS}")
    if n < 8:
        raise ConfigError(f"grid needs at least 8 nodes, got {n}")
    a, b = float(a), float(b)
    if not b > a:
        raise ConfigError(f"domain [{a}, {b}] is empty")
    scale = 2.0 / (b - a)
    if kind == "chebyshev-lobatto":
        x, DM = _chebdif(n, MAX_DIFF_ORDER)
        asc = np.arange(n - 1, -1, -1)
        nodes = a + (b - a) * (x[asc] + 1.0) / 2.0
        diffs = tuple(DM[k][np.ix_(asc, asc)] * scale ** (k + 1) for k in range(MAX_DIFF_ORDER))
        weights = _clencurt(n)[asc] / scale
    else:
        nodes = np.linspace(a, b, n)
        h = (b - a) / (n - 1)
        D1 = _fd_first(n, h)
        D2 = _fd_second(n, h)
        diffs = (D1, D2, D1 @ D2, D2 @ D2)
        weights = np.full(n, h)
        weights[0] = weights[-1] = h / 2.0
    nodes = nodes.copy()
    nodes[0], nodes[-1] = a, b  # pin endpoints exactly against roundoff
    return Grid(kind, n, a, b, nodes, diffs, weights)


def integrate(grid: Grid, values: np.ndarray) -> float:
    """Quadrature of a grid function over [a, b]."""
    return float(grid.quad_weights @ grid.check_length(values))


@dataclass(frozen=True)
class BoundaryCondition:
    """A point condition d^k u/dr^k (endpoint) = value.

    location is "left" or "right"; derivative_order must be strictly less
    than the order of the operator being solved.
    """

    location: str
    derivative_order: int
    value: float

    def __post_init__(self):
        if self.location not in ("left", "right"):
            raise ConfigError(f"bad BC location {self.location!r}")
        if self.derivative_order < 0:
            raise ConfigError("BC derivative order must be >= 0")


def assemble_linear(op: LinearOperator, grid: Grid) -> np.ndarray:
    """Dense matrix of sum_k c_k(r) d^k/dr^k on the grid.

    Raises SingularOperatorError if the leading coefficient vanishes at any
    node.
    """
    lead = np.broadcast_to(eval_expr(op.coeffs[-1], grid.nodes), (grid.n,))
    if np.any(lead == 0.0):
        where = grid.nodes[np.asarray(lead == 0.0).nonzero()[0][0]]
        raise SingularOperatorError(
            f"leading coefficient of the order-{op.order} operator vanishes "
            f"at r = {where}"
        )
    A = np.diag(np.broadcast_to(eval_expr(op.coeffs[0], grid.nodes), (grid.n,)).astype(float).copy())
    for k in range(1, op.order + 1):
        ck = np.broadcast_to(eval_expr(op.coeffs[k], grid.nodes), (grid.n,))
        A = A + ck[:, None] * grid.diff_matrix(k)
    return A


def bc_row(grid: Grid, bc: BoundaryCondition) -> np.ndarray:
    """The functional row whose dot with u gives the BC's left-hand side."""
    idx = 0 if bc.location == "left" else grid.n - 1
    if bc.derivative_order == 0:
        row = np.zeros(grid.n)
        row[idx] = 1.0
        return row
    return grid.diff_matrix(bc.derivative_order)[idx].copy()


def bc_row_indices(grid: Grid, bcs) -> list:
    """Which matrix rows each BC replaces: left BCs take rows 0,1,...,
    right BCs take rows n-1, n-2, ... in input order."""
    left = right = 0
    rows = []
    for bc in bcs:
        if bc.location == "left":
            rows.append(left)
            left += 1
        else:
            rows.append(grid.n - 1 - right)
            right += 1
    if len(set(rows)) != len(rows) or (left + right) > grid.n:
        raise ConfigError("boundary conditions overlap")
    return rows


class BcSystem:
    """A linear operator with BC rows replaced, LU-factored once.

    The factorization is reused for every right-hand side (the zeroth-order
    solve, all higher-order solves, and Newton steps share it when the
    matrix is the same). Instances are immutable after construction and safe
    to share across threads.
    """

    def __init__(self, matrix: np.ndarray, bcs, grid: Grid):
        bcs = tuple(bcs)
        order_needed = len(bcs)
        for bc in bcs:
            if bc.derivative_order >= order_needed:
                raise ConfigError(
                    f"BC derivative order {bc.derivative_order} must be below "
                    f"the operator order {order_needed}"
                )
        self.grid = grid
        self.bcs = bcs
        self.rows = bc_row_indices(grid, bcs)
        A = np.array(matrix, dtype=float)
        if A.shape != (grid.n, grid.n):
            raise GridMismatchError(f"matrix shape {A.shape} does not match grid n={grid.n}")
        for i, bc in zip(self.rows, bcs):
            A[i] = bc_row(grid, bc)
        self.matrix = A
        self.condition = float(np.linalg.cond(A, 1))
        if not np.isfinite(self.condition) or self.condition > COND_LIMIT:
            raise SingularSystemError(
                f"BC-modified system is numerically singular (cond ~ {self.condition:.3e})"
            )
        try:
            self._lu = lu_factor(A)
        except np.linalg.LinAlgError as exc:  # pragma: no cover - cond check fires first
            raise SingularSystemError(str(exc)) from exc
        interior = np.ones(grid.n, dtype=bool)
        interior[self.rows] = False
        self.interior = interior

    def solve(self, rhs: np.ndarray, bc_values=None) -> np.ndarray:
        """Solve with ``rhs`` at interior rows and BC values at BC rows.

        bc_values None means "use each BC's own value"; pass zeros (or an
        explicit sequence) for homogeneous versions of the same conditions.
        """
        rhs = self.grid.check_length(rhs).copy()
        if bc_values is None:
            bc_values = [bc.value for bc in self.bcs]
        for i, v in zip(self.rows, bc_values):
            rhs[i] = v
        return lu_solve(self._lu, rhs)


def solve_with_bcs(op: LinearOperator, rhs: np.ndarray, bcs, grid: Grid) -> np.ndarray:
    """One-shot assemble + BC row replacement + solve."""
    if len(bcs) != op.order:
        raise ConfigError(
            f"operator of order {op.order} needs exactly {op.order} BCs, got {len(bcs)}"
        )
    return BcSystem(assemble_linear(op, grid), bcs, grid).solve(rhs)
