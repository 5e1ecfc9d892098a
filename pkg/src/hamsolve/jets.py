"""Truncated Taylor-series (jet) arithmetic over grid nodes.

A jet is a plain ndarray of shape (depth, width): row m holds the m-th
Taylor coefficient of a quantity expanded in the embedding parameter, at
each of ``width`` grid nodes. All operations truncate at ``depth`` rows.

Analytic functions are propagated by the standard coefficient recurrences
(exp, log, real powers, the coupled sin/cos pair, tanh via 1 - tanh^2);
compositions whose constant term violates a domain restriction raise
DomainError. Two-row jets double as forward-mode dual numbers, which is how
the directional (Fréchet) derivative of an expression is computed.
"""

from __future__ import annotations

import numpy as np

from .errors import ConfigError, DomainError
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
    eval_expr,
    max_u_order,
)
from .grids import Grid, assemble_linear


def constant_jet(value, depth: int, width: int) -> np.ndarray:
    out = np.zeros((depth, width))
    out[0] = value
    return out


def jet_mul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Truncated Cauchy product."""
    depth = a.shape[0]
    out = np.empty_like(a)
    for m in range(depth):
        out[m] = np.einsum("ij,ij->j", a[: m + 1], b[m::-1])
    return out


def jet_reciprocal(v: np.ndarray) -> np.ndarray:
    if np.any(v[0] == 0.0):
        raise DomainError("reciprocal of a jet with zero constant term")
    out = np.zeros_like(v)
    out[0] = 1.0 / v[0]
    for m in range(1, v.shape[0]):
        acc = np.einsum("ij,ij->j", v[1 : m + 1], out[m - 1 :: -1])
        out[m] = -acc / v[0]
    return out


def jet_power(u: np.ndarray, exponent: float) -> np.ndarray:
    if float(exponent).is_integer():
        k = int(exponent)
        if k < 0:
            return jet_reciprocal(jet_power(u, -k))
        out = constant_jet(1.0, *u.shape)
        base = u
        while k:  # exponentiation by squaring keeps integer powers exact-ish
            if k & 1:
                out = jet_mul(out, base)
            k >>= 1
            if k:
                base = jet_mul(base, base)
        return out
    if np.any(u[0] <= 0.0):
        raise DomainError(
            f"non-integer power {exponent} of a jet needs a strictly positive "
            "constant term"
        )
    depth = u.shape[0]
    out = np.zeros_like(u)
    out[0] = u[0] ** exponent
    for m in range(1, depth):
        # from u w' = rho u' w: m u0 w_m = sum_k (rho k - (m-k)) u_k w_{m-k}
        ks = np.arange(1, m + 1)
        coeff = exponent * ks - (m - ks)
        acc = np.einsum("i,ij,ij->j", coeff, u[1 : m + 1], out[m - 1 :: -1])
        out[m] = acc / (m * u[0])
    return out


def jet_exp(u: np.ndarray) -> np.ndarray:
    depth = u.shape[0]
    out = np.zeros_like(u)
    out[0] = np.exp(u[0])
    for m in range(1, depth):
        ks = np.arange(1, m + 1, dtype=float)
        out[m] = np.einsum("i,ij,ij->j", ks, u[1 : m + 1], out[m - 1 :: -1]) / m
    return out


def jet_log(u: np.ndarray) -> np.ndarray:
    if np.any(u[0] <= 0.0):
        raise DomainError("log of a jet needs a strictly positive constant term")
    depth = u.shape[0]
    out = np.zeros_like(u)
    out[0] = np.log(u[0])
    for m in range(1, depth):
        acc = m * u[m]
        if m > 1:
            js = np.arange(1, m, dtype=float)
            # sum_j (m-j) u_j w_{m-j} over j = 1..m-1
            acc = acc - np.einsum("i,ij,ij->j", (m - js), u[1:m], out[m - 1 : 0 : -1])
        out[m] = acc / (m * u[0])
    return out


def jet_sin_cos(u: np.ndarray):
    depth = u.shape[0]
    s = np.zeros_like(u)
    c = np.zeros_like(u)
    s[0] = np.sin(u[0])
    c[0] = np.cos(u[0])
    for m in range(1, depth):
        ks = np.arange(1, m + 1, dtype=float)
        du = u[1 : m + 1]
        s[m] = np.einsum("i,ij,ij->j", ks, du, c[m - 1 :: -1]) / m
        c[m] = -np.einsum("i,ij,ij->j", ks, du, s[m - 1 :: -1]) / m
    return s, c


def jet_tanh(u: np.ndarray) -> np.ndarray:
    depth = u.shape[0]
    t = np.zeros_like(u)
    g = np.zeros_like(u)  # g = 1 - t^2, filled alongside t
    t[0] = np.tanh(u[0])
    g[0] = 1.0 - t[0] ** 2
    for m in range(1, depth):
        ks = np.arange(1, m + 1, dtype=float)
        t[m] = np.einsum("i,ij,ij->j", ks, u[1 : m + 1], g[m - 1 :: -1]) / m
        g[m] = -np.einsum("ij,ij->j", t[: m + 1], t[m::-1])
    return t


def jet_expand(expr: OperatorExpr, r: np.ndarray, u_jets: dict, depth: int) -> np.ndarray:
    """Jet of ``expr`` given jets for each referenced u-derivative order.

    Args:
        expr: expression tree.
        r: grid nodes, shape (width,).
        u_jets: {derivative order: jet of shape (depth, width)}.
        depth: number of Taylor rows to carry (M + 1).

    Returns:
        Jet of shape (depth, width); row 0 equals the pointwise evaluation
        of the expression at the jets' constant terms.
    """
    r = np.asarray(r, dtype=float)
    width = r.shape[0]

    def rec(node):
        if isinstance(node, Const):
            return constant_jet(node.value, depth, width)
        if isinstance(node, Coord):
            return constant_jet(r, depth, width)
        if isinstance(node, U):
            if node.order not in u_jets:
                raise ConfigError(
                    f"no jet supplied for u derivative order {node.order}"
                )
            jet = np.asarray(u_jets[node.order], dtype=float)
            if jet.shape != (depth, width):
                raise ConfigError(
                    f"jet for order {node.order} has shape {jet.shape}, "
                    f"expected {(depth, width)}"
                )
            return jet
        if isinstance(node, Sum):
            acc = rec(node.terms[0]).copy()
            for t in node.terms[1:]:
                acc += rec(t)
            return acc
        if isinstance(node, Product):
            acc = rec(node.factors[0])
            for f in node.factors[1:]:
                acc = jet_mul(acc, rec(f))
            return acc
        if isinstance(node, Power):
            return jet_power(rec(node.base), node.exponent)
        if isinstance(node, Call):
            arg = rec(node.arg)
            if node.name == "sin":
                return jet_sin_cos(arg)[0]
            if node.name == "cos":
                return jet_sin_cos(arg)[1]
            if node.name == "exp":
                return jet_exp(arg)
            if node.name == "log":
                return jet_log(arg)
            if node.name == "tanh":
                return jet_tanh(arg)
            if node.name == "sqrt":
                return jet_power(arg, 0.5)
        raise TypeError(f"not an expression node: {node!r}")

    return rec(expr)


def series_jets(grid: Grid, orders, expr: OperatorExpr) -> dict:
    """Jets of u, u', ... for a series u = sum_m orders[m] p^m.

    Row m of jet k holds d^k orders[m] / dr^k sampled on the grid.
    """
    depth = len(orders)
    upto = max(max_u_order(expr), 0)
    jets = {}
    for k in range(upto + 1):
        jet = np.empty((depth, grid.n))
        mat = None if k == 0 else grid.diff_matrix(k)
        for m, om in enumerate(orders):
            om = grid.check_length(om)
            jet[m] = om if mat is None else mat @ om
        jets[k] = jet
    return jets


def frechet_apply(expr: OperatorExpr, grid: Grid, base: np.ndarray, direction: np.ndarray) -> np.ndarray:
    """Directional derivative of expr at ``base`` in direction ``direction``.

    Both arguments are grid functions; their derivative values come from the
    grid's differentiation matrices. Implemented as a two-row jet (forward
    mode), so it is exactly linear in ``direction``.
    """
    upto = max(max_u_order(expr), 0)
    bs = grid.derivative_stack(base, upto)
    ds = grid.derivative_stack(direction, upto)
    u_jets = {k: np.stack((bs[k], ds[k])) for k in range(upto + 1)}
    return jet_expand(expr, grid.nodes, u_jets, 2)[1]


def expr_partials(expr: OperatorExpr, r: np.ndarray, u_values: dict) -> dict:
    """Pointwise partial derivatives of expr w.r.t. each u-derivative slot.

    ``u_values`` maps derivative order -> sampled values at the nodes.
    Returns {order: d expr / d u^(order)} arrays, one forward-mode sweep per
    referenced order.
    """
    r = np.asarray(r, dtype=float)
    width = r.shape[0]
    upto = max_u_order(expr)
    out = {}
    for seed in range(upto + 1):
        u_jets = {}
        for k in range(upto + 1):
            jet = np.zeros((2, width))
            jet[0] = u_values[k]
            if k == seed:
                jet[1] = 1.0
            u_jets[k] = jet
        out[seed] = jet_expand(expr, r, u_jets, 2)[1]
    return out


def frechet_at_reference(L: LinearOperator, N: OperatorExpr, grid: Grid, u0: np.ndarray) -> np.ndarray:
    """Assembled matrix of the Fréchet derivative of L + N at ``u0``.

    The linear part contributes its own matrix; the nonlinear part
    contributes sum_k diag(dN/du^(k) at u0) D_k.
    """
    u0 = grid.check_length(u0)
    A = assemble_linear(L, grid)
    upto = max_u_order(N)
    if upto < 0:
        return A
    stack = grid.derivative_stack(u0, upto)
    partials = expr_partials(N, grid.nodes, stack)
    for k, pk in partials.items():
        if k == 0:
            A = A + np.diag(pk)
        else:
            A = A + pk[:, None] * grid.diff_matrix(k)
    return A
