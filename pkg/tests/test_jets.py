"""Jet arithmetic against two independent oracles.

Polynomial trees are checked against numpy's polynomial algebra (exact
coefficient manipulation, no recurrences shared with the implementation).
Transcendental recurrences (exp, log, sin, cos, tanh, real powers) are
checked against sympy Taylor series computed symbolically per node.
"""

import numpy as np
import pytest
import sympy as sp
from numpy.polynomial import polynomial as P

from hamsolve import (
    ConfigError,
    DomainError,
    LinearOperator,
    U,
    build_grid,
    frechet_apply,
    frechet_at_reference,
    eval_expr,
    parse_expr,
)
from hamsolve.jets import (
    constant_jet,
    expr_partials,
    jet_exp,
    jet_expand,
    jet_log,
    jet_mul,
    jet_power,
    jet_reciprocal,
    jet_sin_cos,
    jet_tanh,
    series_jets,
)

DEPTH = 6
WIDTH = 3


def random_jet(rng, positive=False):
    j = rng.standard_normal((DEPTH, WIDTH))
    if positive:
        j[0] = 0.5 + np.abs(j[0])
    return j


def sympy_jet_of(fn, jet):
    """Taylor rows of fn(u(t)) with u(t) = sum_m jet[m] t^m, per node."""
    t = sp.symbols("t")
    out = np.zeros_like(jet)
    for p in range(jet.shape[1]):
        upoly = sum(sp.Float(jet[m, p], 17) * t**m for m in range(jet.shape[0]))
        ser = sp.series(fn(upoly), t, 0, jet.shape[0]).removeO()
        poly = sp.Poly(ser, t)
        for m in range(jet.shape[0]):
            out[m, p] = float(poly.coeff_monomial(t**m))
    return out


def assert_jets_close(got, want, tol=1e-10):
    scale = 1.0 + np.abs(want)
    assert np.max(np.abs(got - want) / scale) < tol


class TestTranscendentalRecurrences:
    rng = np.random.default_rng(1112)

    def test_exp(self):
        u = random_jet(self.rng)
        assert_jets_close(jet_exp(u), sympy_jet_of(sp.exp, u))

    def test_log(self):
        u = random_jet(self.rng, positive=True)
        assert_jets_close(jet_log(u), sympy_jet_of(sp.log, u))

    def test_sin_cos(self):
        u = random_jet(self.rng)
        s, c = jet_sin_cos(u)
        assert_jets_close(s, sympy_jet_of(sp.sin, u))
        assert_jets_close(c, sympy_jet_of(sp.cos, u))

    def test_tanh(self):
        u = random_jet(self.rng)
        assert_jets_close(jet_tanh(u), sympy_jet_of(sp.tanh, u))

    def test_real_power(self):
        u = random_jet(self.rng, positive=True)
        got = jet_power(u, 1.5)
        assert_jets_close(got, sympy_jet_of(lambda w: w ** sp.Rational(3, 2), u))

    def test_sqrt_via_power(self):
        u = random_jet(self.rng, positive=True)
        assert_jets_close(jet_power(u, 0.5), sympy_jet_of(sp.sqrt, u))


class TestAlgebraicIdentities:
    rng = np.random.default_rng(355)

    def test_mul_matches_cauchy(self):
        a, b = random_jet(self.rng), random_jet(self.rng)
        got = jet_mul(a, b)
        for p in range(WIDTH):
            want = P.polymul(a[:, p], b[:, p])[:DEPTH]
            np.testing.assert_allclose(got[:, p], want, rtol=1e-13, atol=1e-13)

    def test_reciprocal_inverts(self):
        v = random_jet(self.rng, positive=True)
        ident = jet_mul(v, jet_reciprocal(v))
        want = constant_jet(1.0, DEPTH, WIDTH)
        assert np.max(np.abs(ident - want)) < 1e-12

    def test_integer_power_is_repeated_mul(self):
        u = random_jet(self.rng)
        np.testing.assert_allclose(
            jet_power(u, 3.0), jet_mul(u, jet_mul(u, u)), rtol=1e-12, atol=1e-12
        )

    def test_negative_integer_power(self):
        u = random_jet(self.rng, positive=True)
        got = jet_mul(jet_power(u, -2.0), jet_power(u, 2.0))
        assert np.max(np.abs(got - constant_jet(1.0, DEPTH, WIDTH))) < 1e-10

    def test_pythagorean_identity(self):
        u = random_jet(self.rng)
        s, c = jet_sin_cos(u)
        total = jet_mul(s, s) + jet_mul(c, c)
        assert np.max(np.abs(total - constant_jet(1.0, DEPTH, WIDTH))) < 1e-12

    def test_domain_errors(self):
        bad = random_jet(self.rng)
        bad[0] = 0.0
        with pytest.raises(DomainError):
            jet_reciprocal(bad)
        with pytest.raises(DomainError):
            jet_log(bad)
        bad[0] = -1.0
        with pytest.raises(DomainError):
            jet_power(bad, 0.5)


class TestJetExpand:
    def test_composite_expression_vs_sympy(self):
        rng = np.random.default_rng(77)
        expr = parse_expr("exp(u)*sin(pi*r) + u'^2")
        r = rng.uniform(0.1, 0.9, WIDTH)
        u0 = random_jet(rng)
        u1 = random_jet(rng)
        got = jet_expand(expr, r, {0: u0, 1: u1}, DEPTH)
        t = sp.symbols("t")
        for p in range(WIDTH):
            up = sum(sp.Float(u0[m, p], 17) * t**m for m in range(DEPTH))
            dp = sum(sp.Float(u1[m, p], 17) * t**m for m in range(DEPTH))
            f = sp.exp(up) * sp.sin(sp.pi * sp.Float(r[p], 17)) + dp**2
            poly = sp.Poly(sp.series(f, t, 0, DEPTH).removeO(), t)
            want = [float(poly.coeff_monomial(t**m)) for m in range(DEPTH)]
            np.testing.assert_allclose(got[:, p], want, rtol=1e-10, atol=1e-10)

    def test_row_zero_is_pointwise_eval(self):
        expr = parse_expr("u'' + u^2 - 1")
        rng = np.random.default_rng(8)
        r = rng.uniform(0.0, 1.0, WIDTH)
        jets = {0: random_jet(rng), 2: random_jet(rng)}
        got = jet_expand(expr, r, jets, DEPTH)
        want = eval_expr(expr, r, {0: jets[0][0], 2: jets[2][0]})
        np.testing.assert_allclose(got[0], want, rtol=1e-14)

    def test_missing_or_misshaped_jets(self):
        expr = parse_expr("u''")
        r = np.zeros(WIDTH)
        with pytest.raises(ConfigError):
            jet_expand(expr, r, {0: np.zeros((DEPTH, WIDTH))}, DEPTH)
        with pytest.raises(ConfigError):
            jet_expand(expr, r, {2: np.zeros((DEPTH + 1, WIDTH))}, DEPTH)


def test_series_jets_rows_are_derivatives():
    g = build_grid("chebyshev-lobatto", 16, 0.0, 1.0)
    orders = [np.sin(g.nodes), g.nodes**3]
    jets = series_jets(g, orders, parse_expr("u'*u"))
    assert set(jets) == {0, 1}
    np.testing.assert_array_equal(jets[0][1], orders[1])
    np.testing.assert_allclose(jets[1][1], 3 * g.nodes**2, atol=1e-10)


class TestFrechet:
    def test_apply_matches_central_differences(self):
        g = build_grid("chebyshev-lobatto", 24, 0.0, 1.0)
        expr = parse_expr("u'' + u^2 + exp(u)*u'")
        rng = np.random.default_rng(5150)
        base = rng.standard_normal(g.n) * 0.3
        direction = rng.standard_normal(g.n)
        got = frechet_apply(expr, g, base, direction)
        h = 1e-6

        def at(v):
            return eval_expr(expr, g.nodes, g.derivative_stack(v, 2))

        fd = (at(base + h * direction) - at(base - h * direction)) / (2 * h)
        scale = max(1.0, float(np.max(np.abs(got))))
        assert np.max(np.abs(got - fd)) / scale < 1e-6

    def test_apply_linear_in_direction(self):
        g = build_grid("chebyshev-lobatto", 16, 0.0, 1.0)
        expr = parse_expr("u^2")
        rng = np.random.default_rng(99)
        base = rng.standard_normal(g.n)
        d = rng.standard_normal(g.n)
        one = frechet_apply(expr, g, base, d)
        three = frechet_apply(expr, g, base, 3.0 * d)
        np.testing.assert_allclose(three, 3.0 * one, rtol=1e-13)

    def test_partials_quadratic(self):
        expr = parse_expr("u'' + u^2")
        r = np.linspace(0.0, 1.0, 5)
        vals = {0: np.arange(5.0), 1: np.zeros(5), 2: np.ones(5)}
        parts = expr_partials(expr, r, vals)
        np.testing.assert_allclose(parts[0], 2 * vals[0], atol=1e-14)
        np.testing.assert_allclose(parts[2], np.ones(5), atol=1e-14)
        assert np.max(np.abs(parts[1])) == 0.0

    def test_reference_matrix_quadratic_case(self):
        # d/du [u'' + u^2] at u0 = sin(pi r) is v -> v'' + 2 sin(pi r) v
        g = build_grid("chebyshev-lobatto", 24, 0.0, 1.0)
        L = LinearOperator.from_strings(("0", "0", "1"))
        N = parse_expr("u^2")
        u0 = np.sin(np.pi * g.nodes)
        A = frechet_at_reference(L, N, g, u0)
        want = g.diff_matrix(2) + np.diag(2.0 * u0)
        assert np.max(np.abs(A - want)) < 1e-12

    def test_reference_matrix_with_derivative_nonlinearity(self):
        g = build_grid("chebyshev-lobatto", 16, 0.0, 1.0)
        L = LinearOperator.from_strings(("0", "1"))
        N = parse_expr("u*u'")
        rng = np.random.default_rng(31)
        u0 = rng.standard_normal(g.n)
        A = frechet_at_reference(L, N, g, u0)
        d1 = g.diff_matrix(1)
        want = d1 + np.diag(d1 @ u0) + u0[:, None] * d1
        assert np.max(np.abs(A - want)) < 1e-11

    def test_reference_matrix_pure_linear(self):
        g = build_grid("chebyshev-lobatto", 16, 0.0, 1.0)
        L = LinearOperator.from_strings(("0", "0", "1"))
        A = frechet_at_reference(L, parse_expr("0"), g, np.zeros(g.n))
        assert np.max(np.abs(A - g.diff_matrix(2))) == 0.0
