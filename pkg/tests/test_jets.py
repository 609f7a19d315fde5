import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from linecong.errors import DivisionByNearZero, SqrtDomain, StructuralError
from linecong.jets import (Jet, index, jet_compose, jet_cos, jet_diff, jet_exp, jet_recip, jet_sin, jet_sqrt,
                           linear_substitution, monomials, n_coeffs)


def J(terms, D=2, center=(0.0, 0.0)):
    return Jet.from_taylor(terms, D, center)


def U(D=2):
    return Jet.offset("u", D)


def V(D=2):
    return Jet.offset("v", D)


def test_layout():
    assert n_coeffs(3) == 10
    assert [index(*m) for m in monomials(3)] == list(range(10))
    assert list(monomials(2)) == [(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)]


def test_product_examples():
    one = Jet.constant(1.0, 2)
    assert ((one + U()) * (one + V())).allclose(J({(0, 0): 1, (1, 0): 1, (0, 1): 1, (1, 1): 1}))
    x = J({(0, 0): 3, (1, 1): -2, (0, 2): 5})
    assert (x * one).allclose(x)
    assert ((U() + V()) ** 2).allclose(J({(2, 0): 1, (1, 1): 2, (0, 2): 1}))


def test_mismatch_is_structural_error():
    with pytest.raises(StructuralError):
        U(2) + U(3)
    with pytest.raises(StructuralError):
        Jet.constant(1.0, 2, (0.0, 0.0)) * Jet.constant(1.0, 2, (1.0, 0.0))


def test_recip_examples():
    assert float(jet_recip(Jet.constant(2.0, 2)).value) == 0.5
    assert jet_recip(Jet.constant(1.0, 2) + U()).allclose(J({(0, 0): 1, (1, 0): -1, (2, 0): 1}))
    with pytest.raises(DivisionByNearZero):
        jet_recip(U())


def test_sqrt_examples():
    assert float(jet_sqrt(Jet.constant(4.0, 2)).value) == 2.0
    one = Jet.constant(1.0, 2)
    assert jet_sqrt(one + 2 * U() + U() * U()).allclose(one + U())
    assert jet_sqrt(one + U()).allclose(J({(0, 0): 1, (1, 0): 0.5, (2, 0): -0.125}))
    with pytest.raises(SqrtDomain):
        jet_sqrt(Jet.constant(-1.0, 2))


def test_transcendental_series():
    D = 5
    u = U(D)
    s = jet_sin(u)
    assert s.allclose(J({(1, 0): 1, (3, 0): -1 / 6, (5, 0): 1 / 120}, D))
    assert jet_cos(u).allclose(J({(0, 0): 1, (2, 0): -0.5, (4, 0): 1 / 24}, D))
    assert jet_exp(u + V(D)).coef(2, 3) == pytest.approx(1 / (2 * 6))
    x = Jet.constant(0.3, D) + u
    assert float(jet_sin(x).value) == pytest.approx(math.sin(0.3))
    assert jet_sin(x).deriv(3, 0) == pytest.approx(-math.cos(0.3))


def test_diff_examples():
    D = 3
    x = U(D) * U(D) * V(D)
    assert jet_diff(x, "u").allclose(J({(1, 1): 2}, 2))
    assert jet_diff(Jet.constant(7.0, D), "v").allclose(Jet.constant(0.0, 2))
    with pytest.raises(StructuralError):
        jet_diff(Jet.constant(1.0, 0), "u")


def test_compose_examples():
    D = 3
    u, v = U(D), V(D)
    f = u * u
    assert jet_compose(f, u + v, v).allclose((u + v) ** 2)
    g = J({(0, 0): 1.5, (1, 0): 2, (1, 2): -1, (3, 0): 4}, D)
    assert jet_compose(g, u, v).allclose(g)
    assert jet_compose(u * v, u, v - u * u * 0.5).allclose(J({(1, 1): 1, (3, 0): -0.5}, D))
    with pytest.raises(StructuralError):
        jet_compose(f, u + 1.0, v)


def test_linear_substitution():
    D = 3
    u, v = U(D), V(D)
    f = u * u * v + 2 * v
    M = np.array([[1.0, 2.0], [-1.0, 0.5]])
    g = linear_substitution(f, M)
    uu, vv = M[0, 0] * u + M[0, 1] * v, M[1, 0] * u + M[1, 1] * v
    assert g.allclose(uu * uu * vv + 2 * vv)


def test_derivative_access_and_batch():
    x = Jet.from_derivatives({(2, 1): 6.0, (0, 0): 1.0}, 3)
    assert x.deriv(2, 1) == pytest.approx(6.0)
    assert x.coef(2, 1) == pytest.approx(3.0)
    centers = (np.array([0.0, 1.0, 2.0]), np.array([0.0, 0.0, 1.0]))
    u = Jet.variable("u", 2, centers)
    y = u * u
    assert y.batch_shape == (3,)
    np.testing.assert_allclose(y.value, [0.0, 1.0, 4.0])
    np.testing.assert_allclose(y.deriv(1, 0), [0.0, 2.0, 4.0])


def test_degree_bounds():
    with pytest.raises(StructuralError):
        Jet.constant(1.0, 7)
    with pytest.raises(StructuralError):
        Jet(2, np.zeros(5))


# -- properties ----------------------------------------------------------------

def _coeffs(D, lo=-1.0, hi=1.0):
    return st.lists(st.floats(lo, hi, allow_nan=False), min_size=n_coeffs(D), max_size=n_coeffs(D))


degrees = st.integers(2, 6)


@given(degrees.flatmap(lambda D: st.tuples(st.just(D), _coeffs(D), _coeffs(D))))
def test_product_rule(args):
    D, a, b = args
    x, y = Jet(D, a), Jet(D, b)
    for ax in "uv":
        lhs = jet_diff(x * y, ax)
        rhs = jet_diff(x, ax) * y.truncate(D - 1) + x.truncate(D - 1) * jet_diff(y, ax)
        assert np.max(np.abs(lhs.coeffs - rhs.coeffs)) < 1e-12


@given(degrees.flatmap(lambda D: st.tuples(st.just(D), _coeffs(D))))
def test_mixed_partials_commute(args):
    D, a = args
    x = Jet(D, a)
    assert np.array_equal(jet_diff(jet_diff(x, "u"), "v").coeffs, jet_diff(jet_diff(x, "v"), "u").coeffs)


@given(degrees.flatmap(lambda D: st.tuples(st.just(D), _coeffs(D, -0.5, 0.5), st.floats(0.5, 3.0))))
def test_sqrt_round_trip(args):
    D, a, c0 = args
    x = Jet(D, a)
    x.coeffs[0] = c0
    y = jet_sqrt(x)
    assert np.max(np.abs((y * y).coeffs - x.coeffs)) <= 1e-12 * max(1.0, np.max(np.abs(x.coeffs)))


@given(degrees.flatmap(lambda D: st.tuples(st.just(D), _coeffs(D, -0.5, 0.5), st.floats(0.5, 3.0))))
def test_recip_round_trips(args):
    D, a, c0 = args
    x = Jet(D, a)
    x.coeffs[0] = c0
    r = jet_recip(x)
    assert np.max(np.abs((x * r).coeffs - Jet.constant(1.0, D).coeffs)) < 1e-12
    rr = jet_recip(r)
    assert np.max(np.abs(rr.coeffs - x.coeffs)) <= 1e-10 * max(1.0, np.max(np.abs(x.coeffs)))


def _zero_const(D, c):
    j = Jet(D, c)
    j.coeffs[0] = 0.0
    return j


@given(degrees.flatmap(lambda D: st.tuples(st.just(D), *[_coeffs(D) for _ in range(5)])))
def test_compose_associative(args):
    D, f, g1, g2, h1, h2 = args
    f = Jet(D, f)
    g1, g2, h1, h2 = (_zero_const(D, c) for c in (g1, g2, h1, h2))
    lhs = jet_compose(jet_compose(f, g1, g2), h1, h2)
    rhs = jet_compose(f, jet_compose(g1, h1, h2), jet_compose(g2, h1, h2))
    assert np.max(np.abs(lhs.coeffs - rhs.coeffs)) <= 1e-12 * max(1.0, np.max(np.abs(lhs.coeffs)))


@given(st.floats(-2, 2), st.floats(-2, 2), degrees)
def test_evaluate_matches_polynomial(u0, v0, D):
    # the jet of a polynomial of degree <= D is exact, so evaluation at an offset reproduces it
    c = (u0, v0)
    u, v = Jet.variable("u", D, c), Jet.variable("v", D, c)
    p = u * u - 3 * u * v + 2.0
    du, dv = 0.3, -0.2
    assert float(p.evaluate(du, dv)) == pytest.approx((u0 + du) ** 2 - 3 * (u0 + du) * (v0 + dv) + 2.0)
