import numpy as np
import pytest
from hypothesis import given, strategies as st

from linecong import oracle
from linecong.congruence import Domain, LineCongruence, eigenvalues_at
from linecong.errors import CorankTwo, NotPolynomial
from linecong.jets import Jet
from linecong.normalize import DISCRIMINANT, HYPERBOLIC
from linecong.suites import equiaffine_residuals, random_hyperbolic_points

from conftest import darboux, example

CONST = LineCongruence.from_shape("2", "0", "0", "1", domain=Domain(-1, 1, -1, 1))
HYP = ("fold", "cusp", "swal")
DISC = ("disc", "flat", "reg")


def pair_for(C, kind, branch=1):
    pc = oracle.normalized_poly(C, (0.0, 0.0), kind, branch)
    return pc, oracle.solve_equiaffine_polynomial(pc, kind)


def test_constant_shape_pair():
    pc, pair = pair_for(CONST, HYPERBOLIC)
    # p = -(u^2 + v^2)/2 and q = 1 + u^2 + v^2/2 by hand integration
    np.testing.assert_allclose(oracle.ptrim(pair.p), [[0, 0, -0.5], [0, 0, 0], [-0.5, 0, 0]], atol=1e-14)
    np.testing.assert_allclose(pair.q, [[1, 0, 0.5], [0, 0, 0], [1, 0, 0]], atol=1e-14)
    assert pair.mode == "exact"


@pytest.mark.parametrize("name,kind", [(n, HYPERBOLIC) for n in HYP] + [(n, DISCRIMINANT) for n in DISC])
def test_residual_suite(name, kind):
    assert equiaffine_residuals(example(name), (0.0, 0.0), kind) < 1e-8


def test_non_polynomial_rejected():
    C = LineCongruence.from_xi("-sin(u)", "-v", domain=Domain(-1, 1, -1, 1))
    with pytest.raises(NotPolynomial):
        oracle.poly_congruence(C)


@pytest.mark.parametrize("name,kind", [(n, HYPERBOLIC) for n in HYP] + [(n, DISCRIMINANT) for n in DISC])
@pytest.mark.parametrize("t", [0.3, -0.7, 1.4])
def test_support_critical_and_hessian(name, kind, t):
    _, pair = pair_for(example(name), kind)
    sj = oracle.support_jet(pair, (0.0, 0.0), (0.0, 0.0, t), 3)
    assert abs(sj.deriv(1, 0)) < 1e-12 and abs(sj.deriv(0, 1)) < 1e-12
    h = pair.metric((0.0, 0.0))
    a, b, c, d = pair.shape_jets((0.0, 0.0), 1)
    S = np.array([[a.value, b.value], [c.value, d.value]])
    np.testing.assert_allclose(sj.hessian(), h @ (np.eye(2) - t * S), atol=1e-8)


@pytest.mark.parametrize("name", HYP)
def test_focal_hessian_degenerate(name):
    pc, pair = pair_for(example(name), HYPERBOLIC)
    for lam in (pc.coef("a"), pc.coef("d")):
        sj = oracle.support_jet(pair, (0.0, 0.0), (0.0, 0.0, 1 / lam), 2)
        assert abs(np.linalg.det(sj.hessian())) < 1e-12


def test_closed_form_values():
    ident = oracle.identity_suite(example("fold"), (0.0, 0.0), HYPERBOLIC)
    assert dict((c.name, c.computed) for c in ident.checks)["rho_uuu"] == pytest.approx(-0.5)
    ident = oracle.identity_suite(example("disc"), (0.0, 0.0), DISCRIMINANT)
    got = {c.name: c.computed for c in ident.checks}
    assert got["rho_vvv"] == pytest.approx(0.0, abs=1e-12)
    assert got["rho_uvv"] == pytest.approx(-3.0)
    assert got["rho_vvvv"] == pytest.approx(-18.0)
    ident = oracle.identity_suite(example("swal"), (0.0, 0.0), HYPERBOLIC)
    # -(4 a01 c20 + (a0 - d0) a30) / (a0 (a0 - d0)) = -(4 * 1 * 2) / 2
    assert {c.name: c.computed for c in ident.checks}["rho_uuuuu"] == pytest.approx(-4.0)


def jet2(coefs, degree=5):
    return Jet.from_taylor(coefs, degree, (0.0, 0.0))


def test_ak_type_normal_forms():
    assert oracle.ak_type(jet2({(2, 0): 1, (0, 2): 1})) == 1
    assert oracle.ak_type(jet2({(2, 0): 1, (0, 3): 1})) == 2
    assert oracle.ak_type(jet2({(2, 0): 1, (0, 4): 1})) == 3
    assert oracle.ak_type(jet2({(2, 0): 1, (0, 5): 1})) == 4
    assert oracle.ak_type(jet2({(2, 0): 1})) == oracle.DEEPER
    with pytest.raises(CorankTwo):
        oracle.ak_type(jet2({(3, 0): 1, (0, 3): 1}))


def test_ak_type_uses_completed_square():
    # x^2 + x y^2 + c y^4: the y^4 term of the reduced function is c - 1/4
    assert oracle.ak_type(jet2({(2, 0): 1, (1, 2): 1, (0, 4): 0.25})) == oracle.DEEPER
    assert oracle.ak_type(jet2({(2, 0): 1, (1, 2): 1, (0, 4): 1.0})) == 3


@given(st.floats(0.1, 3), st.floats(-3, 3), st.floats(0, np.pi))
def test_ak_type_rotation_invariant(s, k, phi):
    # A2 normal form s x^2 + k y^3 rotated by phi
    c, sn = np.cos(phi), np.sin(phi)
    x = {(1, 0): c, (0, 1): sn}
    y = {(1, 0): -sn, (0, 1): c}
    X = jet2(x)
    Y = jet2(y)
    f = X * X * s + Y * Y * Y * k
    expected = 2 if abs(k) > 1e-3 else oracle.DEEPER
    if expected != oracle.DEEPER:
        assert oracle.ak_type(f) == expected


def test_oracle_ak_golden():
    assert oracle.oracle_ak(example("fold"), (0, 0), HYPERBOLIC) == 2
    assert oracle.oracle_ak(example("cusp"), (0, 0), HYPERBOLIC) == 3
    assert oracle.oracle_ak(example("swal"), (0, 0), HYPERBOLIC) == 4
    assert oracle.oracle_ak(example("disc"), (0, 0), DISCRIMINANT) == 3
    assert oracle.oracle_ak(example("reg"), (0, 0), DISCRIMINANT) == 2


@given(st.integers(0, 3), st.lists(st.floats(-1, 1), min_size=10, max_size=10))
def test_q_form_exactness_identity(which, cs):
    # (q_u)_v - (q_v)_u equals the PDE residual for any potential on integrable data
    pc = oracle.poly_congruence(example(("fold", "swal", "disc", "flat")[which]))
    P = np.zeros((4, 4))
    for (i, j), c in zip([(i, n - i) for n in range(4) for i in range(n + 1)], cs):
        P[i, j] = c
    qu = -oracle.padd(oracle.pmul(pc.a, oracle.pder(P, 0)), oracle.pmul(pc.c, oracle.pder(P, 1)))
    qv = -oracle.padd(oracle.pmul(pc.b, oracle.pder(P, 0)), oracle.pmul(pc.d, oracle.pder(P, 1)))
    mixed = oracle.padd(oracle.pder(qu, 1), -oracle.pder(qv, 0))
    res = oracle.pde_residual_poly(pc, P)
    assert np.max(np.abs(oracle.padd(mixed, -res))) < 1e-13


@pytest.mark.parametrize("name,kind", [(n, HYPERBOLIC) for n in HYP] + [(n, DISCRIMINANT) for n in DISC])
def test_q_form_exact_for_solution(name, kind):
    pc, pair = pair_for(example(name), kind)
    assert oracle.q_form_exactness(pc, pair.p) < 1e-12


@pytest.mark.parametrize("name", HYP)
def test_hyperbolic_jet_preservation(name):
    jp = oracle.jet_preservation(example(name), (0.0, 0.0), HYPERBOLIC)
    for key, val in jp.items():
        if key == "h":
            continue
        got, want = val
        assert got == pytest.approx(want, rel=1e-7, abs=1e-7), key


@pytest.mark.parametrize("name", DISC)
def test_discriminant_one_jets_and_b02(name):
    jp = oracle.jet_preservation(example(name), (0.0, 0.0), DISCRIMINANT)
    for key, (got, want) in jp.items():
        if key != "c20":
            assert got == pytest.approx(want, rel=1e-7, abs=1e-7), key


@pytest.mark.parametrize("shape", [
    ("1+v", "u", "1", "1+3*v"),
    ("1+v", "u+4.5*v^2", "1", "1+3*v"),
    ("1+v", "u+v", "1", "1"),
    ("1+v", "u", "2+u^2", "1+3*v"),
    ("1+v", "u", "1+u^2", "1+3*v"),
])
def test_discriminant_c20_relation(shape):
    # the pair's c~20 is c20 - c0^2 in the discriminant chart, not c20
    C = LineCongruence.from_shape(*shape, domain=Domain(-0.5, 0.5, -0.5, 0.5))
    jp = oracle.jet_preservation(C, (0.0, 0.0), DISCRIMINANT)
    got, c20 = jp["c20"]
    c0 = jp["c00"][1]
    assert got == pytest.approx(c20 - c0**2, abs=1e-9)


def test_rank_scan_constant_shape():
    scan = oracle.jacobian_rank_scan(CONST, (0.1, -0.2))
    ts = sorted(t for t, s in scan.minima if s < 1e-10)
    assert ts == pytest.approx([0.5, 1.0], abs=1e-6)


def test_rank_scan_darboux(rng):
    C = darboux(2.0, domain=Domain(-1.5, 1.5, -1.5, 1.5))
    pts = random_hyperbolic_points(C, 6, rng, min_gap=0.2)
    for p in pts:
        scan = oracle.jacobian_rank_scan(C, p)
        lams = eigenvalues_at(C, p)
        for lam in lams:
            best = min(scan.minima, key=lambda m: abs(m[0] - 1 / lam))
            assert abs(best[0] - 1 / lam) < 1e-6
            assert best[1] < 1e-8 * max(1.0, scan.scale)
            for t in (1 / lam + 0.1, 1 / lam - 0.1):
                # skip offsets that land near the other focal parameter
                if min(abs(t - 1 / l) for l in lams) > 0.05:
                    assert oracle.sigma_min(C, p[0], p[1], t) > 1e-3 * scan.scale
