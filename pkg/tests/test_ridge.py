import numpy as np
import pytest
from hypothesis import given, strategies as st

from linecong.congruence import Domain, LineCongruence, delta_values, eigen_at, scaled, shape_at, shape_values
from linecong.errors import NotNormalized
from linecong.ridge import (DEGENERATE, NODE, SADDLE, branch_slopes, discriminant_ridge_data,
                            ridge_fields_at, ridge_separatrix_contact)
from linecong.tracer import trace_ridges

from conftest import darboux, example


def test_g1_normalized_formula():
    # normalized point b0 = c0 = 0: g1 = 2 (a0 - d0)^2 a10
    C = LineCongruence.from_shape("3 + 2*u + v", "u", "0.5*u^2", "1 + v")
    rf = ridge_fields_at(C, (0.0, 0.0))
    assert rf.g1 == pytest.approx(2 * (3 - 1) ** 2 * 2)


def test_cusp_and_fold_ridge_values():
    rf = ridge_fields_at(example("cusp"), (0.0, 0.0))
    assert float(rf.A.value) == 0 and float(rf.B.value) == 0
    rf = ridge_fields_at(example("fold"), (0.0, 0.0))
    assert rf.g1 == pytest.approx(2.0)


def test_g_product_identity(rng):
    C = example("flat", Domain(-1, 1, -1, 1))
    for _ in range(30):
        p = rng.uniform(-1, 1, 2)
        rf = ridge_fields_at(C, p)
        if rf.g1 is None:
            continue
        G = float(rf.G.value)
        assert rf.g1 * rf.g2 == pytest.approx(-G, rel=1e-10, abs=1e-12 * rf.scale**2)


def test_spurious_factor_c():
    # G carries a factor c: G = c * Gr identically
    C = example("swal", Domain(-1, 1, -1, 1))
    sj = shape_at(C, (0.3, 0.2), 4)
    rf = ridge_fields_at(C, (0.3, 0.2), 4)
    np.testing.assert_allclose(rf.G.coeffs, (sj.c.truncate(3) * rf.Gr).coeffs, atol=1e-12)


def test_darboux_discriminant_reports():
    for m in (-1.0, 0.25, 2.0, 4.0, 0.75):
        rep = discriminant_ridge_data(darboux(m), (1.0, 0.0))
        assert rep.delta1 == pytest.approx(m * (1 - m))
        assert rep.delta2 == pytest.approx((2 * m - 1) ** 2)
        assert rep.folded_type == (SADDLE if (m < 0 or m > 1) else NODE)
        beta = sorted(rep.separatrices)
        assert beta == pytest.approx(sorted([0.0, (1 - 2 * m) / 4]), abs=1e-12)
    assert discriminant_ridge_data(darboux(0.5), (1.0, 0.0)).folded_type == DEGENERATE
    # general L: off-diagonal entry 4s
    rep = discriminant_ridge_data(darboux(2.0, 0.5, Domain(-2, 2, -2, 2)), (0.5, 0.0))
    assert np.sign(rep.delta1) == np.sign(rep.det_L)


def test_e_disc_report():
    rep = discriminant_ridge_data(example("disc"), (0.0, 0.0))
    assert (rep.delta1, rep.delta2) == pytest.approx((-2.0, 9.0))
    assert rep.folded_type == SADDLE
    assert sorted(rep.separatrices) == pytest.approx([-1.5, 0.0])
    assert (rep.A0, rep.B1, rep.Q) == pytest.approx((5.0, 2.0, 2.0))
    assert rep.alpha == pytest.approx(-48 / 25)
    c0, a01, d01, b02 = 1.0, 1.0, 3.0, 0.0
    for beta in rep.separatrices:
        assert abs(2 * c0 * beta**2 + (2 * d01 - 3 * a01) * beta - b02) < 1e-10


def test_not_normalized():
    with pytest.raises(NotNormalized):
        discriminant_ridge_data(example("reg"), (0.0, 0.0))


def test_contact_indicator():
    r = ridge_separatrix_contact(example("disc"), (0.0, 0.0))
    assert r["indicator"] == pytest.approx(9.0) and not r["flat"]
    r = ridge_separatrix_contact(example("flat"), (0.0, 0.0))
    assert abs(r["indicator"]) < 1e-12 and r["flat"]
    r2 = ridge_separatrix_contact(scaled(example("disc"), 2.0), (0.0, 0.0))
    assert r2["indicator"] == pytest.approx(4 * 9.0) and not r2["flat"]
    assert ridge_separatrix_contact(scaled(example("flat"), 2.0), (0.0, 0.0))["flat"]


def _fd_branch_slope(C, p, branch, h=1e-5):
    ed = eigen_at(C, p)
    w = ed.w1 if branch == 1 else ed.w2

    def lam(q):
        e = eigen_at(C, q)
        return e.lam1 if branch == 1 else e.lam2

    return (lam(np.asarray(p) + h * w) - lam(np.asarray(p) - h * w)) / (2 * h)


def test_traced_ridge_vanishes_for_its_branch():
    from linecong.config import DEFAULT_NUMERICS
    C = example("disc")
    ridges = trace_ridges(C, DEFAULT_NUMERICS)
    assert ridges
    for pl in ridges:
        for p, tag in zip(pl.points[::7], pl.tags[::7]):
            if tag not in (1, 2):
                continue
            s = branch_slopes(C, p)
            if float(delta_values(C, *p)) > 1e-2:
                # finite differences of sqrt(delta) are unreliable close to the discriminant
                assert abs(_fd_branch_slope(C, p, int(tag))) < 1e-6
            assert abs(s[int(tag) - 1]) < 1e-8


@given(st.floats(-0.4, 0.4), st.floats(-0.4, 0.4))
def test_branch_slopes_match_finite_differences(u, v):
    C = example("flat")
    a, b, c, d = (float(x) for x in shape_values(C, u, v))
    if (a - d) ** 2 + 4 * b * c < 1e-2:
        return
    s = branch_slopes(C, (u, v))
    for br in (1, 2):
        # eigenvectors are defined up to sign
        assert abs(s[br - 1]) == pytest.approx(abs(_fd_branch_slope(C, (u, v), br)), rel=1e-5, abs=1e-6)
