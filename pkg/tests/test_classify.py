import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from linecong.classify import (CUSPIDAL_EDGE, DEGENERATE, DISC_CUSP, DISC_FOLD, FOLD, SWALLOWTAIL,
                               classify_point, classify_shape_jets, report_for_branch, scan_domain)
from linecong.congruence import Domain, LineCongruence, ShapeJets, reparametrize
from linecong.errors import UmbilicPoint
from linecong.jets import Jet
from linecong.suites import verdicts

from conftest import example

GOLDEN = {"fold": FOLD, "cusp": CUSPIDAL_EDGE, "swal": SWALLOWTAIL, "disc": DISC_CUSP, "reg": DISC_FOLD}


def literal_jets(a, b, c, d, degree=4):
    """Shape jets from coefficient dicts {(i, j): derivative}."""
    z = (0.0, 0.0)
    return ShapeJets(*(Jet.from_derivatives(x, degree, z) for x in (a, b, c, d)))


@pytest.mark.parametrize("name", list(GOLDEN))
def test_golden_verdicts(name):
    reps = classify_point(example(name), (0.0, 0.0))
    got = reps[0].verdict if reps[0].kind == "Discriminant" else report_for_branch(reps, 1).verdict
    assert got == GOLDEN[name]


def test_branch_two_degenerate():
    for name in ("fold", "cusp", "swal"):
        assert report_for_branch(classify_point(example(name), (0.0, 0.0)), 2).verdict == DEGENERATE


def test_swallowtail_quantities():
    r = report_for_branch(classify_point(example("swal"), (0.0, 0.0)), 1)
    assert r.quantities["T"] == 0.0
    assert r.quantities["W"] == pytest.approx(8.0)


def test_literal_regular_discriminant_jets():
    # a = 1 + v, b = v, c = 1, d = 1 (not integrable, so only as jets)
    sj = literal_jets({(0, 0): 1, (0, 1): 1}, {(0, 1): 1}, {(0, 0): 1}, {(0, 0): 1})
    (r,) = classify_shape_jets(sj, (0.0, 0.0))
    assert r.verdict == DISC_FOLD
    assert r.quantities["b01"] == pytest.approx(1.0)


def test_elliptic_point_has_no_report():
    C = LineCongruence.from_shape("1", "-1", "1", "1", domain=Domain(-1, 1, -1, 1))
    assert classify_point(C, (0.0, 0.0)) == []


def test_umbilic_raises():
    C = LineCongruence.from_shape("1+u", "v", "v", "1+u", domain=Domain(-1, 1, -1, 1))
    with pytest.raises(UmbilicPoint):
        classify_point(C, (0.0, 0.0))


def test_near_discriminant_flagged_ambiguous():
    # just off a regular discriminant point the hyperbolic and discriminant tests disagree
    C = example("reg")
    eps = classify_point(C, (0.0, 0.0))[0].thresholds["delta"]
    reps = classify_point(C, (eps, 0.0))
    assert len(reps) == 2 and all(r.ambiguous for r in reps)
    assert any(DISC_FOLD in n for n in reps[0].notes)
    far = classify_point(C, (0.2, 0.0))
    assert not any(r.ambiguous for r in far)


def test_scan_finds_golden_point():
    reps = scan_domain(example("disc"))
    assert any(r.verdict == DISC_CUSP and np.linalg.norm(r.point) < 1e-8 for r in reps)


@settings(max_examples=25)
@given(st.sampled_from(list(GOLDEN)), st.floats(-2, 2), st.floats(-2, 2), st.floats(-2, 2), st.floats(-2, 2))
def test_linear_invariance(name, m00, m01, m10, m11):
    M = np.array([[m00, m01], [m10, m11]])
    if abs(np.linalg.det(M)) < 0.2 or np.linalg.cond(M) > 20:
        return
    C = example(name)
    before = verdicts(classify_point(C, (0.0, 0.0)))
    after = verdicts(classify_point(reparametrize(C, M, offset=(0.0, 0.0)), (0.0, 0.0)))
    assert before == after
