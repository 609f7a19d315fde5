import numpy as np
import pytest
from hypothesis import given, strategies as st

from linecong.config import DEFAULT_NUMERICS
from linecong.congruence import Domain, LineCongruence, delta_values
from linecong.errors import GradientTooSmall
from linecong.tracer import (BRANCH1, BRANCH2, FunctionField, Polyline, find_singular_discriminant_points,
                             find_zero_seeds, trace_all, trace_discriminant, trace_implicit, trace_ridges)

from conftest import darboux, example


def circle_field(r=0.6):
    return FunctionField(lambda u, v: u * u + v * v - r * r, lambda u, v: np.array([2 * u, 2 * v]))


def test_polyline_distance_and_length():
    pl = Polyline(np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0]]))
    assert pl.length == pytest.approx(2.0)
    assert pl.distance_to((0.5, 0.3)) == pytest.approx(0.3)
    assert Polyline(pl.points, closed=True).length == pytest.approx(2 + np.sqrt(2))


def test_trace_circle_closes():
    lines, fails = trace_all(circle_field(), Domain(-1, 1, -1, 1))
    assert not fails and len(lines) == 1
    line = lines[0]
    assert line.closed
    r = np.linalg.norm(line.points, axis=1)
    assert np.max(np.abs(r - 0.6)) < 1e-10
    assert line.length == pytest.approx(2 * np.pi * 0.6, rel=1e-3)


def test_trace_exits_domain():
    f = FunctionField(lambda u, v: u - 0.3 * v * v)
    lines, _ = trace_all(f, Domain(-1, 1, -1, 1))
    assert len(lines) == 1 and not lines[0].closed
    end = lines[0].points[[0, -1]]
    # the last accepted point is within one step of the boundary
    assert np.all(np.abs(end[:, 1]) > 1 - DEFAULT_NUMERICS.step)
    assert np.all(np.abs(end[:, 0] - 0.3 * end[:, 1] ** 2) < 1e-10)


def test_gradient_too_small():
    f = FunctionField(lambda u, v: u * u + v * v, lambda u, v: np.array([2 * u, 2 * v]))
    with pytest.raises(GradientTooSmall):
        trace_implicit(f, (0.0, 0.0), 0.01, Domain(-1, 1, -1, 1))


def test_seeds_lie_on_zero_set():
    seeds = find_zero_seeds(circle_field(0.45), Domain(-1, 1, -1, 1), 24)
    assert seeds
    assert all(abs(np.hypot(*s) - 0.45) < 1e-10 for s in seeds)


@given(st.floats(0.2, 0.8), st.floats(0.0, 2 * np.pi))
def test_retrace_from_any_point_matches(r, phi):
    # tracing again from a point of the curve reproduces the same set
    dom = Domain(-1, 1, -1, 1)
    f = circle_field(r)
    a = trace_implicit(f, (r * np.cos(phi), r * np.sin(phi)), 0.01, dom)
    b = trace_all(f, dom)[0][0]
    hd = max(max(b.distance_to(p) for p in a.points[::7]), max(a.distance_to(p) for p in b.points[::7]))
    assert hd < 1e-4


def test_darboux_circle():
    C = darboux(2.0, domain=Domain(-1.5, 1.5, -1.5, 1.5))
    lines = trace_discriminant(C)
    assert len(lines) == 1 and lines[0].closed
    P = lines[0].points
    assert np.max(np.abs(np.hypot(P[:, 0], P[:, 1]) - 1)) < 1e-9
    assert np.max(np.abs(delta_values(C, P[:, 0], P[:, 1]))) < 1e-10
    sps = find_singular_discriminant_points(C, lines)
    assert len(sps) == 1
    np.testing.assert_allclose(sps[0].point, [1.0, 0.0], atol=1e-9)


@pytest.mark.parametrize("m", [-1.0, -0.3, 0.25, 0.75])
def test_darboux_three_points(m):
    C = darboux(m)
    pts = sorted((tuple(s.point) for s in find_singular_discriminant_points(C)), key=lambda p: p[1])
    assert len(pts) == 3
    u0 = m / (2 - m)
    v0 = np.sqrt(4 - 4 * u0 * u0) / abs(m)
    np.testing.assert_allclose(pts, [(u0, -v0), (1.0, 0.0), (u0, v0)], atol=1e-8)


def test_e_disc_parabola_and_point():
    C = example("disc")
    lines = trace_discriminant(C)
    assert len(lines) == 1
    P = lines[0].points
    assert np.max(np.abs(P[:, 0] + P[:, 1] ** 2)) < 1e-10
    sps = find_singular_discriminant_points(C, lines)
    assert len(sps) == 1 and np.linalg.norm(sps[0].point) < 1e-9


def test_e_cusp_ridge_is_v_axis():
    ridges = trace_ridges(example("cusp"))
    assert ridges
    for r in ridges:
        assert np.max(np.abs(r.points[:, 0])) < 1e-9
        assert np.all(r.tags & BRANCH1)


def test_e_fold_has_no_ridge():
    assert trace_ridges(example("fold")) == []


def test_e_disc_ridge_tags_switch():
    ridges = trace_ridges(example("disc"))
    near = [r for r in ridges if r.distance_to((0.0, 0.0)) < DEFAULT_NUMERICS.step**2]
    assert len(near) == 1
    P, t = near[0].points, near[0].tags
    lo = t[(P[:, 1] < -0.02) & (P[:, 1] > -0.1)]
    hi = t[(P[:, 1] > 0.02) & (P[:, 1] < 0.1)]
    assert len(lo) and len(hi)
    assert len(set(lo)) == 1 and len(set(hi)) == 1 and set(lo) != set(hi)
    assert set(lo) | set(hi) == {BRANCH1, BRANCH2}


def test_residuals_recorded():
    for line in trace_discriminant(darboux(0.25)):
        assert len(line.residuals) == len(line.points)
        assert np.max(line.residuals) < DEFAULT_NUMERICS.tol.corrector * 10
