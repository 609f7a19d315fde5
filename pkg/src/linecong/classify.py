"""Pointwise classification of the congruence map and of the principal-direction field."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .config import DEFAULT_NUMERICS, DEFAULT_TOL, Numerics, Tolerances
from .congruence import LineCongruence, ShapeJets, matrix_scale, shape_at
from .errors import DegenerateData, LineCongruenceError, NotNormalized, UmbilicPoint
from .normalize import (DISCRIMINANT, HYPERBOLIC, NormalizedJets, Transform, hyperbolic_shear,
                        normalize_discriminant, normalize_hyperbolic)
from .ridge import DiscriminantReport, discriminant_report_from_jets, order_scales

FOLD = "Fold"
CUSPIDAL_EDGE = "CuspidalEdge"
SWALLOWTAIL = "Swallowtail"
DISC_FOLD = "DiscriminantFold"
DISC_CUSP = "DiscriminantCuspidalEdge"
DEGENERATE = "Degenerate"
UMBILIC = "Umbilic"

# A_k order of the support function matching each verdict
AK_ORDER = {FOLD: 2, CUSPIDAL_EDGE: 3, SWALLOWTAIL: 4, DISC_FOLD: 2, DISC_CUSP: 3}


@dataclass
class PointReport:
    point: tuple
    kind: str
    branch: int
    verdict: str
    quantities: dict = field(default_factory=dict)
    thresholds: dict = field(default_factory=dict)
    discriminant: Optional[DiscriminantReport] = None
    transform: Optional[Transform] = None
    ambiguous: bool = False
    oracle_verdict: Optional[object] = None
    notes: list = field(default_factory=list)

    @property
    def ak_order(self) -> Optional[int]:
        return AK_ORDER.get(self.verdict)


def _nonzero(x: float, scale: float, tol: Tolerances) -> bool:
    return abs(x) > tol.rel_zero * scale


def _c(j, i=0, k=0) -> float:
    return float(j.deriv(i, k))


def classify_hyperbolic(sj: ShapeJets, point, branch: int, tol: Tolerances = DEFAULT_TOL) -> PointReport:
    nsj, J, sign = normalize_hyperbolic(sj, branch, tol)
    tr = Transform(tuple(point), J, sign)
    a, b, c, d = nsj.as_tuple()
    n = order_scales(nsj)
    a0, d0 = _c(a), _c(d)
    gap = a0 - d0
    a10, a01, a20, a30 = _c(a, 1, 0), _c(a, 0, 1), _c(a, 2, 0), _c(a, 3, 0) if a.degree >= 3 else np.nan
    c10 = _c(c, 1, 0)
    g = 2.0 * gap**2 * a10
    q = {"a0": a0, "d0": d0, "a10": a10, "a01": a01, "a20": a20, "c10": c10, "g": g,
         "lambda": sign * a0}
    th = {"g": tol.rel_zero * n[0] ** 2 * n[1]}
    rep = PointReport(tuple(point), HYPERBOLIC, branch, DEGENERATE, q, th, transform=tr)
    if _nonzero(g, n[0] ** 2 * n[1], tol):
        rep.verdict = FOLD
        return rep
    T = gap * a20 + 3.0 * c10 * a01
    q["T"] = T
    th["T"] = tol.rel_zero * (n[0] * n[2] + n[1] ** 2)
    if _nonzero(T, n[0] * n[2] + n[1] ** 2, tol):
        rep.verdict = CUSPIDAL_EDGE
        return rep
    if nsj.degree < 3:
        rep.notes.append("degree too low for the swallowtail test")
        return rep
    ssj, kappa = hyperbolic_shear(nsj)
    rep.transform = Transform(tuple(point), J, sign, kappa)
    sa, sc = ssj.a, ssj.c
    W = 4.0 * _c(sc, 2, 0) * _c(sa, 0, 1) + (_c(sa) - _c(ssj.d)) * _c(sa, 3, 0)
    ns = order_scales(ssj)
    q.update({"kappa": kappa, "W": W, "sheared.a20": _c(sa, 2, 0), "sheared.a30": _c(sa, 3, 0),
              "sheared.c20": _c(sc, 2, 0), "sheared.c10": _c(sc, 1, 0)})
    th["W"] = tol.rel_zero * (ns[0] * ns[3] + ns[1] * ns[2])
    rep.verdict = SWALLOWTAIL if _nonzero(W, ns[0] * ns[3] + ns[1] * ns[2], tol) else DEGENERATE
    return rep


def classify_discriminant(sj: ShapeJets, point, tol: Tolerances = DEFAULT_TOL) -> PointReport:
    nsj, J = normalize_discriminant(sj, tol)
    tr = Transform(tuple(point), J)
    a, b, c, d = nsj.as_tuple()
    n = order_scales(nsj)
    b01 = _c(b, 0, 1)
    q = {"a0": _c(a), "b0": _c(b), "c0": _c(c), "d0": _c(d), "a01": _c(a, 0, 1), "b01": b01,
         "b10": _c(b, 1, 0), "d01": _c(d, 0, 1)}
    th = {"b01": tol.rel_zero * n[1]}
    rep = PointReport(tuple(point), DISCRIMINANT, 0, DEGENERATE, q, th, transform=tr)
    if _nonzero(b01, n[1], tol):
        rep.verdict = DISC_FOLD
        return rep
    b02 = _c(b, 0, 2)
    C3 = 3.0 * q["d01"] * q["a01"] - q["c0"] * b02
    q.update({"b02": b02, "C3": C3})
    th["C3"] = tol.rel_zero * (n[1] ** 2 + n[0] * n[2])
    rep.verdict = DISC_CUSP if _nonzero(C3, n[1] ** 2 + n[0] * n[2], tol) else DEGENERATE
    try:
        nd = NormalizedJets(a, b, c, d, tr, 0, DISCRIMINANT)
        rep.discriminant = discriminant_report_from_jets(nd, tol)
        dr = rep.discriminant
        q.update({"Delta1": dr.delta1, "Delta2": dr.delta2, "alpha": dr.alpha})
        q["beta"] = list(dr.separatrices)
        th["Delta"] = tol.rel_zero * dr.tolerances["delta_scale"]
    except (NotNormalized, DegenerateData) as err:
        rep.notes.append(str(err))
    return rep


def classify_shape_jets(sj: ShapeJets, point, tol: Tolerances = DEFAULT_TOL) -> list:
    """Decision tree on shape jets at one point; an empty list means delta < 0 there."""
    (a, b), (c, d) = sj.matrix()
    scale = float(matrix_scale(a, b, c, d))
    delta = (a - d) ** 2 + 4 * b * c
    eps = tol.eps_delta * scale**2
    if np.sqrt((a - d) ** 2 + b * b + c * c) < tol.eps_umb * max(scale, 1e-300):
        raise UmbilicPoint(f"umbilic point at {tuple(point)}")
    if delta < -eps:
        return []
    if delta <= eps:
        rep = classify_discriminant(sj, point, tol)
        rep.quantities["delta"] = delta
        rep.thresholds["delta"] = eps
        return [rep]
    reps = [classify_hyperbolic(sj, point, br, tol) for br in (1, 2)]
    for r in reps:
        r.quantities["delta"] = delta
        r.thresholds["delta"] = eps
    if delta < 10 * eps:
        alt = classify_discriminant(sj, point, tol)
        orders = {r.ak_order for r in reps} | {alt.ak_order}
        if len(orders) > 1:
            for r in reps:
                r.ambiguous = True
                r.notes.append(f"near the discriminant; discriminant test gives {alt.verdict}")
    return reps


def classify_point(C: LineCongruence, p, degree: int = 4, tol: Tolerances = DEFAULT_TOL) -> list:
    """PointReports at ``p``: one per branch at hyperbolic points, one on the discriminant."""
    sj = shape_at(C, p, degree, tol)
    return classify_shape_jets(sj, (float(p[0]), float(p[1])), tol)


def report_for_branch(reports: list, branch: int) -> PointReport:
    for r in reports:
        if r.branch == branch:
            return r
    raise LookupError(f"no report for branch {branch}")


def scan_domain(C: LineCongruence, numerics: Numerics = DEFAULT_NUMERICS, with_oracle: bool = False) -> list:
    """Classify sample points of traced ridges and discriminant curves and their special points."""
    from .tracer import scan_features
    return scan_features(C, numerics, with_oracle)
