"""Ridge fields and the data attached to singular discriminant points.

With the eigenvector written as w = (lam - d, c), the ridge condition d lam(w) = 0 becomes
g1 = A sqrt(delta) + B = 0 for the larger eigenvalue and g2 = B - A sqrt(delta) = 0 for the
smaller one, where

    A = (a-d) a_u + c d_v + 2 c a_v + b c_u
    B = (a-d)^2 a_u + (a-d)(2 c a_v - c d_v + b c_u) + 2 c (2 b d_u + b a_u + c b_v).

The product G = A^2 delta - B^2 = -g1 g2 is smooth across delta = 0.  Because w vanishes
on {c = 0} for one of the branches, G carries a spurious factor c; writing
B = (a-d) A + c K gives G = c * Gr with the reduced field Gr = 4 b A^2 - 2 (a-d) A K - c K^2,
which is what curve tracing uses.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .config import DEFAULT_TOL, Tolerances
from .congruence import LineCongruence, ShapeJets, matrix_scale, shape_at
from .errors import DegenerateData, NotNormalized
from .jets import Jet, jet_diff, monomials
from .normalize import DISCRIMINANT, NormalizedJets, normalize_at

SADDLE = "Saddle"
NODE = "Node"
FOCUS = "Focus"
DEGENERATE = "Degenerate"


@dataclass
class RidgeFields:
    A: Jet
    B: Jet
    K: Jet
    G: Jet
    Gr: Jet
    delta: Jet
    g1: Optional[float] = None
    g2: Optional[float] = None
    # homogeneity scale for g: |S|^2 times the first-derivative size
    scale: float = 1.0

    def g(self, branch: int) -> Optional[float]:
        return self.g1 if branch == 1 else self.g2


def _ridge_jets(sj: ShapeJets):
    D = sj.degree - 1
    a, b, c, d = (x.truncate(D) for x in sj.as_tuple())
    au, av = jet_diff(sj.a, "u"), jet_diff(sj.a, "v")
    bv = jet_diff(sj.b, "v")
    cu = jet_diff(sj.c, "u")
    du, dv = jet_diff(sj.d, "u"), jet_diff(sj.d, "v")
    amd = a - d
    A = amd * au + c * dv + 2.0 * c * av + b * cu
    B = amd * amd * au + amd * (2.0 * c * av - c * dv + b * cu) + 2.0 * c * (2.0 * b * du + b * au + c * bv)
    K = 2.0 * (2.0 * b * du + b * au + c * bv) - 2.0 * amd * dv
    delta = amd * amd + 4.0 * b * c
    G = A * A * delta - B * B
    Gr = 4.0 * b * A * A - 2.0 * amd * A * K - c * K * K
    return A, B, K, G, Gr, delta


def ridge_fields_from_shape(sj: ShapeJets) -> RidgeFields:
    if sj.degree < 1:
        raise ValueError("ridge fields need shape jets of degree >= 1")
    A, B, K, G, Gr, delta = _ridge_jets(sj)
    rf = RidgeFields(A, B, K, G, Gr, delta)
    n0 = max(abs(float(np.max(np.abs(x.value)))) for x in sj.as_tuple())
    n1 = sj.derivative_scale() if sj.degree >= 1 else 0.0
    rf.scale = max(n0 * n0 * n1, 1e-300)
    dv = delta.value
    if np.ndim(dv) == 0 and dv > 0:
        r = float(np.sqrt(dv))
        rf.g1 = float(A.value * r + B.value)
        rf.g2 = float(B.value - A.value * r)
    return rf


def ridge_fields_at(C: LineCongruence, p, degree: int = 3, tol: Tolerances = DEFAULT_TOL) -> RidgeFields:
    return ridge_fields_from_shape(shape_at(C, p, degree, tol))


def reduced_ridge_values(C: LineCongruence, u, v, tol: Tolerances = DEFAULT_TOL):
    """Gr on arrays of points."""
    sj = shape_at(C, (np.asarray(u, float), np.asarray(v, float)), 1, tol)
    return _ridge_jets(sj)[4].value


def branch_slopes(C: LineCongruence, p, tol: Tolerances = DEFAULT_TOL):
    """d lam_i(w_i) with unit eigenvectors, per branch; None where delta <= 0.

    This is the ridge condition without the degenerate eigenvector normalization, so
    it is used to decide which branch a ridge point belongs to.
    """
    sj = shape_at(C, p, 1, tol)
    return branch_slopes_from_shape(sj)


def branch_slopes_from_shape(sj: ShapeJets):
    a, b, c, d = sj.as_tuple()
    delta = sj.delta
    dl = float(delta.value)
    if dl <= 0:
        return None, None
    r = np.sqrt(dl)
    grad_tr = (a + d).gradient()
    grad_r = delta.gradient() / (2.0 * r)
    (a0, b0), (c0, d0) = sj.matrix()
    out = []
    for sgn in (1.0, -1.0):
        lam = 0.5 * (a0 + d0 + sgn * r)
        w1 = np.array([lam - d0, c0])
        w2 = np.array([b0, lam - a0])
        w = w1 if np.linalg.norm(w1) >= np.linalg.norm(w2) else w2
        w = w / np.linalg.norm(w)
        out.append(float(0.5 * (grad_tr + sgn * grad_r) @ w))
    return out[0], out[1]


# -- singular discriminant points ---------------------------------------------

@dataclass
class DiscriminantReport:
    L: np.ndarray
    delta1: float
    delta2: float
    folded_type: str
    separatrices: list
    A0: Optional[float]
    B1: Optional[float]
    Q: Optional[float]
    alpha: Optional[float]
    coefficients: dict = field(default_factory=dict)
    tolerances: dict = field(default_factory=dict)

    @property
    def det_L(self) -> float:
        return float(np.linalg.det(self.L)) if self.L is not None else float("nan")


def order_scales(nj) -> list:
    """n_k = largest |order-k derivative| among a, b, c, d, for k = 0..degree."""
    D = nj.a.degree
    out = []
    for k in range(D + 1):
        m = 0.0
        for jt in (nj.a, nj.b, nj.c, nj.d):
            for i, j in monomials(D):
                if i + j == k:
                    m = max(m, abs(float(jt.coef(i, j))) * math.factorial(i) * math.factorial(j))
        out.append(m)
    return out


def check_discriminant_normal(nj, tol: Tolerances = DEFAULT_TOL, gate: float = 1e-4):
    a0, b0, c0, d0 = (float(x.value) for x in (nj.a, nj.b, nj.c, nj.d))
    scale = float(matrix_scale(a0, b0, c0, d0))
    if abs(a0 - d0) > gate * scale or abs(b0) > gate * scale:
        raise NotNormalized(f"jets are not in discriminant normal form (a0-d0={a0 - d0:.3e}, b0={b0:.3e})")
    if abs(c0) <= tol.eps_umb * scale:
        raise NotNormalized("c0 vanishes: umbilic or not normalized")


def folded_type(delta1: float, delta2: float, s1: float, s2: float, rel: float) -> str:
    if abs(delta1) <= rel * s1 or abs(delta2) <= rel * s2:
        return DEGENERATE
    if delta1 < 0:
        return SADDLE
    return NODE if delta2 > 0 else FOCUS


def discriminant_report_from_jets(nj, tol: Tolerances = DEFAULT_TOL) -> DiscriminantReport:
    """DiscriminantReport from jets already in discriminant normal form with b01 = 0."""
    check_discriminant_normal(nj, tol)
    c0 = float(nj.c.value)
    a01 = float(nj.a.deriv(0, 1))
    d01 = float(nj.d.deriv(0, 1))
    b01 = float(nj.b.deriv(0, 1))
    b02 = float(nj.b.deriv(0, 2))
    n = order_scales(nj)
    s_delta = n[1] ** 2 + n[0] * n[2]
    if abs(b01) > max(tol.rel_zero * n[1], 1e-300):
        raise NotNormalized(f"b01 = {b01:.3e} does not vanish: regular discriminant point")
    delta1 = (d01 - a01) * (2 * a01 - d01) - 2 * c0 * b02
    delta2 = (2 * d01 - 3 * a01) ** 2 + 8 * c0 * b02
    L = None
    if abs(a01) > tol.rel_zero * n[1]:
        L = np.array([[d01 - a01, 2 * c0], [b02, 2 * a01 - d01]]) / a01
    ftype = folded_type(delta1, delta2, s_delta, s_delta, tol.rel_zero)
    seps = []
    # slopes beta of the separatrices: 2 c0 beta^2 + (2 d01 - 3 a01) beta - b02 = 0
    qa, qb = 2 * c0, 2 * d01 - 3 * a01
    if delta2 > tol.rel_zero * s_delta:
        r = np.sqrt(delta2)
        seps = sorted(float(x) for x in ((-qb + r) / (2 * qa), (-qb - r) / (2 * qa)))
    A0 = B1 = Q = alpha = None
    A0v = c0 * (2 * a01 + d01)
    if abs(a01) > tol.rel_zero * n[1] and abs(A0v) > tol.rel_zero * n[0] * n[1]:
        A0 = A0v
        B1 = c0 * (a01 * (a01 - d01) + (a01 - d01) ** 2 + 2 * c0 * b02)
        Q = ((a01 - d01) ** 2 + 2 * c0 * b02) / (2 * a01 * c0)
        alpha = B1**2 / (2 * c0 * a01 * A0**2) - Q
    coeffs = {"a0": float(nj.a.value), "b0": float(nj.b.value), "c0": c0, "d0": float(nj.d.value),
              "a01": a01, "b01": b01, "b02": b02, "d01": d01,
              "a10": float(nj.a.deriv(1, 0)), "b10": float(nj.b.deriv(1, 0)),
              "c10": float(nj.c.deriv(1, 0)), "d10": float(nj.d.deriv(1, 0))}
    tols = {"delta_scale": s_delta, "rel_zero": tol.rel_zero, "b01_scale": n[1]}
    return DiscriminantReport(L, float(delta1), float(delta2), ftype, seps, A0, B1, Q, alpha, coeffs, tols)


def discriminant_ridge_data(C: LineCongruence, p, degree: int = 4, tol: Tolerances = DEFAULT_TOL,
                            normalized: NormalizedJets | None = None) -> DiscriminantReport:
    nj = normalized or normalize_at(C, p, kind=DISCRIMINANT, degree=degree, tol=tol)
    rep = discriminant_report_from_jets(nj, tol)
    if rep.alpha is None:
        # report is still useful, but the ridge-graph coefficient is absent
        rep.tolerances["alpha_absent"] = 1.0
    return rep


def require_alpha(rep: DiscriminantReport) -> float:
    if rep.alpha is None:
        raise DegenerateData("A0 or a01 vanishes; the ridge graph coefficient is undefined")
    return rep.alpha


def contact_indicator(nj) -> tuple:
    a01 = float(nj.a.deriv(0, 1))
    d01 = float(nj.d.deriv(0, 1))
    b02 = float(nj.b.deriv(0, 2))
    c0 = float(nj.c.value)
    n = order_scales(nj)
    return 3 * a01 * d01 - c0 * b02, n[1] ** 2 + n[0] * n[2]


def ridge_separatrix_contact(C: LineCongruence, p, degree: int = 4, tol: Tolerances = DEFAULT_TOL,
                             normalized: NormalizedJets | None = None) -> dict:
    """Contact of the ridge with the tangent separatrix: order >= 3 iff the indicator vanishes."""
    nj = normalized or normalize_at(C, p, kind=DISCRIMINANT, degree=degree, tol=tol)
    check_discriminant_normal(nj, tol)
    ind, scale = contact_indicator(nj)
    return {"flat": abs(ind) < tol.rel_zero * scale, "indicator": float(ind), "scale": float(scale)}
