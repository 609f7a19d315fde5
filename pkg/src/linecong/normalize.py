"""Local normal forms of the shape operator at a point.

Under a reparametrization phi with J = D(phi) the shape operator transforms as
S' = J^-1 (S o phi) J.  At a hyperbolic point the chosen branch's eigenvector becomes
e1 (so b0 = c0 = 0, a0 > d0).  At a discriminant point the double principal direction
becomes e2 (so a0 = d0, b0 = 0, c0 != 0).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .config import DEFAULT_TOL, Tolerances
from .congruence import LineCongruence, ShapeJets, eigen_from_matrix, matrix_scale, shape_at
from .errors import UmbilicPoint
from .jets import Jet, jet_compose

HYPERBOLIC = "Hyperbolic"
DISCRIMINANT = "Discriminant"


@dataclass(frozen=True)
class Transform:
    """(u, v) = origin + J (U, V + kappa U^2 / 2); ``sign`` = -1 means xi was reversed."""

    origin: tuple
    J: np.ndarray = field(default_factory=lambda: np.eye(2))
    sign: float = 1.0
    kappa: float = 0.0

    def to_original(self, U, V):
        V2 = V + 0.5 * self.kappa * U * U
        return (self.origin[0] + self.J[0, 0] * U + self.J[0, 1] * V2,
                self.origin[1] + self.J[1, 0] * U + self.J[1, 1] * V2)

    def is_identity(self, tol: float = 1e-12) -> bool:
        return np.allclose(self.J, np.eye(2), atol=tol) and self.sign == 1.0 and self.kappa == 0.0


@dataclass
class NormalizedJets:
    a: Jet
    b: Jet
    c: Jet
    d: Jet
    transform: Transform
    branch: int
    kind: str

    @property
    def shape(self) -> ShapeJets:
        return ShapeJets(self.a, self.b, self.c, self.d)

    def coef(self, name: str, i: int = 0, j: int = 0) -> float:
        """Derivative-normalized coefficient, e.g. coef('a', 1, 0) is a_10 = a_u(0)."""
        return float(getattr(self, name).deriv(i, j))


def _matmul(A, B):
    return [[A[i][0] * B[0][j] + A[i][1] * B[1][j] for j in range(2)] for i in range(2)]


def linear_transform(sj: ShapeJets, J, sign: float = 1.0) -> ShapeJets:
    """Shape jets in coordinates (du, dv) = J (U, V) about the same center."""
    J = np.asarray(J, dtype=float)
    Ji = np.linalg.inv(J)
    D = sj.degree
    U = Jet.offset("u", D, sj.center)
    V = Jet.offset("v", D, sj.center)
    gu = U * J[0, 0] + V * J[0, 1]
    gv = U * J[1, 0] + V * J[1, 1]
    S = [[jet_compose(sj.a, gu, gv), jet_compose(sj.b, gu, gv)],
         [jet_compose(sj.c, gu, gv), jet_compose(sj.d, gu, gv)]]
    out = _matmul(Ji.tolist(), _matmul(S, J.tolist()))
    return ShapeJets(out[0][0] * sign, out[0][1] * sign, out[1][0] * sign, out[1][1] * sign)


def shear_transform(sj: ShapeJets, kappa: float) -> ShapeJets:
    """Shape jets in coordinates u = U, v = V + kappa U^2 / 2."""
    D = sj.degree
    U = Jet.offset("u", D, sj.center)
    V = Jet.offset("v", D, sj.center)
    gv = V + U * U * (0.5 * kappa)
    S = [[jet_compose(x, U, gv) for x in (sj.a, sj.b)], [jet_compose(x, U, gv) for x in (sj.c, sj.d)]]
    one = Jet.constant(1.0, D, sj.center)
    zero = Jet.constant(0.0, D, sj.center)
    Jm = [[one, zero], [U * kappa, one]]
    Jinv = [[one, zero], [U * (-kappa), one]]
    out = _matmul(Jinv, _matmul(S, Jm))
    return ShapeJets(out[0][0], out[0][1], out[1][0], out[1][1])


def normalize_hyperbolic(sj: ShapeJets, branch: int, tol: Tolerances = DEFAULT_TOL):
    """Linear normalization putting the ``branch`` eigenvector on the U axis."""
    ed = eigen_from_matrix(sj.matrix(), tol)
    wb, wo = (ed.w1, ed.w2) if branch == 1 else (ed.w2, ed.w1)
    J = np.column_stack([wb, wo])
    sign = 1.0 if branch == 1 else -1.0
    return linear_transform(sj, J, sign), J, sign


def hyperbolic_shear(sj: ShapeJets) -> tuple:
    """Shear removing c_10 from hyperbolic-normalized jets; returns (jets, kappa)."""
    gap = float(sj.a.value - sj.d.value)
    kappa = float(sj.c.deriv(1, 0)) / gap
    return shear_transform(sj, kappa), kappa


def normalize_discriminant(sj: ShapeJets, tol: Tolerances = DEFAULT_TOL):
    """Linear normalization putting the double principal direction on the V axis."""
    (a, b), (c, d) = sj.matrix()
    scale = float(matrix_scale(a, b, c, d))
    if np.sqrt((a - d) ** 2 + b**2 + c**2) < tol.eps_umb * max(scale, 1e-300):
        raise UmbilicPoint("umbilic point on the discriminant")
    lam = 0.5 * (a + d)
    w1 = np.array([lam - d, c])
    w2 = np.array([b, lam - a])
    w = w1 if np.linalg.norm(w1) >= np.linalg.norm(w2) else w2
    w = w / np.linalg.norm(w)
    if w[1] < 0 or (w[1] == 0 and w[0] < 0):
        w = -w
    x = np.array([w[1], -w[0]])
    J = np.column_stack([x, w])
    return linear_transform(sj, J), J


def normalize_jets(sj: ShapeJets, branch: int, kind: str, origin, tol: Tolerances = DEFAULT_TOL,
                   shear: bool = False) -> NormalizedJets:
    if kind == HYPERBOLIC:
        nj, J, sign = normalize_hyperbolic(sj, branch, tol)
        kappa = 0.0
        if shear:
            nj, kappa = hyperbolic_shear(nj)
        return NormalizedJets(*nj.as_tuple(), Transform(tuple(origin), J, sign, kappa), branch, kind)
    nj, J = normalize_discriminant(sj, tol)
    return NormalizedJets(*nj.as_tuple(), Transform(tuple(origin), J), 0, kind)


def normalize_at(C: LineCongruence, p, branch: int = 1, kind: str | None = None, degree: int = 4,
                 tol: Tolerances = DEFAULT_TOL, shear: bool = False) -> NormalizedJets:
    """Normalized shape jets of ``C`` at ``p``; ``kind`` defaults from the sign of delta."""
    sj = shape_at(C, p, degree, tol)
    if kind is None:
        (a, b), (c, d) = sj.matrix()
        delta = (a - d) ** 2 + 4 * b * c
        kind = HYPERBOLIC if delta > tol.eps_delta * float(matrix_scale(a, b, c, d)) ** 2 else DISCRIMINANT
    return normalize_jets(sj, branch, kind, (float(p[0]), float(p[1])), tol, shear)
