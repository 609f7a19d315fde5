"""Line congruences over the plane chart f(u, v) = (u, v, 0) with lines along (xi1, xi2, 1).

The shape operator S = [[a, b], [c, d]] is defined by xi_u = -a f_u - c f_v and
xi_v = -b f_u - d f_v, so with the direction field given explicitly
a = -xi1_u, b = -xi1_v, c = -xi2_u, d = -xi2_v.  Alternatively S can be given directly
(it must then satisfy b_u = a_v and d_u = c_v), and the direction field is recovered by
a line integral from the domain center where it is set to zero.
"""

from __future__ import annotations

from functools import lru_cache
from dataclasses import dataclass, field
from typing import Mapping, Union

import numpy as np

from . import expr as ex
from .config import DEFAULT_TOL, Tolerances
from .errors import (DiscriminantNegative, DiscriminantNonPositive, FocalAtInfinity,
                     IntegrabilityViolation, UmbilicPoint, ZeroDirection)
from .jets import Jet, jet_diff

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(24)


@dataclass(frozen=True)
class Domain:
    umin: float = -1.0
    umax: float = 1.0
    vmin: float = -1.0
    vmax: float = 1.0

    @property
    def center(self) -> tuple:
        return (0.5 * (self.umin + self.umax), 0.5 * (self.vmin + self.vmax))

    @property
    def size(self) -> float:
        return max(self.umax - self.umin, self.vmax - self.vmin)

    def contains(self, p, margin: float = 0.0) -> bool:
        u, v = p
        return (self.umin - margin <= u <= self.umax + margin
                and self.vmin - margin <= v <= self.vmax + margin)

    def grid(self, n: int, m: int | None = None):
        m = n if m is None else m
        return np.meshgrid(np.linspace(self.umin, self.umax, n),
                           np.linspace(self.vmin, self.vmax, m), indexing="ij")


@dataclass(frozen=True)
class DirectionField:
    xi1: ex.Expr
    xi2: ex.Expr


@dataclass(frozen=True)
class ShapeFields:
    a: ex.Expr
    b: ex.Expr
    c: ex.Expr
    d: ex.Expr


@dataclass(frozen=True)
class LineCongruence:
    mode: Union[DirectionField, ShapeFields]
    params: Mapping[str, float] = field(default_factory=dict)
    domain: Domain = field(default_factory=Domain)
    name: str = ""

    @classmethod
    def from_xi(cls, xi1: str, xi2: str, params=None, domain=None, name="") -> "LineCongruence":
        return cls(DirectionField(ex.parse(xi1), ex.parse(xi2)), dict(params or {}), domain or Domain(), name)

    @classmethod
    def from_shape(cls, a: str, b: str, c: str, d: str, params=None, domain=None, name="") -> "LineCongruence":
        mode = ShapeFields(*(ex.parse(s) for s in (a, b, c, d)))
        return cls(mode, dict(params or {}), domain or Domain(), name)

    @property
    def is_direction_field(self) -> bool:
        return isinstance(self.mode, DirectionField)

    def expressions(self) -> dict:
        if self.is_direction_field:
            return {"xi1": self.mode.xi1, "xi2": self.mode.xi2}
        return {k: getattr(self.mode, k) for k in "abcd"}

    def with_params(self, **kw) -> "LineCongruence":
        return LineCongruence(self.mode, {**self.params, **kw}, self.domain, self.name)

    def with_domain(self, domain: Domain) -> "LineCongruence":
        return LineCongruence(self.mode, self.params, domain, self.name)

    def is_polynomial(self) -> bool:
        return all(ex.polynomial_degree(e) is not None for e in self.expressions().values())


@dataclass
class ShapeJets:
    a: Jet
    b: Jet
    c: Jet
    d: Jet

    @property
    def delta(self) -> Jet:
        return (self.a - self.d) ** 2 + 4.0 * self.b * self.c

    @property
    def degree(self) -> int:
        return self.a.degree

    @property
    def center(self):
        return self.a.center

    def matrix(self) -> np.ndarray:
        return np.array([[self.a.value, self.b.value], [self.c.value, self.d.value]])

    def as_tuple(self) -> tuple:
        return (self.a, self.b, self.c, self.d)

    def integrability_residual(self) -> float:
        r1 = jet_diff(self.b, "u") - jet_diff(self.a, "v")
        r2 = jet_diff(self.d, "u") - jet_diff(self.c, "v")
        return max(r1.norm(), r2.norm())

    def derivative_scale(self) -> float:
        if self.degree < 1:
            return 0.0
        return max(float(np.max(np.abs(j.coeffs[1:]))) for j in self.as_tuple())


@dataclass(frozen=True)
class EigenData:
    lam1: float
    lam2: float
    w1: np.ndarray
    w2: np.ndarray
    delta0: float


@dataclass(frozen=True)
class PluckerLine:
    w12: float
    w34: float
    w13: float
    w42: float
    w14: float
    w23: float

    def as_array(self) -> np.ndarray:
        return np.array([self.w12, self.w34, self.w13, self.w42, self.w14, self.w23])

    def quadric_residual(self) -> float:
        return self.w12 * self.w34 + self.w13 * self.w42 + self.w14 * self.w23


def matrix_scale(a, b, c, d):
    """Frobenius norm of S, the reference scale for pointwise thresholds."""
    return np.sqrt(np.asarray(a) ** 2 + np.asarray(b) ** 2 + np.asarray(c) ** 2 + np.asarray(d) ** 2)


# -- shape data -------------------------------------------------------------

def shape_at(C: LineCongruence, p, degree: int = 4, tol: Tolerances = DEFAULT_TOL,
             check: bool = True) -> ShapeJets:
    """Jets of a, b, c, d at ``p``; ``p`` coordinates may be arrays for a batch of centers."""
    center = (p[0], p[1])
    if C.is_direction_field:
        x1 = ex.eval_jet(C.mode.xi1, center, degree + 1, C.params)
        x2 = ex.eval_jet(C.mode.xi2, center, degree + 1, C.params)
        return ShapeJets(-jet_diff(x1, "u"), -jet_diff(x1, "v"), -jet_diff(x2, "u"), -jet_diff(x2, "v"))
    sj = ShapeJets(*(ex.eval_jet(getattr(C.mode, k), center, degree, C.params) for k in "abcd"))
    if check and degree >= 1:
        res = sj.integrability_residual()
        scale = max(sj.derivative_scale(), max(j.norm() for j in sj.as_tuple()), 1e-300)
        if res > tol.eps_int * scale:
            raise IntegrabilityViolation(res)
    return sj


@lru_cache(maxsize=64)
def _gradient_exprs(mode, params: tuple):
    """Expressions for (a, b, c, d) and their u, v derivatives, parameters substituted."""
    pm = dict(params)
    if isinstance(mode, DirectionField):
        x1, x2 = ex.substitute(mode.xi1, pm), ex.substitute(mode.xi2, pm)
        base = [ex._sneg(ex.diff(x1, "u")), ex._sneg(ex.diff(x1, "v")),
                ex._sneg(ex.diff(x2, "u")), ex._sneg(ex.diff(x2, "v"))]
    else:
        base = [ex.substitute(getattr(mode, k), pm) for k in "abcd"]
    return tuple((e, ex.diff(e, "u"), ex.diff(e, "v")) for e in base)


def shape_value_grads(C: LineCongruence, u, v):
    """Pointwise (a, b, c, d) values and gradients as arrays of shape (4,) and (4, 2)."""
    exprs = _gradient_exprs(C.mode, tuple(sorted(C.params.items())))
    vals = np.empty(4)
    grads = np.empty((4, 2))
    for k, (e, eu, ev) in enumerate(exprs):
        vals[k] = ex.eval_point(e, u, v)
        grads[k, 0] = ex.eval_point(eu, u, v)
        grads[k, 1] = ex.eval_point(ev, u, v)
    return vals, grads


def shape_values(C: LineCongruence, u, v):
    """Pointwise (a, b, c, d), broadcasting over u and v."""
    u, v = np.broadcast_arrays(np.asarray(u, dtype=float), np.asarray(v, dtype=float))
    if C.is_direction_field:
        sj = shape_at(C, (u, v), 0)
        return tuple(np.asarray(j.value) for j in sj.as_tuple())
    return tuple(np.broadcast_to(np.asarray(ex.eval_point(getattr(C.mode, k), u, v, C.params), dtype=float),
                                 u.shape).copy() for k in "abcd")


def delta_values(C: LineCongruence, u, v):
    a, b, c, d = shape_values(C, u, v)
    return (a - d) ** 2 + 4.0 * b * c


def xi_at(C: LineCongruence, u, v):
    """The planar part (xi1, xi2) of the line direction, broadcasting over u and v."""
    u, v = np.broadcast_arrays(np.asarray(u, dtype=float), np.asarray(v, dtype=float))
    if C.is_direction_field:
        x1 = ex.eval_point(C.mode.xi1, u, v, C.params)
        x2 = ex.eval_point(C.mode.xi2, u, v, C.params)
        return np.broadcast_to(x1, u.shape).astype(float), np.broadcast_to(x2, u.shape).astype(float)
    # xi_bar(p) - xi_bar(p0) = -int_0^1 S(p0 + s h) h ds with h = p - p0
    u0, v0 = C.domain.center
    hu, hv = u - u0, v - v0
    s = 0.5 * (_GL_NODES + 1.0)
    w = 0.5 * _GL_WEIGHTS
    shp = (-1,) + (1,) * u.ndim
    uu = u0 + s.reshape(shp) * hu
    vv = v0 + s.reshape(shp) * hv
    a, b, c, d = shape_values(C, uu, vv)
    wr = w.reshape(shp)
    x1 = -np.sum(wr * (a * hu + b * hv), axis=0)
    x2 = -np.sum(wr * (c * hu + d * hv), axis=0)
    return x1, x2


# -- eigen data -------------------------------------------------------------

def _eigvec(lam, a, b, c, d):
    w1 = np.array([lam - d, c])
    w2 = np.array([b, lam - a])
    w = w1 if np.linalg.norm(w1) >= np.linalg.norm(w2) else w2
    w = w / np.linalg.norm(w)
    if w[0] < 0 or (w[0] == 0 and w[1] < 0):
        w = -w
    return w


def eigen_from_matrix(S, tol: Tolerances = DEFAULT_TOL) -> EigenData:
    (a, b), (c, d) = np.asarray(S, dtype=float)
    delta = (a - d) ** 2 + 4 * b * c
    scale = float(matrix_scale(a, b, c, d))
    if delta <= tol.eps_delta * scale**2:
        if np.sqrt((a - d) ** 2 + b**2 + c**2) < tol.eps_umb * max(scale, 1e-300):
            raise UmbilicPoint(f"umbilic point, S = [[{a}, {b}], [{c}, {d}]]")
        raise DiscriminantNonPositive(f"discriminant {delta:.6g} is not positive")
    r = np.sqrt(delta)
    lam1, lam2 = 0.5 * (a + d + r), 0.5 * (a + d - r)
    return EigenData(lam1, lam2, _eigvec(lam1, a, b, c, d), _eigvec(lam2, a, b, c, d), delta)


def eigen_at(C: LineCongruence, p, tol: Tolerances = DEFAULT_TOL) -> EigenData:
    a, b, c, d = (float(x) for x in shape_values(C, p[0], p[1]))
    return eigen_from_matrix([[a, b], [c, d]], tol)


def eigenvalues_at(C: LineCongruence, p, tol: Tolerances = DEFAULT_TOL):
    """(lam1, lam2) allowing a vanishing discriminant; raises when it is negative."""
    a, b, c, d = (float(x) for x in shape_values(C, p[0], p[1]))
    delta = (a - d) ** 2 + 4 * b * c
    scale = float(matrix_scale(a, b, c, d))
    if delta < -tol.eps_delta * scale**2:
        raise DiscriminantNegative(f"discriminant {delta:.6g} is negative")
    r = np.sqrt(max(delta, 0.0))
    return 0.5 * (a + d + r), 0.5 * (a + d - r)


# -- the congruence map ------------------------------------------------------

def congruence_map(C: LineCongruence, u, v, t):
    x1, x2 = xi_at(C, u, v)
    return np.array([u + t * x1, v + t * x2, np.broadcast_to(t, np.shape(x1)).astype(float)])


def jacobian(C: LineCongruence, u, v, t) -> np.ndarray:
    """Derivative of (u, v, t) -> f + t xi at a single point."""
    a, b, c, d = (float(x) for x in shape_values(C, u, v))
    x1, x2 = (float(x) for x in xi_at(C, u, v))
    return np.array([[1 - t * a, -t * b, x1],
                     [-t * c, 1 - t * d, x2],
                     [0.0, 0.0, 1.0]])


def focal_point(C: LineCongruence, p, branch: int, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    lam = eigenvalues_at(C, p, tol)[branch - 1]
    if abs(lam) <= tol.eps_div:
        raise FocalAtInfinity(f"eigenvalue {lam:.3e} vanishes; focal point at infinity")
    return congruence_map(C, float(p[0]), float(p[1]), 1.0 / lam)


# -- Plucker coordinates -----------------------------------------------------

def plucker_of_line(base, direction) -> PluckerLine:
    base = np.asarray(base, dtype=float)
    direction = np.asarray(direction, dtype=float)
    if np.linalg.norm(direction) == 0.0:
        raise ZeroDirection("line direction is zero")
    y = np.append(base, 1.0)
    z = np.append(base + direction, 1.0)

    def w(i, j):
        return y[i - 1] * z[j - 1] - y[j - 1] * z[i - 1]

    vals = np.array([w(1, 2), w(3, 4), w(1, 3), w(4, 2), w(1, 4), w(2, 3)])
    if abs(vals[1]) > 1e-14 * np.max(np.abs(vals)):
        vals = vals / -vals[1]
    else:
        vals = vals / np.linalg.norm(vals)
        k = np.flatnonzero(np.abs(vals) > 1e-14)[0]
        vals = vals * np.sign(vals[k])
    return PluckerLine(*vals)


# -- reparametrization -------------------------------------------------------

def _lin(coefs, exprs):
    out = None
    for k, e in zip(coefs, exprs):
        if k == 0:
            continue
        term = e if k == 1 else ex.Mul(ex.Num(float(k)), e)
        out = term if out is None else ex.Add(out, term)
    return out if out is not None else ex.Num(0.0)


def _subst_vars(e: ex.Expr, mapping: dict) -> ex.Expr:
    if isinstance(e, ex.Var):
        return mapping[e.name]
    if isinstance(e, (ex.Num, ex.Param)):
        return e
    if isinstance(e, ex.BinOp):
        return ex.BinOp(e.op, _subst_vars(e.left, mapping), _subst_vars(e.right, mapping))
    if isinstance(e, ex.Neg):
        return ex.Neg(_subst_vars(e.arg, mapping))
    if isinstance(e, ex.Pow):
        return ex.Pow(_subst_vars(e.base, mapping), e.exp)
    return ex.Call(e.func, _subst_vars(e.arg, mapping))


def reparametrize(C: LineCongruence, M, offset=(0.0, 0.0)) -> LineCongruence:
    """The same family of lines seen through the chart (u, v) = offset + M (U, V).

    The ambient affine map (x, y, z) -> (M^-1 ((x, y) - offset), z) carries the base plane
    to itself, so the result is again in the plane-chart model, with S' = M^-1 S(phi) M.
    """
    M = np.asarray(M, dtype=float)
    Mi = np.linalg.inv(M)
    U, V = ex.Var("u"), ex.Var("v")
    mapping = {
        "u": _lin([1.0, M[0, 0], M[0, 1]], [ex.Num(float(offset[0])), U, V]),
        "v": _lin([1.0, M[1, 0], M[1, 1]], [ex.Num(float(offset[1])), U, V]),
    }
    if C.is_direction_field:
        x1 = _subst_vars(C.mode.xi1, mapping)
        x2 = _subst_vars(C.mode.xi2, mapping)
        mode = DirectionField(_lin(Mi[0], [x1, x2]), _lin(Mi[1], [x1, x2]))
    else:
        S = [[_subst_vars(getattr(C.mode, k), mapping) for k in "ab"],
             [_subst_vars(getattr(C.mode, k), mapping) for k in "cd"]]
        # SM then Mi (SM)
        SM = [[_lin([M[0, j], M[1, j]], [S[i][0], S[i][1]]) for j in range(2)] for i in range(2)]
        out = [[_lin([Mi[i, 0], Mi[i, 1]], [SM[0][j], SM[1][j]]) for j in range(2)] for i in range(2)]
        mode = ShapeFields(out[0][0], out[0][1], out[1][0], out[1][1])
    # bounding box of the preimage of the old domain
    dm = C.domain
    corners = np.array([[dm.umin, dm.vmin], [dm.umin, dm.vmax], [dm.umax, dm.vmin], [dm.umax, dm.vmax]])
    pre = (corners - np.asarray(offset, dtype=float)) @ Mi.T
    lo, hi = pre.min(axis=0), pre.max(axis=0)
    return LineCongruence(mode, C.params, Domain(lo[0], hi[0], lo[1], hi[1]), C.name)


def scaled(C: LineCongruence, k: float) -> LineCongruence:
    """Multiply the shape operator by ``k`` (the direction field scales likewise)."""
    K = ex.Num(float(k))
    if C.is_direction_field:
        mode = DirectionField(ex.Mul(K, C.mode.xi1), ex.Mul(K, C.mode.xi2))
    else:
        mode = ShapeFields(*(ex.Mul(K, getattr(C.mode, n)) for n in "abcd"))
    return LineCongruence(mode, C.params, C.domain, C.name)
