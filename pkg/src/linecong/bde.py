"""Principal lines as integral curves of the lifted field on the surface of the BDE.

The principal directions (du, dv) solve c du^2 + (d - a) du dv - b dv^2 = 0.  In the chart
p = du/dv this is F(u, v, p) = c p^2 + (d - a) p - b = 0 and in the chart q = dv/du it is
Fq(u, v, q) = -b q^2 + (d - a) q + c = 0.  The fields

    X = (p F_p, F_p, -(p F_u + F_v))        (p chart)
    X = (Fq_q, q Fq_q, -(Fq_u + q Fq_v))    (q chart)

are tangent to the surface (X . grad F = 0), project onto the principal direction and stay
smooth across the discriminant, where the projected lines develop cusps.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .config import DEFAULT_NUMERICS, DEFAULT_TOL, Numerics, Tolerances
from .congruence import (LineCongruence, delta_values, eigen_at, matrix_scale, shape_at,
                         shape_value_grads)
from .errors import DiscriminantNonPositive, LineCongruenceError, OffSurface, StepFailure, UmbilicPoint
from .tracer import Polyline

P_CHART = "p"
Q_CHART = "q"
SWITCH = 2.0


@dataclass
class LiftedPoint:
    u: float
    v: float
    s: float
    chart: str = P_CHART

    def as_array(self) -> np.ndarray:
        return np.array([self.u, self.v, self.s])

    def direction(self) -> np.ndarray:
        """Unit planar principal direction represented by the slope."""
        d = np.array([self.s, 1.0]) if self.chart == P_CHART else np.array([1.0, self.s])
        return d / np.linalg.norm(d)


def principal_directions(C: LineCongruence, p, tol: Tolerances = DEFAULT_TOL):
    """Unit eigen-directions (w1, w2) at a hyperbolic point."""
    ed = eigen_at(C, p, tol)
    return ed.w1, ed.w2


def bde_residual(C: LineCongruence, p, w) -> float:
    sj = shape_at(C, p, 0, check=False)
    (a, b), (c, d) = sj.matrix()
    du, dv = w
    return float(c * du * du + (d - a) * du * dv - b * dv * dv)


def _coeffs(C: LineCongruence, u: float, v: float, tol: Tolerances):
    vals, grads = shape_value_grads(C, u, v)
    return vals, grads


def surface_eval(C: LineCongruence, x, chart: str, tol: Tolerances = DEFAULT_TOL):
    """F and its gradient in (u, v, slope) for the given chart."""
    u, v, s = (float(t) for t in x)
    (a, b, c, d), (ga, gb, gc, gd) = _coeffs(C, u, v, tol)
    if chart == P_CHART:
        F = c * s * s + (d - a) * s - b
        Fs = 2 * c * s + (d - a)
        Fuv = gc * s * s + (gd - ga) * s - gb
    else:
        F = -b * s * s + (d - a) * s + c
        Fs = -2 * b * s + (d - a)
        Fuv = -gb * s * s + (gd - ga) * s + gc
    scale = float(matrix_scale(a, b, c, d)) * (1.0 + s * s)
    return F, np.array([Fuv[0], Fuv[1], Fs]), scale


def lifted_field(C: LineCongruence, lp: LiftedPoint, tol: Tolerances = DEFAULT_TOL,
                 check: bool = True) -> np.ndarray:
    F, g, scale = surface_eval(C, lp.as_array(), lp.chart, tol)
    if check and abs(F) > 1e-8 * max(scale, 1e-300):
        raise OffSurface(f"|F| = {abs(F):.3e} off the principal-direction surface")
    Fu, Fv, Fs = g
    s = lp.s
    if lp.chart == P_CHART:
        return np.array([s * Fs, Fs, -(s * Fu + Fv)])
    return np.array([Fs, s * Fs, -(Fu + s * Fv)])


def _field(C, x, chart, tol):
    return lifted_field(C, LiftedPoint(x[0], x[1], x[2], chart), tol, check=False)


def project(C: LineCongruence, x, chart: str, tol: Tolerances = DEFAULT_TOL, iters: int = 20):
    """Orthogonal Newton projection onto F = 0 in (u, v, slope)."""
    x = np.asarray(x, dtype=float).copy()
    for _ in range(iters):
        F, g, scale = surface_eval(C, x, chart, tol)
        gn = float(g @ g)
        if gn == 0.0:
            break
        x = x - F * g / gn
        if abs(F) <= 1e-14 * max(scale, 1e-300):
            break
    F, _, scale = surface_eval(C, x, chart, tol)
    return x, abs(F) / max(scale, 1e-300)


def lift(C: LineCongruence, p, w, tol: Tolerances = DEFAULT_TOL) -> LiftedPoint:
    """Lift a planar point with approximate direction ``w`` onto the surface."""
    w = np.asarray(w, dtype=float)
    if abs(w[0]) <= SWITCH * abs(w[1]):
        chart, s = P_CHART, w[0] / w[1]
    else:
        chart, s = Q_CHART, w[1] / w[0]
    x, _ = project(C, [p[0], p[1], s], chart, tol)
    return LiftedPoint(x[0], x[1], x[2], chart)


def _switch(x, chart, tangent):
    """Change chart; converts the 3-vector tangent as well."""
    u, v, s = x
    ds = tangent[2]
    new_s = 1.0 / s
    new_t = np.array([tangent[0], tangent[1], -ds / (s * s)])
    return np.array([u, v, new_s]), (Q_CHART if chart == P_CHART else P_CHART), new_t


def _rk4(C, x, chart, h, orient, tol):
    """One RK4 step of the unit lifted field; also returns the planar arclength covered."""
    def f(y):
        X = _field(C, y, chart, tol)
        n = np.linalg.norm(X)
        return X / n * orient if n > 0 else X

    k1 = f(x)
    k2 = f(x + 0.5 * h * k1)
    k3 = f(x + 0.5 * h * k2)
    k4 = f(x + h * k3)
    speed = [np.linalg.norm(k[:2]) for k in (k1, k2, k3, k4)]
    dl = h / 6.0 * (speed[0] + 2 * speed[1] + 2 * speed[2] + speed[3])
    return x + h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4), dl


@dataclass
class PrincipalLine:
    polyline: Polyline
    lifted: np.ndarray
    charts: list
    stop_reason: str


def _march(C: LineCongruence, lp: LiftedPoint, orient: float, step: float, maxlen: float,
           tol: Tolerances, max_steps: int = 100000, stop_at=None):
    x = lp.as_array()
    chart = lp.chart
    pts, lifted, charts = [x[:2].copy()], [x.copy()], [chart]
    length = 0.0
    X0 = _field(C, x, chart, tol)
    ref_scale = max(np.linalg.norm(X0), 1e-300)
    if np.linalg.norm(X0) == 0.0:
        return pts, lifted, charts, "singular"
    reason = "max_steps"
    for _ in range(max_steps):
        h = step
        ok = False
        while h >= step / 16:
            y, seg = _rk4(C, x, chart, h, orient, tol)
            y, res = project(C, y, chart, tol)
            if res < 1e-10 and np.linalg.norm(y - x) <= 2 * h:
                ok = True
                break
            h *= 0.5
        if not ok:
            if len(pts) == 1:
                raise StepFailure("first integration step failed")
            reason = "step_failure"
            break
        if length + seg > maxlen:
            # shorten the final step to land on the requested length
            lo, hi = 0.0, h
            for _ in range(50):
                mid = 0.5 * (lo + hi)
                if length + _rk4(C, x, chart, mid, orient, tol)[1] > maxlen:
                    hi = mid
                else:
                    lo = mid
            y, _ = project(C, _rk4(C, x, chart, lo, orient, tol)[0], chart, tol)
            pts.append(y[:2].copy())
            lifted.append(y.copy())
            charts.append(chart)
            length = maxlen
            reason = "maxlen"
            break
        if not C.domain.contains(y[:2]):
            reason = "domain"
            break
        Xy = _field(C, y, chart, tol)
        tangent = Xy * orient
        x = y
        length += seg
        pts.append(x[:2].copy())
        lifted.append(x.copy())
        charts.append(chart)
        if np.linalg.norm(Xy) < 1e-9 * ref_scale:
            reason = "singular"
            break
        if stop_at is not None and stop_at(x):
            reason = "stop"
            break
        if abs(x[2]) > SWITCH:
            x, chart, tangent = _switch(x, chart, tangent)
            Xn = _field(C, x, chart, tol)
            orient = 1.0 if Xn @ tangent >= 0 else -1.0
    return pts, lifted, charts, reason


def integrate_principal_line(C: LineCongruence, seed, branch: int, step: float = 0.01,
                             maxlen: float = 2.0, tol: Tolerances = DEFAULT_TOL,
                             both: bool = True) -> PrincipalLine:
    """Principal line of ``branch`` through ``seed``; ``maxlen`` bounds each direction."""
    ed = eigen_at(C, seed, tol)
    w = ed.w1 if branch == 1 else ed.w2
    lp = lift(C, seed, w, tol)
    X = _field(C, lp.as_array(), lp.chart, tol)
    planar = X[:2]
    orient = 1.0 if planar @ w >= 0 else -1.0
    f_pts, f_l, f_c, f_reason = _march(C, lp, orient, step, maxlen, tol)
    if both:
        b_pts, b_l, b_c, b_reason = _march(C, lp, -orient, step, maxlen, tol)
        pts = b_pts[::-1] + f_pts[1:]
        lifted = b_l[::-1] + f_l[1:]
        charts = b_c[::-1] + f_c[1:]
        reason = f"{b_reason}/{f_reason}"
    else:
        pts, lifted, charts, reason = f_pts, f_l, f_c, f_reason
    poly = Polyline(np.array(pts), False, np.full(len(pts), branch, dtype=int), kind="principal")
    return PrincipalLine(poly, np.array(lifted), charts, reason)


# -- singular points of the lifted field -------------------------------------------------

@dataclass
class FoldedSingularity:
    point: np.ndarray
    lifted: np.ndarray
    chart: str
    restricted_jacobian: np.ndarray
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    folded_type: str


def _tangent_basis(g):
    g = g / np.linalg.norm(g)
    a = np.eye(3)[int(np.argmin(np.abs(g)))]
    e1 = np.cross(g, a)
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(g, e1)
    return np.column_stack([e1, e2])


def folded_singularity(C: LineCongruence, p, tol: Tolerances = DEFAULT_TOL, h: float = 1e-6) -> FoldedSingularity:
    """Linearization of the lifted field at a singular discriminant point, restricted to F = 0."""
    sj = shape_at(C, p, 0, check=False)
    (a, b), (c, d) = sj.matrix()
    # the double root of the slope quadratic
    if abs(c) >= abs(b):
        chart, s = P_CHART, (a - d) / (2 * c)
    else:
        chart, s = Q_CHART, (d - a) / (2 * b)
    if abs(s) > SWITCH:
        chart, s = (Q_CHART if chart == P_CHART else P_CHART), 1.0 / s
    x0 = np.array([float(p[0]), float(p[1]), s])
    F, g, _ = surface_eval(C, x0, chart, tol)
    DX = np.column_stack([(_field(C, x0 + h * e, chart, tol) - _field(C, x0 - h * e, chart, tol)) / (2 * h)
                          for e in np.eye(3)])
    Bm = _tangent_basis(g)
    R = Bm.T @ DX @ Bm
    ev, evec = np.linalg.eig(R)
    det, tr = np.linalg.det(R), np.trace(R)
    disc = tr * tr - 4 * det
    scale = max(np.max(np.abs(R)) ** 2, 1e-300)
    if abs(det) <= 1e-6 * scale or abs(disc) <= 1e-6 * scale:
        ftype = "Degenerate"
    elif det < 0:
        ftype = "Saddle"
    else:
        ftype = "Node" if disc > 0 else "Focus"
    return FoldedSingularity(np.array(p, dtype=float), x0, chart, R, ev, Bm @ evec, ftype)


def separatrices(C: LineCongruence, p, length: float = 0.5, step: float = 0.005, eps: float = 1e-6,
                 tol: Tolerances = DEFAULT_TOL) -> list:
    """Planar projections of the invariant curves leaving a folded saddle or node."""
    fs = folded_singularity(C, p, tol)
    out = []
    if np.iscomplexobj(fs.eigenvalues) and np.any(np.abs(np.imag(fs.eigenvalues)) > 0):
        return out
    for lam, vec in zip(np.real(fs.eigenvalues), np.real(fs.eigenvectors).T):
        for side in (1.0, -1.0):
            x, _ = project(C, fs.lifted + side * eps * vec / np.linalg.norm(vec), fs.chart, tol)
            X = _field(C, x, fs.chart, tol)
            step_dir = side * vec
            # follow the flow forward on unstable directions and backward on stable ones
            orient = np.sign(lam) if lam != 0 else 1.0
            if (X * orient) @ step_dir < 0:
                orient = -orient
            lp = LiftedPoint(x[0], x[1], x[2], fs.chart)
            pts, lifted, charts, reason = _march(C, lp, orient, step, length, tol)
            poly = Polyline(np.vstack([fs.point[None, :], np.array(pts)]), False, kind="separatrix")
            poly.notes.append(f"eigenvalue {lam:.6g}, side {side:+.0f}, stop {reason}")
            out.append(poly)
    return out


# -- phase portrait --------------------------------------------------------------------

@dataclass
class Portrait:
    principal: list = field(default_factory=list)
    discriminant: list = field(default_factory=list)
    ridges: list = field(default_factory=list)
    separatrices: list = field(default_factory=list)
    singular_points: list = field(default_factory=list)
    failures: list = field(default_factory=list)


def phase_portrait(C: LineCongruence, grid: int | tuple = 8, numerics: Numerics = DEFAULT_NUMERICS,
                   with_ridges: bool = True) -> Portrait:
    from .tracer import find_singular_discriminant_points, trace_discriminant, trace_ridges
    tol = numerics.tol
    g1, g2 = (grid, grid) if isinstance(grid, int) else grid
    dm = C.domain
    out = Portrait()
    out.discriminant = trace_discriminant(C, numerics)
    if with_ridges:
        try:
            out.ridges = trace_ridges(C, numerics)
        except LineCongruenceError as err:
            out.failures.append(f"ridges: {err}")
    for sp_ in find_singular_discriminant_points(C, out.discriminant, numerics):
        out.singular_points.append(sp_.point)
        try:
            out.separatrices.extend(separatrices(C, sp_.point, length=0.25 * dm.size, tol=tol))
        except LineCongruenceError as err:
            out.failures.append(f"separatrix at {tuple(sp_.point)}: {err}")
    mu = 0.5 / g1
    mv = 0.5 / g2
    us = dm.umin + (np.arange(g1) + 0.5) / g1 * (dm.umax - dm.umin)
    vs = dm.vmin + (np.arange(g2) + 0.5) / g2 * (dm.vmax - dm.vmin)
    del mu, mv
    for u in us:
        for v in vs:
            if float(delta_values(C, u, v)) <= 0:
                continue
            for br in (1, 2):
                try:
                    pl = integrate_principal_line(C, (u, v), br, numerics.line_step, numerics.maxlen, tol)
                    out.principal.append(pl.polyline)
                except (LineCongruenceError, np.linalg.LinAlgError) as err:
                    out.failures.append(f"seed {(u, v)} branch {br}: {err}")
    return out
