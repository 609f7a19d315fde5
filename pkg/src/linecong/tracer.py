"""Continuation of implicit curves: the discriminant delta = 0 and the ridge set.

Scalar fields are given as objects with ``values(u, v)`` (vectorized) and ``value_grad(p)``.
Seeds come from sign changes along the edges of a sample grid; each seed is traced by a
predictor along the tangent followed by Newton correction along the gradient.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.optimize import brentq

from .config import DEFAULT_NUMERICS, DEFAULT_TOL, Numerics, Tolerances
from .congruence import Domain, LineCongruence, delta_values, matrix_scale, shape_at, shape_value_grads
from .errors import GradientTooSmall, LineCongruenceError
from .ridge import _ridge_jets, branch_slopes_from_shape

UNTAGGED, BRANCH1, BRANCH2, BOTH = 0, 1, 2, 3


@dataclass
class Polyline:
    points: np.ndarray
    closed: bool = False
    tags: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=int))
    residuals: np.ndarray = field(default_factory=lambda: np.zeros(0))
    kind: str = ""
    notes: list = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.points)

    @property
    def length(self) -> float:
        seg = np.diff(self.points, axis=0)
        total = float(np.sum(np.linalg.norm(seg, axis=1)))
        if self.closed and len(self.points) > 1:
            total += float(np.linalg.norm(self.points[0] - self.points[-1]))
        return total

    def distance_to(self, p) -> float:
        """Distance from ``p`` to the polyline (segments, not just vertices)."""
        P = self.points
        p = np.asarray(p, dtype=float)
        if len(P) == 1:
            return float(np.linalg.norm(P[0] - p))
        A, B = P[:-1], P[1:]
        if self.closed:
            A, B = np.vstack([A, P[-1:]]), np.vstack([B, P[:1]])
        AB = B - A
        t = np.clip(np.einsum("ij,ij->i", p - A, AB) / np.maximum(np.einsum("ij,ij->i", AB, AB), 1e-300), 0, 1)
        return float(np.min(np.linalg.norm(A + t[:, None] * AB - p, axis=1)))


class ScalarField:
    """A smooth scalar field on the parameter plane."""

    def values(self, u, v):
        raise NotImplementedError

    def value_grad(self, p):
        raise NotImplementedError

    def scale(self, domain: Domain) -> float:
        uu, vv = domain.grid(17)
        return max(float(np.max(np.abs(self.values(uu, vv)))), 1e-300)


class FunctionField(ScalarField):
    """Field from plain callables; the gradient defaults to central differences."""

    def __init__(self, f: Callable, grad: Optional[Callable] = None, h: float = 1e-6):
        self.f, self.grad, self.h = f, grad, h

    def values(self, u, v):
        return self.f(u, v)

    def value_grad(self, p):
        u, v = float(p[0]), float(p[1])
        if self.grad is not None:
            return float(self.f(u, v)), np.asarray(self.grad(u, v), dtype=float)
        h = self.h
        g = np.array([(self.f(u + h, v) - self.f(u - h, v)) / (2 * h),
                      (self.f(u, v + h) - self.f(u, v - h)) / (2 * h)])
        return float(self.f(u, v)), g


class DiscriminantField(ScalarField):
    def __init__(self, C: LineCongruence, tol: Tolerances = DEFAULT_TOL):
        self.C, self.tol = C, tol

    def values(self, u, v):
        return delta_values(self.C, u, v)

    def value_grad(self, p):
        (a, b, c, d), g = shape_value_grads(self.C, float(p[0]), float(p[1]))
        dl = (a - d) ** 2 + 4 * b * c
        grad = 2 * (a - d) * (g[0] - g[3]) + 4 * (g[1] * c + b * g[2])
        return float(dl), grad


class RidgeField(ScalarField):
    """The reduced ridge field Gr (G with the spurious factor c removed)."""

    def __init__(self, C: LineCongruence, tol: Tolerances = DEFAULT_TOL):
        self.C, self.tol = C, tol

    def values(self, u, v):
        u, v = np.broadcast_arrays(np.asarray(u, float), np.asarray(v, float))
        sj = shape_at(self.C, (u, v), 1, self.tol, check=False)
        return _ridge_jets(sj)[4].value

    def value_grad(self, p):
        sj = shape_at(self.C, p, 2, self.tol, check=False)
        Gr = _ridge_jets(sj)[4]
        return float(Gr.value), np.asarray(Gr.gradient(), dtype=float)


class BranchRidgeField(ScalarField):
    """g_i = B +- A sqrt(delta), smooth where delta > 0 (undefined elsewhere, returns nan)."""

    def __init__(self, C: LineCongruence, branch: int, tol: Tolerances = DEFAULT_TOL):
        self.C, self.branch, self.tol = C, branch, tol
        self.sgn = 1.0 if branch == 1 else -1.0

    def _eval(self, sj):
        A, B, K, G, Gr, delta = _ridge_jets(sj)
        return A, B, delta

    def values(self, u, v):
        u, v = np.broadcast_arrays(np.asarray(u, float), np.asarray(v, float))
        A, B, dl = self._eval(shape_at(self.C, (u, v), 1, self.tol, check=False))
        with np.errstate(invalid="ignore"):
            return np.where(dl.value > 0, B.value + self.sgn * A.value * np.sqrt(np.abs(dl.value)), np.nan)

    def value_grad(self, p):
        from .jets import jet_sqrt
        A, B, dl = self._eval(shape_at(self.C, p, 2, self.tol, check=False))
        if dl.value <= 0:
            return float("nan"), np.array([np.nan, np.nan])
        g = B + A * jet_sqrt(dl) * self.sgn
        return float(g.value), np.asarray(g.gradient(), dtype=float)


# -- seeds ------------------------------------------------------------------------

def find_zero_seeds(field, domain: Domain, grid: int = 48, max_seeds: int | None = None) -> list:
    """Bisection-refined zeros on grid edges where the field strictly changes sign."""
    if grid < 8:
        raise ValueError("seed grid must be at least 8 x 8")
    if callable(field) and not isinstance(field, ScalarField):
        field = FunctionField(field)
    us = np.linspace(domain.umin, domain.umax, grid)
    vs = np.linspace(domain.vmin, domain.vmax, grid)
    U, V = np.meshgrid(us, vs, indexing="ij")
    F = np.asarray(field.values(U, V), dtype=float)
    F = np.broadcast_to(F, U.shape)
    seeds = []

    def refine(p0, p1, f0, f1):
        g = lambda s: float(field.values(p0[0] + s * (p1[0] - p0[0]), p0[1] + s * (p1[1] - p0[1])))  # noqa: E731
        try:
            s = brentq(g, 0.0, 1.0, xtol=1e-14, rtol=1e-14)
        except ValueError:
            return None
        return np.array([p0[0] + s * (p1[0] - p0[0]), p0[1] + s * (p1[1] - p0[1])])

    for i in range(grid):
        for j in range(grid):
            for di, dj in ((1, 0), (0, 1)):
                k, l = i + di, j + dj
                if k >= grid or l >= grid:
                    continue
                f0, f1 = F[i, j], F[k, l]
                if not (np.isfinite(f0) and np.isfinite(f1)):
                    continue
                if f0 * f1 < 0:
                    s = refine((us[i], vs[j]), (us[k], vs[l]), f0, f1)
                    if s is not None:
                        seeds.append(s)
    seeds.sort(key=lambda p: (p[0], p[1]))
    if max_seeds is not None:
        seeds = seeds[:max_seeds]
    return seeds


# -- continuation -------------------------------------------------------------------

def _correct(field, p, scale, tol: Tolerances, max_iter: int = 30):
    """Newton projection along the gradient onto the zero set."""
    for _ in range(max_iter):
        f, g = field.value_grad(p)
        gn = float(g @ g)
        if not np.isfinite(f) or gn == 0.0 or not np.isfinite(gn):
            return p, False
        p = p - f * g / gn
        if abs(f) <= tol.corrector * scale:
            f2, _ = field.value_grad(p)
            return p, abs(f2) <= max(1e3 * tol.corrector * scale, 1e-14)
    f, _ = field.value_grad(p)
    return p, abs(f) <= 1e-8 * scale


def _tangent(field, p):
    _, g = field.value_grad(p)
    t = np.array([-g[1], g[0]])
    n = np.linalg.norm(t)
    return t / n if n > 0 else t, float(np.linalg.norm(g))


def trace_implicit(field, seed, step: float, domain: Domain, tol: Tolerances = DEFAULT_TOL,
                   scale: float | None = None, max_steps: int | None = None,
                   stop: Callable | None = None) -> Polyline:
    """Trace the zero set through ``seed`` until it closes up or leaves the domain."""
    if callable(field) and not isinstance(field, ScalarField):
        field = FunctionField(field)
    scale = field.scale(domain) if scale is None else scale
    p = np.asarray(seed, dtype=float)
    _, g0 = field.value_grad(p)
    gnorm = float(np.linalg.norm(g0))
    gscale = scale / max(domain.size, 1e-300)
    if not np.isfinite(gnorm) or gnorm <= tol.eps_grad * gscale:
        raise GradientTooSmall(p, gnorm)
    p, ok = _correct(field, p, scale, tol)
    if max_steps is None:
        max_steps = int(40 * (2 * (domain.umax - domain.umin + domain.vmax - domain.vmin)) / step) + 10

    def march(direction: float):
        pts = [p.copy()]
        t_prev, _ = _tangent(field, p)
        t_prev = t_prev * direction
        closed = False
        for n in range(max_steps):
            h = step
            q = None
            while h >= step / 4 - 1e-15:
                cur = pts[-1]
                t, gn = _tangent(field, cur)
                if gn <= tol.eps_grad * gscale:
                    break
                if t @ t_prev < 0:
                    t = -t
                cand, ok = _correct(field, cur + h * t, scale, tol)
                dist = np.linalg.norm(cand - cur)
                if ok and 0.25 * h <= dist <= 2.0 * h:
                    t_new, _ = _tangent(field, cand)
                    if t_new @ t < 0:
                        t_new = -t_new
                    # reject steps where the tangent turns too far (branch jumping)
                    if t_new @ t > 0.7:
                        q, t_prev = cand, t_new
                        break
                h *= 0.5
            if q is None:
                break
            if not domain.contains(q):
                break
            if stop is not None and stop(q):
                break
            if n >= 10 and np.linalg.norm(q - pts[0]) < step / 2:
                closed = True
                break
            pts.append(q)
        return pts, closed

    fwd, closed = march(+1.0)
    if closed:
        pts = np.array(fwd)
        if len(pts) > 2 and np.linalg.norm(pts[-1] - pts[0]) < step / 4:
            pts = pts[:-1]
        line = Polyline(pts, True)
    else:
        bwd, _ = march(-1.0)
        pts = np.array(bwd[::-1] + fwd[1:])
        line = Polyline(pts, False)
    line.residuals = np.array([abs(field.value_grad(q)[0]) for q in line.points])
    line.tags = np.zeros(len(line.points), dtype=int)
    return line


def trace_all(field, domain: Domain, numerics: Numerics = DEFAULT_NUMERICS, kind: str = "",
              seeds: list | None = None) -> tuple:
    """Trace every component reached by the grid seeds; returns (polylines, failures)."""
    tol = numerics.tol
    scale = field.scale(domain)
    seeds = find_zero_seeds(field, domain, numerics.grid) if seeds is None else seeds
    lines, failures = [], []
    for s in seeds:
        if any(l.distance_to(s) < 2 * numerics.step for l in lines):
            continue
        try:
            line = trace_implicit(field, s, numerics.step, domain, tol, scale)
        except GradientTooSmall as err:
            failures.append(err)
            continue
        if len(line) < 2:
            continue
        line.kind = kind
        lines.append(line)
    return lines, failures


# -- discriminant and ridges -----------------------------------------------------------

def trace_discriminant(C: LineCongruence, numerics: Numerics = DEFAULT_NUMERICS) -> list:
    lines, failures = trace_all(DiscriminantField(C, numerics.tol), C.domain, numerics, "discriminant")
    for l in lines:
        l.notes.extend(str(f) for f in failures)
    return lines


def tag_ridge_point(C: LineCongruence, p, tol: Tolerances = DEFAULT_TOL) -> tuple:
    """(tag, residual) for a point on the ridge set, from the unit-eigenvector ridge test."""
    sj = shape_at(C, p, 1, tol, check=False)
    (a, b), (c, d) = sj.matrix()
    scale = float(matrix_scale(a, b, c, d))
    if float(sj.delta.value) <= tol.eps_delta * scale**2:
        return UNTAGGED, 0.0
    h1, h2 = branch_slopes_from_shape(sj)
    n1 = max(sj.derivative_scale(), 1e-300)
    r1, r2 = abs(h1) / n1, abs(h2) / n1
    tag = (BRANCH1 if r1 < 1e-6 else 0) | (BRANCH2 if r2 < 1e-6 else 0)
    return tag, min(r1, r2)


def _identically_zero(field, domain: Domain) -> bool:
    uu, vv = domain.grid(13)
    vals = np.asarray(field.values(uu, vv), dtype=float)
    return bool(np.all(np.abs(vals[np.isfinite(vals)]) == 0.0)) if np.any(np.isfinite(vals)) else False


def trace_ridges(C: LineCongruence, numerics: Numerics = DEFAULT_NUMERICS) -> list:
    """Ridge polylines with per-point branch tags (0 where delta <= 0)."""
    tol = numerics.tol
    dom = C.domain
    field = RidgeField(C, tol)
    lines, failures = ([], []) if _identically_zero(field, dom) else trace_all(field, dom, numerics, "ridge")
    # where Gr vanishes to higher order, trace the branch fields inside delta > 0
    for br in (1, 2):
        bf = BranchRidgeField(C, br, tol)
        if _identically_zero(bf, dom):
            continue
        for s in find_zero_seeds(bf, dom, numerics.grid):
            if any(l.distance_to(s) < 2 * numerics.step for l in lines):
                continue
            tag, _ = tag_ridge_point(C, s, tol)
            if not tag & br:
                continue
            try:
                delta_ok = lambda q: float(delta_values(C, q[0], q[1])) <= 0  # noqa: E731
                line = trace_implicit(bf, s, numerics.step, dom, tol, stop=delta_ok)
            except GradientTooSmall as err:
                failures.append(err)
                continue
            if len(line) >= 2:
                line.kind = "ridge"
                lines.append(line)
    for l in lines:
        tr = [tag_ridge_point(C, q, tol) for q in l.points]
        l.tags = np.array([t for t, _ in tr], dtype=int)
        l.notes.extend(str(f) for f in failures)
    # drop traces that are nowhere a genuine ridge
    return [l for l in lines if np.any(l.tags != UNTAGGED) or np.any(delta_values(C, l.points[:, 0], l.points[:, 1]) < 0)]


# -- singular discriminant points -------------------------------------------------------

def _tangency(C: LineCongruence, p, tol: Tolerances, ref=None):
    """s = d delta(w) with w the double principal direction, sign-aligned to ``ref``."""
    sj = shape_at(C, p, 1, tol, check=False)
    (a, b), (c, d) = sj.matrix()
    lam = 0.5 * (a + d)
    w1 = np.array([lam - d, c])
    w2 = np.array([b, lam - a])
    w = w1 if np.linalg.norm(w1) >= np.linalg.norm(w2) else w2
    n = np.linalg.norm(w)
    w = w / n if n > 0 else w
    if ref is not None and w @ ref < 0:
        w = -w
    return float(sj.delta.gradient() @ w), w


@dataclass
class SingularPoint:
    point: np.ndarray
    residual: float
    polyline: int


def _newton_singular(C: LineCongruence, p, tol: Tolerances, w_ref, iters: int = 30):
    """Newton on (delta, s) = (0, 0) with a finite-difference Jacobian."""
    p = np.array(p, dtype=float)
    h = 1e-7
    for _ in range(iters):
        def F(q):
            dl = float(delta_values(C, q[0], q[1]))
            s, _ = _tangency(C, q, tol, w_ref)
            return np.array([dl, s])
        f0 = F(p)
        Jm = np.column_stack([(F(p + h * e) - F(p - h * e)) / (2 * h) for e in np.eye(2)])
        try:
            dp = np.linalg.solve(Jm, -f0)
        except np.linalg.LinAlgError:
            break
        p = p + dp
        if np.linalg.norm(dp) < 1e-14:
            break
    return p


def find_singular_discriminant_points(C: LineCongruence, lines: list | None = None,
                                      numerics: Numerics = DEFAULT_NUMERICS) -> list:
    """Points of delta = 0 where the double principal direction is tangent to the curve."""
    tol = numerics.tol
    lines = trace_discriminant(C, numerics) if lines is None else lines
    found = []
    for li, line in enumerate(lines):
        P = line.points
        n = len(P)
        if n < 2:
            continue
        vals, ws = [], []
        ref = None
        for q in P:
            s, w = _tangency(C, q, tol, ref)
            vals.append(s)
            ws.append(w)
            ref = w
        idx = list(range(n - 1)) + ([n - 1] if line.closed else [])
        for k in idx:
            k2 = (k + 1) % n
            s0, s1 = vals[k], vals[k2]
            w0 = ws[k]
            if k2 == 0:
                # closing segment: the carried orientation may have flipped around the loop
                s1, _ = _tangency(C, P[0], tol, w0)
            if s0 == 0.0 or s0 * s1 < 0:
                p = _newton_singular(C, 0.5 * (P[k] + P[k2]), tol, w0)
                if not C.domain.contains(p, 1e-9) or np.linalg.norm(p - P[k]) > 4 * numerics.step:
                    continue
                if any(np.linalg.norm(p - f.point) < 1e-6 for f in found):
                    continue
                res = abs(float(delta_values(C, p[0], p[1])))
                found.append(SingularPoint(p, res, li))
    found.sort(key=lambda f: (round(f.point[0], 9), round(f.point[1], 9)))
    return found


# -- scan --------------------------------------------------------------------------------

def scan_features(C: LineCongruence, numerics: Numerics = DEFAULT_NUMERICS, with_oracle: bool = False) -> list:
    """PointReports along traced ridge and discriminant curves plus their special points."""
    from .classify import classify_point
    from .ridge import ridge_fields_from_shape
    tol = numerics.tol
    reports = []

    def add(p, label):
        try:
            reps = classify_point(C, p, numerics.degree, tol)
        except LineCongruenceError as err:
            from .classify import UMBILIC, PointReport
            verdict = UMBILIC if type(err).__name__ == "UmbilicPoint" else "Error"
            reps = [PointReport((float(p[0]), float(p[1])), "", 0, verdict, notes=[str(err)])]
        for r in reps:
            r.notes.append(label)
            if with_oracle and r.ak_order is not None:
                from .oracle import oracle_ak
                try:
                    r.oracle_verdict = oracle_ak(C, r.point, r.kind, max(r.branch, 1), tol)
                except LineCongruenceError as err:
                    r.notes.append(f"oracle: {err}")
        reports.extend(reps)

    disc = trace_discriminant(C, numerics)
    for line in disc:
        for q in line.points[:: numerics.scan_stride]:
            add(q, "discriminant sample")
    for sp_ in find_singular_discriminant_points(C, disc, numerics):
        add(sp_.point, "singular discriminant point")
    ridges = trace_ridges(C, numerics)
    for line in ridges:
        P = line.points
        for k in range(0, len(P), numerics.scan_stride):
            if line.tags[k] != UNTAGGED:
                add(P[k], "ridge sample")
        # tangency points: sign changes of T along the tagged parts
        for br in (1, 2):
            Ts = []
            for k, q in enumerate(P):
                if not line.tags[k] & br:
                    Ts.append(np.nan)
                    continue
                from .classify import classify_hyperbolic
                sj = shape_at(C, q, numerics.degree, tol, check=False)
                rep = classify_hyperbolic(sj, q, br, tol)
                Ts.append(rep.quantities.get("T", np.nan))
            for k in range(len(Ts) - 1):
                if np.isfinite(Ts[k]) and np.isfinite(Ts[k + 1]) and Ts[k] * Ts[k + 1] < 0:
                    # refine along the segment, then project back to the ridge
                    t = Ts[k] / (Ts[k] - Ts[k + 1])
                    q = P[k] + t * (P[k + 1] - P[k])
                    q, _ = _correct(RidgeField(C, tol), q, RidgeField(C, tol).scale(C.domain), tol)
                    add(q, f"ridge tangency point branch {br}")
    return reports
