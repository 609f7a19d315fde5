"""Oracle-backed consistency checks shared by `verify` and the test suite."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .classify import classify_point
from .config import DEFAULT_NUMERICS, Numerics
from .congruence import LineCongruence, delta_values, eigenvalues_at, matrix_scale, reparametrize, shape_values
from .errors import LineCongruenceError
from . import oracle


@dataclass
class Check:
    name: str
    passed: bool
    detail: str = ""


@dataclass
class SuiteResult:
    checks: list = field(default_factory=list)

    def add(self, name, passed, detail=""):
        self.checks.append(Check(name, bool(passed), detail))

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def lines(self) -> list:
        return [f"{'PASS' if c.passed else 'FAIL'} {c.name}" + (f"  {c.detail}" if c.detail else "")
                for c in self.checks]


def equiaffine_residuals(C: LineCongruence, p0, kind: str, branch: int = 1, spacing: float = 0.02,
                         tol=DEFAULT_NUMERICS.tol) -> float:
    """Max equiaffine residual on a 5x5 grid around p0, in the normalized chart."""
    pc = oracle.normalized_poly(C, p0, kind, branch, tol=tol)
    pair = oracle.solve_equiaffine_polynomial(pc, kind, tol=tol)
    g = spacing * np.arange(-2, 3)
    U, V = np.meshgrid(g, g, indexing="ij")
    res = pair.residuals(U, V)
    return max(float(np.max(np.abs(r))) for r in res.values())


def ak_agreement(C: LineCongruence, p, tol=DEFAULT_NUMERICS.tol) -> list:
    """(report, oracle A_k) for each classified branch at p with a definite A_k order."""
    out = []
    for rep in classify_point(C, p, tol=tol):
        if rep.ak_order is None:
            continue
        ak = oracle.oracle_ak(C, p, rep.kind, max(rep.branch, 1), tol)
        out.append((rep, ak))
    return out


def focal_rank(C: LineCongruence, p, branch: int) -> tuple:
    """(sigma_min at t = 1/lambda_i, sigma_min at t-offsets +-0.1, scale).

    The Jacobian's base columns are the unit vectors f_u, f_v and the offsets are absolute,
    so both thresholds are taken in those units (scale 1).
    """
    u, v = float(p[0]), float(p[1])
    lam = eigenvalues_at(C, (u, v))[branch - 1]
    t = 1.0 / lam
    s0 = oracle.sigma_min(C, u, v, t)
    off = min(oracle.sigma_min(C, u, v, t + 0.1), oracle.sigma_min(C, u, v, t - 0.1))
    return s0, off, 1.0


def random_hyperbolic_points(C: LineCongruence, n: int, rng, margin: float = 0.05, min_gap: float = 0.0,
                             lam_range: tuple | None = None) -> list:
    """Uniform points with delta > 0, eigenvalues away from 0 and, optionally, |lambda_i| in lam_range."""
    d = C.domain
    out = []
    tries = 0
    while len(out) < n and tries < 200 * n:
        tries += 1
        u = rng.uniform(d.umin + margin * (d.umax - d.umin), d.umax - margin * (d.umax - d.umin))
        v = rng.uniform(d.vmin + margin * (d.vmax - d.vmin), d.vmax - margin * (d.vmax - d.vmin))
        a, b, c, dd = (float(x) for x in shape_values(C, u, v))
        sc = float(matrix_scale(a, b, c, dd))
        dl = float(delta_values(C, u, v))
        if dl <= 1e-4 * sc**2:
            continue
        lams = eigenvalues_at(C, (u, v))
        if min(abs(l) for l in lams) < 0.05 * sc or np.sqrt(dl) < min_gap:
            continue
        if lam_range is not None and not all(lam_range[0] <= abs(l) <= lam_range[1] for l in lams):
            continue
        out.append((u, v))
    return out


def random_linear_map(rng, cond_max: float = 20.0) -> np.ndarray:
    while True:
        M = rng.normal(size=(2, 2))
        if abs(np.linalg.det(M)) > 0.2 and np.linalg.cond(M) < cond_max:
            return M


def verdicts(reports) -> list:
    return sorted((r.kind, r.verdict) for r in reports)


def invariance_check(C: LineCongruence, p, M, tol=DEFAULT_NUMERICS.tol) -> tuple:
    """Verdicts at p before and after the linear reparametrization (u, v) = p + M (u', v')."""
    before = classify_point(C, p, tol=tol)
    C2 = reparametrize(C, M, offset=p)
    after = classify_point(C2, (0.0, 0.0), tol=tol)
    return verdicts(before), verdicts(after)


def verify(C: LineCongruence, points: list, numerics: Numerics = DEFAULT_NUMERICS, seed: int = 0,
           n_random: int = 10) -> SuiteResult:
    tol = numerics.tol
    res = SuiteResult()
    rng = np.random.default_rng(seed)
    poly = C.is_polynomial()
    for p in points:
        tag = f"({p[0]:.6g},{p[1]:.6g})"
        try:
            reps = classify_point(C, p, tol=tol)
        except LineCongruenceError as err:
            res.add(f"classify {tag}", False, str(err))
            continue
        res.add(f"classify {tag}", True, ", ".join(r.verdict for r in reps) or "delta<0")
        if not poly:
            continue
        for rep in reps:
            br = max(rep.branch, 1)
            name = f"{tag} {rep.kind}" + (f" b{rep.branch}" if rep.branch else "")
            try:
                r = equiaffine_residuals(C, p, rep.kind, br, tol=tol)
                res.add(f"equiaffine residual {name}", r < 1e-8, f"{r:.2e}")
                ident = oracle.identity_suite(C, p, rep.kind, br, tol)
                res.add(f"support identities {name}", ident.passed(1e-5), f"max rel {ident.max_rel_error():.2e}")
                if rep.ak_order is not None:
                    ok = ident.ak == rep.ak_order
                    res.add(f"A_k agreement {name}", ok, f"{rep.verdict} vs A_{ident.ak}")
            except LineCongruenceError as err:
                res.add(f"oracle {name}", False, str(err))
        for k in range(3):
            M = random_linear_map(rng)
            try:
                b, a = invariance_check(C, p, M, tol)
                res.add(f"invariance {tag} #{k}", b == a, "" if b == a else f"{b} vs {a}")
            except LineCongruenceError as err:
                res.add(f"invariance {tag} #{k}", False, str(err))
    for p in random_hyperbolic_points(C, n_random, rng):
        for br in (1, 2):
            try:
                s0, off, scale = focal_rank(C, p, br)
            except LineCongruenceError:
                continue
            res.add(f"focal rank ({p[0]:.4g},{p[1]:.4g}) b{br}", s0 < 1e-8 * scale, f"{s0 / scale:.2e}")
    return res
