"""Independent checks built on equiaffine pairs and the support function.

For a polynomial congruence in normalized coordinates, a potential p solving
b p_uu + (d - a) p_uv - c p_vv = 0 and q with q_u = -(a p_u + c p_v), q_v = -(b p_u + d p_v)
give the co-normal nu = (p_u, p_v, q - p_u xi1 - p_v xi2), the rescaled direction xi/q and
the base surface f + k xi with k = -p/q.  The support function rho = nu . (Z - f~) then has
critical points exactly along the lines, and its A_k type at a focal point decides between
fold, cuspidal edge and swallowtail.  Since nu . f~ = u p_u + v p_v - p, rho is polynomial.

Polynomials are 2-D coefficient arrays ``P[i, j]`` of ``u^i v^j``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from numpy.polynomial import polynomial as npoly
from scipy.optimize import minimize_scalar
from scipy.signal import convolve2d

from . import expr as ex
from .config import DEFAULT_TOL, Tolerances
from .congruence import LineCongruence, jacobian, shape_values
from .errors import CorankTwo, NoPolynomialSolution, NotPolynomial, QVanishes
from .jets import Jet, jet_compose, jet_recip, monomials
from .normalize import DISCRIMINANT, HYPERBOLIC, normalize_discriminant, normalize_hyperbolic
from .congruence import shape_at

DEEPER = "deeper"


# -- bivariate polynomial helpers ------------------------------------------------

def pconst(x: float) -> np.ndarray:
    return np.array([[float(x)]])


def ptrim(P: np.ndarray) -> np.ndarray:
    P = np.atleast_2d(np.asarray(P, dtype=float))
    nz = np.argwhere(P != 0)
    if len(nz) == 0:
        return np.zeros((1, 1))
    return P[: nz[:, 0].max() + 1, : nz[:, 1].max() + 1].copy()


def padd(*Ps) -> np.ndarray:
    m = max(P.shape[0] for P in Ps)
    n = max(P.shape[1] for P in Ps)
    out = np.zeros((m, n))
    for P in Ps:
        out[: P.shape[0], : P.shape[1]] += P
    return out


def pscale(P, k: float) -> np.ndarray:
    return np.asarray(P, dtype=float) * k


def pmul(P, Q) -> np.ndarray:
    return convolve2d(P, Q)


def ppow(P, n: int) -> np.ndarray:
    out = pconst(1.0)
    for _ in range(n):
        out = pmul(out, P)
    return out


def pder(P, axis: int, m: int = 1) -> np.ndarray:
    P = np.asarray(P, dtype=float)
    if P.shape[axis] <= m:
        return np.zeros((1, 1))
    return npoly.polyder(P, m, axis=axis)


def pint(P, axis: int) -> np.ndarray:
    """Antiderivative vanishing on the line {axis variable = 0}."""
    return npoly.polyint(np.asarray(P, dtype=float), 1, lbnd=0, axis=axis)


def peval(P, u, v):
    return npoly.polyval2d(u, v, P)


def pdegree(P) -> int:
    nz = np.argwhere(np.asarray(P) != 0)
    return int((nz[:, 0] + nz[:, 1]).max()) if len(nz) else 0


def paffine(P, origin, J) -> np.ndarray:
    """P(origin + J (U, V)) as a polynomial in (U, V)."""
    J = np.asarray(J, dtype=float)
    lu = np.array([[origin[0], J[0, 1]], [J[0, 0], 0.0]])
    lv = np.array([[origin[1], J[1, 1]], [J[1, 0], 0.0]])
    return pcompose(P, lu, lv)


def pcompose(P, gu, gv) -> np.ndarray:
    P = np.asarray(P, dtype=float)
    pu = [pconst(1.0)]
    pv = [pconst(1.0)]
    for _ in range(P.shape[0] - 1):
        pu.append(pmul(pu[-1], gu))
    for _ in range(P.shape[1] - 1):
        pv.append(pmul(pv[-1], gv))
    out = pconst(0.0)
    for i in range(P.shape[0]):
        for j in range(P.shape[1]):
            if P[i, j] != 0:
                out = padd(out, pscale(pmul(pu[i], pv[j]), P[i, j]))
    return ptrim(out)


def taylor_at(P, u0, v0, degree: int) -> np.ndarray:
    """Taylor coefficients (flat graded order) of P at (u0, v0)."""
    out = []
    for i, j in monomials(degree):
        D = pder(pder(P, 0, i), 1, j) if (i or j) else P
        out.append(float(peval(D, u0, v0)) / (math.factorial(i) * math.factorial(j)))
    return np.array(out)


def poly_jet(P, center, degree: int) -> Jet:
    return Jet(degree, taylor_at(P, center[0], center[1], degree), (float(center[0]), float(center[1])))


def expr_to_poly(e: ex.Expr, params) -> np.ndarray:
    """Direct conversion of a polynomial expression to coefficients."""
    if isinstance(e, ex.Num):
        return pconst(e.value)
    if isinstance(e, ex.Var):
        return np.array([[0.0], [1.0]]) if e.name == "u" else np.array([[0.0, 1.0]])
    if isinstance(e, ex.Param):
        return pconst(ex._param(e.name, params))
    if isinstance(e, ex.Neg):
        return -expr_to_poly(e.arg, params)
    if isinstance(e, ex.Pow):
        return ppow(expr_to_poly(e.base, params), e.exp)
    if isinstance(e, ex.Call):
        arg = expr_to_poly(e.arg, params)
        if pdegree(arg) != 0 or arg.size != 1 and np.any(arg.ravel()[1:] != 0):
            raise NotPolynomial(f"{e.func}() of a non-constant argument")
        return pconst(ex._NP_FUNCS[e.func](arg[0, 0]))
    L, R = expr_to_poly(e.left, params), expr_to_poly(e.right, params)
    if e.op == "+":
        return padd(L, R)
    if e.op == "-":
        return padd(L, -R)
    if e.op == "*":
        return pmul(L, R)
    R = ptrim(R)
    if R.shape != (1, 1):
        raise NotPolynomial("division by a non-constant polynomial")
    return L / R[0, 0]


# -- polynomial congruence data -------------------------------------------------

@dataclass
class PolyCongruence:
    """(xi1, xi2) and S = [[a, b], [c, d]] as polynomials."""

    xi1: np.ndarray
    xi2: np.ndarray
    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    d: np.ndarray

    @classmethod
    def from_xi(cls, xi1, xi2) -> "PolyCongruence":
        return cls(xi1, xi2, -pder(xi1, 0), -pder(xi1, 1), -pder(xi2, 0), -pder(xi2, 1))

    def affine(self, origin, J, sign: float = 1.0) -> "PolyCongruence":
        """Chart (u, v) = origin + J (U, V), xi reversed when sign = -1, xi(origin) removed.

        Subtracting the constant xi(origin) is an ambient shear fixing the base plane, and the
        reversal is composed with z -> -z, so the result is affinely equivalent.
        """
        J = np.asarray(J, dtype=float)
        Ji = np.linalg.inv(J)
        x1 = paffine(self.xi1, origin, J)
        x2 = paffine(self.xi2, origin, J)
        y1 = padd(pscale(x1, Ji[0, 0]), pscale(x2, Ji[0, 1]))
        y2 = padd(pscale(x1, Ji[1, 0]), pscale(x2, Ji[1, 1]))
        y1, y2 = pscale(y1, sign), pscale(y2, sign)
        y1[0, 0] = 0.0
        y2[0, 0] = 0.0
        return PolyCongruence.from_xi(ptrim(y1), ptrim(y2))

    def shear(self, kappa: float) -> "PolyCongruence":
        """Shape fields in the chart u = U, v = V + kappa U^2 / 2 (xi is composed, not re-based)."""
        gu = np.array([[0.0], [1.0]])
        gv = np.array([[0.0, 1.0], [0.0, 0.0], [0.5 * kappa, 0.0]])
        S = [[pcompose(self.a, gu, gv), pcompose(self.b, gu, gv)],
             [pcompose(self.c, gu, gv), pcompose(self.d, gu, gv)]]
        kU = np.array([[0.0], [kappa]])
        # S'' = Jphi^-1 S Jphi with Jphi = [[1, 0], [kappa U, 1]]
        a = padd(S[0][0], pmul(S[0][1], kU))
        b = S[0][1]
        c = padd(S[1][0], pmul(S[1][1], kU), -pmul(kU, S[0][0]), -pmul(pmul(kU, kU), S[0][1]))
        d = padd(S[1][1], -pmul(kU, S[0][1]))
        return PolyCongruence(pcompose(self.xi1, gu, gv), pcompose(self.xi2, gu, gv),
                              ptrim(a), ptrim(b), ptrim(c), ptrim(d))

    def coef(self, name: str, i: int = 0, j: int = 0) -> float:
        """Derivative d^i_u d^j_v of a shape field at the origin."""
        P = getattr(self, name)
        return float(peval(pder(pder(P, 0, i), 1, j), 0.0, 0.0)) if (i or j) else float(peval(P, 0.0, 0.0))


def poly_congruence(C: LineCongruence) -> PolyCongruence:
    """Polynomial data of C with xi normalized to vanish at the domain center is not assumed."""
    if C.is_direction_field:
        return PolyCongruence.from_xi(expr_to_poly(C.mode.xi1, C.params), expr_to_poly(C.mode.xi2, C.params))
    a, b, c, d = (expr_to_poly(getattr(C.mode, k), C.params) for k in "abcd")
    # xi1_u = -a, xi1_v = -b: integrate a along v = 0, then b in v
    x1 = -padd(pint(a[:, :1], 0), pint(b, 1))
    x2 = -padd(pint(c[:, :1], 0), pint(d, 1))
    pc = PolyCongruence.from_xi(ptrim(x1), ptrim(x2))
    for name, P in zip("abcd", (a, b, c, d)):
        diff = ptrim(padd(getattr(pc, name), -P))
        if np.max(np.abs(diff)) > 1e-9 * max(1.0, np.max(np.abs(P))):
            from .errors import IntegrabilityViolation
            raise IntegrabilityViolation(float(np.max(np.abs(diff))))
    return pc


# -- equiaffine pair ----------------------------------------------------------------

@dataclass
class EquiaffinePair:
    p: np.ndarray
    q: np.ndarray
    xi1: np.ndarray
    xi2: np.ndarray
    kind: str
    pde_residual: float
    mode: str
    degree: int

    @property
    def pu(self):
        return pder(self.p, 0)

    @property
    def pv(self):
        return pder(self.p, 1)

    def nu(self):
        return (self.pu, self.pv, padd(self.q, -pmul(self.pu, self.xi1), -pmul(self.pv, self.xi2)))

    # pointwise fields ------------------------------------------------------------
    def eval_fields(self, u, v) -> dict:
        """nu, xi~, f~ and their first derivatives at points, from exact polynomial derivatives."""
        P = {"p": self.p, "q": self.q, "x1": self.xi1, "x2": self.xi2}
        val = {k: peval(X, u, v) for k, X in P.items()}
        du = {k: peval(pder(X, 0), u, v) for k, X in P.items()}
        dv = {k: peval(pder(X, 1), u, v) for k, X in P.items()}
        nu = [peval(X, u, v) for X in self.nu()]
        q = val["q"]
        xi = [val["x1"], val["x2"], np.ones_like(q)]
        xit = [x / q for x in xi]

        def xit_d(D):
            dx = [D["x1"], D["x2"], np.zeros_like(q)]
            return [(dxi * q - x * D["q"]) / q**2 for dxi, x in zip(dx, xi)]

        k = -val["p"] / q

        def k_d(D):
            return -(D["p"] * q - val["p"] * D["q"]) / q**2

        def ft_d(D, e):
            kd = k_d(D)
            return [e[0] + kd * val["x1"] + k * D["x1"], e[1] + kd * val["x2"] + k * D["x2"], kd]

        one, zero = np.ones_like(q), np.zeros_like(q)
        return {"nu": nu, "xit": xit, "xit_u": xit_d(du), "xit_v": xit_d(dv),
                "ft": [u + k * val["x1"], v + k * val["x2"], k],
                "ft_u": ft_d(du, (one, zero)), "ft_v": ft_d(dv, (zero, one)), "q": q}

    def residuals(self, u, v) -> dict:
        F = self.eval_fields(u, v)
        dot = lambda A, B: sum(x * y for x, y in zip(A, B))  # noqa: E731
        return {"nu.xi~ - 1": dot(F["nu"], F["xit"]) - 1.0,
                "nu.xi~_u": dot(F["nu"], F["xit_u"]), "nu.xi~_v": dot(F["nu"], F["xit_v"]),
                "nu.f~_u": dot(F["nu"], F["ft_u"]), "nu.f~_v": dot(F["nu"], F["ft_v"])}

    # jets ---------------------------------------------------------------------------
    def jets(self, center, degree: int) -> dict:
        J = lambda P: poly_jet(P, center, degree)  # noqa: E731
        p, q, x1, x2 = J(self.p), J(self.q), J(self.xi1), J(self.xi2)
        nu = [J(X) for X in self.nu()]
        rq = jet_recip(q)
        k = -p * rq
        U = Jet.variable("u", degree, p.center)
        V = Jet.variable("v", degree, p.center)
        ft = [U + k * x1, V + k * x2, k]
        xit = [x1 * rq, x2 * rq, rq]
        return {"p": p, "q": q, "nu": nu, "ft": ft, "xit": xit, "k": k}

    def metric(self, center) -> np.ndarray:
        """h_ij = -nu_i . f~_j at a point (so the support Hessian at Z = f~ is h)."""
        from .jets import jet_diff
        js = self.jets(center, 2)
        h = np.zeros((2, 2))
        for i, ai in enumerate("uv"):
            for j, aj in enumerate("uv"):
                h[i, j] = -sum(float(jet_diff(n, ai).value * jet_diff(f, aj).value)
                               for n, f in zip(js["nu"], js["ft"]))
        return h

    def shape_jets(self, center, degree: int):
        """Jets of the pair's own shape fields (a~, b~, c~, d~) from xi~_u = -a~ f~_u - c~ f~_v etc."""
        from .jets import jet_diff
        js = self.jets(center, degree + 1)
        fu = [jet_diff(x, "u") for x in js["ft"][:2]]
        fv = [jet_diff(x, "v") for x in js["ft"][:2]]
        xu = [jet_diff(x, "u") for x in js["xit"][:2]]
        xv = [jet_diff(x, "v") for x in js["xit"][:2]]
        det = fu[0] * fv[1] - fv[0] * fu[1]
        rd = jet_recip(det)

        def solve(r1, r2):
            # [fu fv] (x, y) = -(r1, r2)
            x = (fv[0] * r2 - fv[1] * r1) * rd
            y = (fu[1] * r1 - fu[0] * r2) * rd
            return x, y

        a, c = solve(xu[0], xu[1])
        b, d = solve(xv[0], xv[1])
        return a, b, c, d


def _seed(kind: str) -> dict:
    if kind == HYPERBOLIC:
        return {(0, 0): 0.0, (1, 0): 0.0, (0, 1): 0.0, (2, 0): -0.5, (1, 1): 0.0, (0, 2): -0.5, (3, 0): 0.0}
    # p_uv = -1 gives h_12 = +1 with h_ij = -nu_i . f_j
    return {(0, 0): 0.0, (1, 0): 0.0, (0, 1): 0.0, (2, 0): 0.0, (1, 1): -1.0, (0, 2): 0.0}


def _pde_system(pc: PolyCongruence, K: int):
    unknowns = [(i, n - i) for n in range(K + 1) for i in range(n, -1, -1)]
    coef_a = padd(pc.d, -pc.a)
    cols = []
    for i, j in unknowns:
        m = np.zeros((i + 1, j + 1))
        m[i, j] = 1.0
        r = padd(pmul(pc.b, pder(m, 0, 2)), pmul(coef_a, pder(pder(m, 0), 1)), -pmul(pc.c, pder(m, 1, 2)))
        cols.append(r)
    R = max(c.shape[0] for c in cols)
    S = max(c.shape[1] for c in cols)
    A = np.zeros((R * S, len(unknowns)))
    for k, c in enumerate(cols):
        full = np.zeros((R, S))
        full[: c.shape[0], : c.shape[1]] = c
        A[:, k] = full.ravel()
    rows_deg = np.add.outer(np.arange(R), np.arange(S)).ravel()
    return unknowns, A, rows_deg


def solve_pde(pc: PolyCongruence, kind: str, degree: int, mode: str = "exact",
              tol: Tolerances = DEFAULT_TOL):
    """Polynomial p of total degree <= ``degree`` with the normalized 2-jet seed."""
    unknowns, A, rows_deg = _pde_system(pc, degree)
    if mode == "local":
        keep = rows_deg <= degree - 2
        A = A[keep]
    seed = _seed(kind)
    fixed = np.array([m in seed for m in unknowns])
    xf = np.array([seed[m] for m in unknowns if m in seed])
    rhs = -A[:, fixed] @ xf
    Af = A[:, ~fixed]
    if Af.shape[1]:
        x, *_ = np.linalg.lstsq(Af, rhs, rcond=None)
    else:
        x = np.zeros(0)
    res = float(np.max(np.abs(Af @ x - rhs))) if len(rhs) else 0.0
    scale = max(1.0, float(np.max(np.abs(A)))) if A.size else 1.0
    coeffs = np.zeros(len(unknowns))
    coeffs[fixed] = xf
    coeffs[~fixed] = x
    P = np.zeros((degree + 1, degree + 1))
    for (i, j), val in zip(unknowns, coeffs):
        P[i, j] = val
    return P, res, res <= tol.lstsq_gate * scale


def _q_from_p(pc: PolyCongruence, P) -> np.ndarray:
    pu, pv = pder(P, 0), pder(P, 1)
    qu = -padd(pmul(pc.a, pu), pmul(pc.c, pv))
    qv = -padd(pmul(pc.b, pu), pmul(pc.d, pv))
    # q = 1 + int_0^u q_u(s, 0) ds + int_0^v q_v(u, t) dt
    return ptrim(padd(pconst(1.0), pint(qu[:, :1], 0), pint(qv, 1)))


def solve_equiaffine_polynomial(pc: PolyCongruence, kind: str, degree: int = 3, max_degree: int = 8,
                                local_degree: int = 12, tol: Tolerances = DEFAULT_TOL,
                                radius: float = 0.2) -> EquiaffinePair:
    """Equiaffine pair for polynomial data already in normalized coordinates about the origin.

    Degrees ``degree..max_degree`` are tried for an exact polynomial solution; when none
    exists the truncated power-series solution of degree ``local_degree`` is used, which is
    exact through high order at the origin (the only place the oracle reads it).
    """
    if degree < 3:
        raise ValueError("equiaffine solve needs degree >= 3")
    found = None
    for K in range(degree, max_degree + 1):
        P, res, ok = solve_pde(pc, kind, K, "exact", tol)
        if ok:
            found = (P, res, "exact", K)
            break
    if found is None:
        P, res, ok = solve_pde(pc, kind, local_degree, "local", tol)
        if not ok:
            raise NoPolynomialSolution(local_degree, res)
        found = (P, res, "local", local_degree)
    P, res, mode, K = found
    q = _q_from_p(pc, P)
    uu, vv = np.meshgrid(np.linspace(-radius, radius, 9), np.linspace(-radius, radius, 9))
    if np.min(np.abs(peval(q, uu, vv))) < 1e-6:
        raise QVanishes(f"q vanishes within radius {radius} of the center")
    return EquiaffinePair(ptrim(P), q, pc.xi1, pc.xi2, kind, res, mode, K)


def q_form_exactness(pc: PolyCongruence, P) -> float:
    """Coefficient size of (q_u)_v - (q_v)_u; it equals the PDE residual for integrable data."""
    pu, pv = pder(P, 0), pder(P, 1)
    qu = -padd(pmul(pc.a, pu), pmul(pc.c, pv))
    qv = -padd(pmul(pc.b, pu), pmul(pc.d, pv))
    return float(np.max(np.abs(padd(pder(qu, 1), -pder(qv, 0)))))


def pde_residual_poly(pc: PolyCongruence, P) -> np.ndarray:
    return padd(pmul(pc.b, pder(P, 0, 2)), pmul(padd(pc.d, -pc.a), pder(pder(P, 0), 1)), -pmul(pc.c, pder(P, 1, 2)))


# -- support function ------------------------------------------------------------

@dataclass
class SupportJet:
    jet: Jet
    Z: np.ndarray

    def deriv(self, i: int, j: int) -> float:
        return float(self.jet.deriv(i, j))

    def hessian(self) -> np.ndarray:
        return np.array([[self.deriv(2, 0), self.deriv(1, 1)], [self.deriv(1, 1), self.deriv(0, 2)]])


def support_jet(pair: EquiaffinePair, p0, Z, degree: int = 5) -> SupportJet:
    """Jet of rho = nu . (Z - f~) at ``p0``."""
    js = pair.jets(p0, degree)
    Z = np.asarray(Z, dtype=float)
    rho = Jet.constant(0.0, degree, js["p"].center)
    for n, f, z in zip(js["nu"], js["ft"], Z):
        rho = rho + n * (f * -1.0 + z)
    return SupportJet(rho, Z)


def support_poly(pair: EquiaffinePair, Z) -> np.ndarray:
    """rho as an explicit polynomial: nu . Z - (u p_u + v p_v - p)."""
    nu = pair.nu()
    U = np.array([[0.0], [1.0]])
    V = np.array([[0.0, 1.0]])
    lin = padd(pmul(U, pair.pu), pmul(V, pair.pv), -pair.p)
    return ptrim(padd(*(pscale(n, z) for n, z in zip(nu, Z)), -lin))


def ak_type(sj, rel: float | None = None):
    """A_k type of the critical point at the jet center.

    Returns 1 for a Morse point, k for A_k (k >= 2), or ``"deeper"`` when no pure
    power on the kernel line is resolvable at the jet degree.
    """
    jet = sj.jet if isinstance(sj, SupportJet) else sj
    rel = DEFAULT_TOL.ak_rel if rel is None else rel
    D = jet.degree
    F = np.zeros((D + 1, D + 1))
    for k, (i, j) in enumerate(monomials(D)):
        if i + j >= 2:
            F[i, j] = float(jet.coeffs[k])
    norm = max(float(np.max(np.abs(F))), 1e-300)
    H = np.array([[2 * F[2, 0], F[1, 1]], [F[1, 1], 2 * F[0, 2]]])
    ev, vecs = np.linalg.eigh(H)
    small = np.abs(ev) <= rel * norm
    if small.all():
        raise CorankTwo("Hessian vanishes: corank two")
    if not small.any():
        return 1
    kidx = int(np.argmin(np.abs(ev)))
    R = np.column_stack([vecs[:, 1 - kidx], vecs[:, kidx]])
    # rotate: (x, y) -> R (X, Y), so the kernel becomes the Y axis
    lx = np.array([[0.0, R[0, 1]], [R[0, 0], 0.0]])
    ly = np.array([[0.0, R[1, 1]], [R[1, 0], 0.0]])
    G = pcompose(F, lx, ly)
    Gf = np.zeros((D + 1, D + 1))
    s = min(G.shape[0], D + 1), min(G.shape[1], D + 1)
    Gf[: s[0], : s[1]] = G[: s[0], : s[1]]
    for i in range(D + 1):
        for j in range(D + 1):
            if i + j > D:
                Gf[i, j] = 0.0
    fxx = 2.0 * Gf[2, 0]

    def trunc(c):
        c = np.asarray(c, dtype=float)[: D + 1]
        return np.pad(c, (0, D + 1 - len(c)))

    def eval_along(P2, X):
        """sum_ij P2[i, j] X(y)^i y^j as a truncated series in y."""
        out = np.zeros(D + 1)
        Xp = np.zeros(D + 1)
        Xp[0] = 1.0
        for i in range(P2.shape[0]):
            row = np.zeros(D + 1)
            row[: min(P2.shape[1], D + 1)] = P2[i, : D + 1]
            out += trunc(npoly.polymul(Xp, row))
            Xp = trunc(npoly.polymul(Xp, X))
        return out

    Gx = npoly.polyder(Gf, 1, axis=0)
    X = np.zeros(D + 1)
    for _ in range(D + 2):
        X = X - eval_along(Gx, X) / fxx
    r = eval_along(Gf, X)
    for m in range(3, D + 1):
        if abs(r[m]) > rel * norm:
            return m - 1
    return DEEPER


# -- identity suite ------------------------------------------------------------------

@dataclass
class IdentityCheck:
    name: str
    closed_form: float
    computed: float

    @property
    def rel_error(self) -> float:
        return abs(self.computed - self.closed_form) / max(1.0, abs(self.closed_form))


@dataclass
class IdentityReport:
    kind: str
    branch: int
    checks: list = field(default_factory=list)
    pair: Optional[EquiaffinePair] = None
    support: Optional[SupportJet] = None
    ak: Optional[object] = None
    coefficients: dict = field(default_factory=dict)

    def max_rel_error(self) -> float:
        return max((c.rel_error for c in self.checks), default=0.0)

    def passed(self, tol: float = 1e-5) -> bool:
        return all(c.rel_error <= tol for c in self.checks)


def normalized_poly(C: LineCongruence, p0, kind: str, branch: int = 1, degree: int = 4,
                    tol: Tolerances = DEFAULT_TOL) -> PolyCongruence:
    """Polynomial data in the classifier's normalized chart at p0 (linear part only)."""
    sj = shape_at(C, p0, degree, tol)
    if kind == HYPERBOLIC:
        _, J, sign = normalize_hyperbolic(sj, branch, tol)
    else:
        _, J = normalize_discriminant(sj, tol)
        sign = 1.0
    return poly_congruence(C).affine(p0, J, sign)


def _support_at_center(pc: PolyCongruence, kind: str, degree: int, tol: Tolerances):
    pair = solve_equiaffine_polynomial(pc, kind, tol=tol)
    lam = pc.coef("a") if kind == HYPERBOLIC else pc.coef("d")
    Z = np.array([0.0, 0.0, 1.0 / lam])
    return pair, Z, support_jet(pair, (0.0, 0.0), Z, degree)


def identity_suite(C: LineCongruence, p0, kind: str, branch: int = 1, tol: Tolerances = DEFAULT_TOL,
                   zero_rel: float = 1e-6) -> IdentityReport:
    """Compare closed-form support derivatives against the equiaffine support jet."""
    pc = normalized_poly(C, p0, kind, branch, tol=tol)
    rep = IdentityReport(kind, branch)
    if kind == HYPERBOLIC:
        pair, Z, sj = _support_at_center(pc, kind, 6, tol)
        a0, d0 = pc.coef("a"), pc.coef("d")
        a10, a01, a20 = pc.coef("a", 1, 0), pc.coef("a", 0, 1), pc.coef("a", 2, 0)
        c10 = pc.coef("c", 1, 0)
        gap = a0 - d0
        rep.coefficients = {"a0": a0, "d0": d0, "a10": a10, "a01": a01, "a20": a20, "c10": c10}
        rep.checks.append(IdentityCheck("rho_uuu", -a10 / a0, sj.deriv(3, 0)))
        scale1 = max(abs(a01), abs(c10), abs(a0), 1.0)
        if abs(a10) <= zero_rel * scale1:
            rep.checks.append(IdentityCheck("rho_uuv", -c10 / a0, sj.deriv(2, 1)))
            rep.checks.append(IdentityCheck(
                "rho_uuuu", -(3 * (a01 - c10) * c10 + gap * a20) / (a0 * gap), sj.deriv(4, 0)))
            kappa = c10 / gap
            spc = pc.shear(kappa)
            sa20, sc10 = spc.coef("a", 2, 0), spc.coef("c", 1, 0)
            if abs(sa20) <= zero_rel * max(abs(a20), 1.0) and abs(sc10) <= zero_rel * scale1:
                # support function in the sheared chart
                gu = Jet.offset("u", 6, sj.jet.center)
                V = Jet.offset("v", 6, sj.jet.center)
                sheared = jet_compose(sj.jet, gu, V + gu * gu * (0.5 * kappa))
                sc20, sa30, sa01 = spc.coef("c", 2, 0), spc.coef("a", 3, 0), spc.coef("a", 0, 1)
                closed = -(4 * sa01 * sc20 + gap * sa30) / (a0 * gap)
                rep.checks.append(IdentityCheck("rho_uuuuu", closed, float(sheared.deriv(5, 0))))
                rep.coefficients.update({"kappa": kappa, "sheared.c20": sc20, "sheared.a30": sa30})
    else:
        pair, Z, sj = _support_at_center(pc, kind, 6, tol)
        c0, d0 = pc.coef("c"), pc.coef("d")
        a01, b01, b10, d01, b02 = (pc.coef("a", 0, 1), pc.coef("b", 0, 1), pc.coef("b", 1, 0),
                                   pc.coef("d", 0, 1), pc.coef("b", 0, 2))
        rep.coefficients = {"c0": c0, "d0": d0, "a01": a01, "b01": b01, "b10": b10, "d01": d01, "b02": b02}
        rep.checks.append(IdentityCheck("rho_vvv", -b01 / d0, sj.deriv(0, 3)))
        if abs(b01) <= zero_rel * max(abs(a01), abs(d01), abs(b10), 1.0):
            rep.checks.append(IdentityCheck("rho_uvv", -(b10 + d01 - a01) / d0, sj.deriv(1, 2)))
            rep.checks.append(IdentityCheck(
                "rho_vvvv", (3 * (a01 - d01) * d01 - c0 * b02) / (c0 * d0), sj.deriv(0, 4)))
    rep.pair, rep.support = pair, sj
    try:
        rep.ak = ak_type(sj, tol.ak_rel)
    except CorankTwo:
        rep.ak = "corank2"
    return rep


def oracle_ak(C: LineCongruence, p0, kind: str, branch: int = 1, tol: Tolerances = DEFAULT_TOL):
    """A_k type of the support function at the focal point of ``branch`` over p0."""
    pc = normalized_poly(C, p0, kind, branch, tol=tol)
    _, _, sj = _support_at_center(pc, kind, 6, tol)
    return ak_type(sj, tol.ak_rel)


def jet_preservation(C: LineCongruence, p0, kind: str, branch: int = 1, tol: Tolerances = DEFAULT_TOL) -> dict:
    """Differences between the pair's shape coefficients and the original ones at the center."""
    pc = normalized_poly(C, p0, kind, branch, tol=tol)
    pair = solve_equiaffine_polynomial(pc, kind, tol=tol)
    at, bt, ct, dt = pair.shape_jets((0.0, 0.0), 3)
    out = {}
    for name, jt in zip("abcd", (at, bt, ct, dt)):
        for i, j in ((0, 0), (1, 0), (0, 1)):
            out[f"{name}{i}{j}"] = (float(jt.deriv(i, j)), pc.coef(name, i, j))
    extra = [("a", 2, 0), ("c", 2, 0)] if kind == HYPERBOLIC else [("b", 0, 2), ("c", 2, 0)]
    for name, i, j in extra:
        jt = {"a": at, "b": bt, "c": ct, "d": dt}[name]
        out[f"{name}{i}{j}"] = (float(jt.deriv(i, j)), pc.coef(name, i, j))
    if kind == HYPERBOLIC:
        h = pair.metric((0.0, 0.0))
        from .jets import jet_diff
        js = pair.jets((0.0, 0.0), 3)
        # (h12)_u = -(nu_u . f~_v)_u
        h12 = Jet.constant(0.0, 2, js["p"].center)
        for n, f in zip(js["nu"], js["ft"]):
            h12 = h12 - jet_diff(n, "u") * jet_diff(f, "v")
        a0, d0 = pc.coef("a"), pc.coef("d")
        out["(h12)_u"] = (float(h12.deriv(1, 0)), (pc.coef("a", 0, 1) - pc.coef("c", 1, 0)) / (a0 - d0))
        out["h"] = h
    return out


# -- Jacobian rank along a line ---------------------------------------------------------

@dataclass
class RankScan:
    t: np.ndarray
    sigma: np.ndarray
    minima: list
    expected: list
    scale: float


def sigma_min(C: LineCongruence, u: float, v: float, t: float) -> float:
    return float(np.linalg.svd(jacobian(C, u, v, t), compute_uv=False)[-1])


def jacobian_rank_scan(C: LineCongruence, p, branch: int | None = None, n: int = 400,
                       span: float | None = None) -> RankScan:
    """sigma_min of the congruence-map derivative over t, with refined local minima."""
    u, v = float(p[0]), float(p[1])
    a, b, c, d = (float(x) for x in shape_values(C, u, v))
    lams = np.sort(np.linalg.eigvals(np.array([[a, b], [c, d]])).real)[::-1]
    expected = [1.0 / l for l in lams if abs(l) > 1e-12]
    if branch is not None:
        expected = [1.0 / lams[branch - 1]]
    if span is None:
        span = 1.5 * max(abs(e) for e in expected) if expected else 2.0
    ts = np.linspace(-span, span, n)
    sig = np.array([sigma_min(C, u, v, t) for t in ts])
    minima = []
    h = ts[1] - ts[0]
    for k in range(1, n - 1):
        if sig[k] <= sig[k - 1] and sig[k] <= sig[k + 1]:
            res = minimize_scalar(lambda t: sigma_min(C, u, v, t), bracket=(ts[k] - h, ts[k], ts[k] + h),
                                  method="golden", tol=1e-12)
            minima.append((float(res.x), float(res.fun)))
    scale = float(np.linalg.norm(jacobian(C, u, v, 0.0), 2))
    return RankScan(ts, sig, minima, expected, scale)
