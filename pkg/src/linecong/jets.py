"""Truncated bivariate Taylor series (jets) in local offsets (u, v) from a center.

Coefficients are Taylor-normalized: the entry for ``(i, j)`` is
``d^i_u d^j_v f / (i! j!)`` at the center, so products are plain truncated
Cauchy products.  Storage is flat in graded order
``(0,0), (1,0), (0,1), (2,0), (1,1), (0,2), ...`` with optional trailing batch
dimensions, which lets one jet carry a whole grid of expansion centers.
"""

from __future__ import annotations

import math
from functools import lru_cache
from typing import Sequence

import numpy as np

from .config import DEFAULT_TOL
from .errors import DivisionByNearZero, SqrtDomain, StructuralError

MAX_DEGREE = 6


def n_coeffs(degree: int) -> int:
    return (degree + 1) * (degree + 2) // 2


def index(i: int, j: int) -> int:
    n = i + j
    return n * (n + 1) // 2 + j


@lru_cache(maxsize=None)
def monomials(degree: int) -> tuple:
    return tuple((n - j, j) for n in range(degree + 1) for j in range(n + 1))


@lru_cache(maxsize=None)
def _mul_tensor(degree: int) -> np.ndarray:
    N = n_coeffs(degree)
    M = np.zeros((N, N, N))
    mons = monomials(degree)
    for p, (i, j) in enumerate(mons):
        for q, (k, l) in enumerate(mons):
            if i + j + k + l <= degree:
                M[index(i + k, j + l), p, q] = 1.0
    return M


@lru_cache(maxsize=None)
def _diff_maps(degree: int, axis: int):
    """Source indices and factors for the partial derivative (output degree - 1)."""
    src, fac = [], []
    for i, j in monomials(degree - 1):
        if axis == 0:
            src.append(index(i + 1, j))
            fac.append(i + 1)
        else:
            src.append(index(i, j + 1))
            fac.append(j + 1)
    return np.array(src), np.array(fac, dtype=float)


def _same_center(c1, c2) -> bool:
    if c1 is c2:
        return True
    return all(np.array_equal(np.asarray(a), np.asarray(b)) for a, b in zip(c1, c2))


class Jet:
    """A degree-``D`` jet; ``coeffs`` has shape ``(n_coeffs(D),) + batch``."""

    __slots__ = ("degree", "coeffs", "center")
    __array_priority__ = 1000

    def __init__(self, degree: int, coeffs, center=(0.0, 0.0)):
        if not 0 <= degree <= MAX_DEGREE:
            raise StructuralError(f"jet degree {degree} outside [0, {MAX_DEGREE}]")
        coeffs = np.asarray(coeffs, dtype=float)
        if coeffs.shape[0] != n_coeffs(degree):
            raise StructuralError(
                f"degree {degree} needs {n_coeffs(degree)} coefficients, got {coeffs.shape[0]}")
        self.degree = degree
        self.coeffs = coeffs
        self.center = center

    # -- construction -------------------------------------------------------
    @staticmethod
    def _batch_shape(center) -> tuple:
        s0, s1 = np.shape(center[0]), np.shape(center[1])
        return s0 if s0 == s1 else np.broadcast_shapes(s0, s1)

    @classmethod
    def constant(cls, value, degree: int, center=(0.0, 0.0)) -> "Jet":
        shape, sv = cls._batch_shape(center), np.shape(value)
        if sv != shape:
            shape = np.broadcast_shapes(shape, sv)
        c = np.zeros((n_coeffs(degree),) + shape)
        c[0] = value
        return cls(degree, c, center)

    @classmethod
    def variable(cls, name: str, degree: int, center=(0.0, 0.0)) -> "Jet":
        """The jet of the coordinate ``u`` or ``v`` itself (value plus offset)."""
        shape = cls._batch_shape(center)
        c = np.zeros((n_coeffs(degree),) + shape)
        if name == "u":
            c[0] = center[0]
            if degree >= 1:
                c[1] = 1.0
        elif name == "v":
            c[0] = center[1]
            if degree >= 1:
                c[2] = 1.0
        else:
            raise StructuralError(f"unknown coordinate {name!r}")
        return cls(degree, c, center)

    @classmethod
    def offset(cls, name: str, degree: int, center=(0.0, 0.0)) -> "Jet":
        """Like :meth:`variable` but with zero constant term."""
        j = cls.variable(name, degree, center)
        j.coeffs[0] = 0.0
        return j

    @classmethod
    def from_taylor(cls, terms: dict, degree: int, center=(0.0, 0.0)) -> "Jet":
        c = np.zeros(n_coeffs(degree))
        for (i, j), val in terms.items():
            if i + j <= degree:
                c[index(i, j)] = val
        return cls(degree, c, center)

    @classmethod
    def from_derivatives(cls, derivs: dict, degree: int, center=(0.0, 0.0)) -> "Jet":
        return cls.from_taylor(
            {(i, j): d / (math.factorial(i) * math.factorial(j)) for (i, j), d in derivs.items()},
            degree, center)

    # -- access -------------------------------------------------------------
    @property
    def value(self):
        return self.coeffs[0]

    @property
    def batch_shape(self) -> tuple:
        return self.coeffs.shape[1:]

    def coef(self, i: int, j: int):
        if i + j > self.degree:
            raise StructuralError(f"coefficient ({i},{j}) beyond degree {self.degree}")
        return self.coeffs[index(i, j)]

    def deriv(self, i: int, j: int):
        """Partial derivative d^i_u d^j_v at the center."""
        return self.coef(i, j) * (math.factorial(i) * math.factorial(j))

    def gradient(self) -> np.ndarray:
        return np.array([self.coeffs[1], self.coeffs[2]])

    def truncate(self, degree: int) -> "Jet":
        if degree > self.degree:
            raise StructuralError("truncate cannot raise the degree; use elevate")
        return Jet(degree, self.coeffs[: n_coeffs(degree)], self.center)

    def elevate(self, degree: int) -> "Jet":
        """Zero-pad to a higher degree (the padded terms are unknown, not zero)."""
        c = np.zeros((n_coeffs(degree),) + self.batch_shape)
        c[: self.coeffs.shape[0]] = self.coeffs
        return Jet(degree, c, self.center)

    def at(self, idx) -> "Jet":
        """Select one expansion center out of a batched jet."""
        center = tuple(np.broadcast_to(np.asarray(c), self.batch_shape)[idx] for c in self.center)
        return Jet(self.degree, self.coeffs[(slice(None),) + np.index_exp[idx]], center)

    def norm(self) -> float:
        return float(np.max(np.abs(self.coeffs)))

    def evaluate(self, du, dv):
        """Evaluate the truncated polynomial at offsets (du, dv)."""
        out = 0.0
        for k, (i, j) in enumerate(monomials(self.degree)):
            out = out + self.coeffs[k] * du**i * dv**j
        return out

    # -- arithmetic ---------------------------------------------------------
    def _coerce(self, other) -> "Jet":
        if isinstance(other, Jet):
            if other.degree != self.degree:
                raise StructuralError(f"degree mismatch {self.degree} vs {other.degree}")
            if not _same_center(self.center, other.center):
                raise StructuralError("jets expanded at different centers")
            return other
        return Jet.constant(other, self.degree, self.center)

    def __add__(self, other):
        if not isinstance(other, Jet):
            c = self.coeffs.copy()
            c[0] = c[0] + other
            return Jet(self.degree, c, self.center)
        other = self._coerce(other)
        return Jet(self.degree, self.coeffs + other.coeffs, self.center)

    __radd__ = __add__

    def __neg__(self):
        return Jet(self.degree, -self.coeffs, self.center)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, Jet):
            return Jet(self.degree, self.coeffs * other, self.center)
        other = self._coerce(other)
        out = np.einsum("npq,p...,q...->n...", _mul_tensor(self.degree), self.coeffs, other.coeffs)
        return Jet(self.degree, out, self.center)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if not isinstance(other, Jet):
            if np.any(np.abs(other) <= DEFAULT_TOL.eps_div):
                raise DivisionByNearZero("division by near-zero constant")
            return Jet(self.degree, self.coeffs / other, self.center)
        return self * jet_recip(self._coerce(other))

    def __rtruediv__(self, other):
        return jet_recip(self) * other

    def __pow__(self, n: int):
        if not isinstance(n, (int, np.integer)) or n < 0:
            raise StructuralError("jet powers take nonnegative integer exponents")
        result = Jet.constant(1.0, self.degree, self.center)
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def __repr__(self) -> str:
        if self.batch_shape:
            return f"Jet(degree={self.degree}, batch={self.batch_shape})"
        terms = ", ".join(f"{m}: {c:.6g}" for m, c in zip(monomials(self.degree), self.coeffs) if c != 0)
        return f"Jet(degree={self.degree}, {{{terms}}}, center={self.center})"

    def allclose(self, other: "Jet", rtol=1e-12, atol=1e-12) -> bool:
        return self.degree == other.degree and np.allclose(self.coeffs, other.coeffs, rtol=rtol, atol=atol)


# -- module-level operations ------------------------------------------------

def jet_add(x: Jet, y: Jet) -> Jet:
    return x + x._coerce(y)


def jet_mul(x: Jet, y: Jet) -> Jet:
    return x * x._coerce(y)


def _series(x: Jet, taylor_coeffs: Sequence) -> Jet:
    """Sum_n taylor_coeffs[n] * (x - x0)^n, exact to degree D since (x - x0) has no constant."""
    h = Jet(x.degree, x.coeffs.copy(), x.center)
    h.coeffs[0] = 0.0
    out = Jet.constant(taylor_coeffs[x.degree], x.degree, x.center)
    for n in range(x.degree - 1, -1, -1):
        out = out * h + taylor_coeffs[n]
    return out


def jet_recip(x: Jet, eps: float | None = None) -> Jet:
    eps = DEFAULT_TOL.eps_div if eps is None else eps
    x0 = x.coeffs[0]
    if np.any(np.abs(x0) <= eps):
        raise DivisionByNearZero(f"reciprocal of jet with constant term {np.min(np.abs(x0)):.3e}")
    return _series(x, [(-1) ** n / x0 ** (n + 1) for n in range(x.degree + 1)])


def jet_sqrt(x: Jet, eps: float | None = None) -> Jet:
    eps = DEFAULT_TOL.eps_div if eps is None else eps
    x0 = x.coeffs[0]
    if np.any(x0 <= eps):
        raise SqrtDomain(f"sqrt of jet with constant term {np.min(x0):.3e}")
    root = np.sqrt(x0)
    coeffs, binom = [], 1.0
    for n in range(x.degree + 1):
        coeffs.append(binom * root / x0**n)
        binom *= (0.5 - n) / (n + 1)
    return _series(x, coeffs)


def jet_exp(x: Jet) -> Jet:
    e0 = np.exp(x.coeffs[0])
    return _series(x, [e0 / math.factorial(n) for n in range(x.degree + 1)])


def jet_sin(x: Jet) -> Jet:
    s, c = np.sin(x.coeffs[0]), np.cos(x.coeffs[0])
    cyc = [s, c, -s, -c]
    return _series(x, [cyc[n % 4] / math.factorial(n) for n in range(x.degree + 1)])


def jet_cos(x: Jet) -> Jet:
    s, c = np.sin(x.coeffs[0]), np.cos(x.coeffs[0])
    cyc = [c, -s, -c, s]
    return _series(x, [cyc[n % 4] / math.factorial(n) for n in range(x.degree + 1)])


def jet_diff(x: Jet, axis) -> Jet:
    """Partial derivative along ``axis`` ('u'/0 or 'v'/1); the result has degree D - 1."""
    ax = {"u": 0, "v": 1, 0: 0, 1: 1}[axis]
    if x.degree < 1:
        raise StructuralError("cannot differentiate a degree-0 jet")
    src, fac = _diff_maps(x.degree, ax)
    fac = fac.reshape((-1,) + (1,) * len(x.batch_shape))
    return Jet(x.degree - 1, x.coeffs[src] * fac, x.center)


def jet_compose(f: Jet, gu: Jet, gv: Jet, tol: float = 0.0) -> Jet:
    """f(gu, gv) where gu, gv are offsets (zero constant term) in new local variables."""
    if not (f.degree == gu.degree == gv.degree):
        raise StructuralError("jet_compose needs equal degrees")
    if not _same_center(gu.center, gv.center):
        raise StructuralError("substitution jets expanded at different centers")
    if np.any(np.abs(gu.coeffs[0]) > tol) or np.any(np.abs(gv.coeffs[0]) > tol):
        raise StructuralError("substitution must have zero constant term")
    D = f.degree
    gu = Jet(D, gu.coeffs.copy(), gu.center)
    gv = Jet(D, gv.coeffs.copy(), gu.center)
    gu.coeffs[0] = 0.0
    gv.coeffs[0] = 0.0
    pu = [Jet.constant(1.0, D, gu.center)]
    pv = [Jet.constant(1.0, D, gu.center)]
    for _ in range(D):
        pu.append(pu[-1] * gu)
        pv.append(pv[-1] * gv)
    out = Jet.constant(0.0, D, gu.center)
    for k, (i, j) in enumerate(monomials(D)):
        fk = f.coeffs[k]
        if np.any(fk != 0):
            out = out + (pu[i] * pv[j]) * fk
    return out


def linear_substitution(f: Jet, M) -> Jet:
    """Re-expand f in variables (U, V) with (du, dv) = M @ (U, V)."""
    M = np.asarray(M, dtype=float)
    D = f.degree
    U = Jet.offset("u", D, f.center)
    V = Jet.offset("v", D, f.center)
    return jet_compose(f, U * M[0, 0] + V * M[0, 1], U * M[1, 0] + V * M[1, 1])
