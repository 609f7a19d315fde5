"""Arithmetic expressions in u, v and named parameters.

Grammar (``^`` binds tighter than unary minus, so ``-u^2 = -(u^2)``)::

    expr  := term (('+' | '-') term)*
    term  := unary (('*' | '/') unary)*
    unary := '-' unary | power
    power := atom ('^' INT)*
    atom  := NUMBER | IDENT | FUNC '(' expr ')' | '(' expr ')'
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Mapping, Union

import numpy as np

from . import jets
from .config import DEFAULT_TOL
from .errors import (DivisionByNearZero, ExprSyntaxError, NotPolynomial, SqrtDomain, UnboundParameter,
                     UnknownFunction)
from .jets import Jet

FUNCTIONS = ("sin", "cos", "exp", "sqrt")
VARIABLES = ("u", "v")


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Param:
    name: str


@dataclass(frozen=True)
class Neg:
    arg: "Expr"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Pow:
    base: "Expr"
    exp: int


@dataclass(frozen=True)
class Call:
    func: str
    arg: "Expr"


Expr = Union[Num, Var, Param, Neg, BinOp, Pow, Call]


def Add(a, b):
    return BinOp("+", a, b)


def Sub(a, b):
    return BinOp("-", a, b)


def Mul(a, b):
    return BinOp("*", a, b)


def Div(a, b):
    return BinOp("/", a, b)


# -- lexer ------------------------------------------------------------------

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|(?P<id>[A-Za-z_][A-Za-z_0-9]*)|(?P<op>[-+*/^()]))")


def _tokenize(text: str):
    pos, toks = 0, []
    n = len(text)
    while pos < n:
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            bad = pos + (len(text[pos:]) - len(text[pos:].lstrip()))
            raise ExprSyntaxError(f"unexpected character {text[bad]!r}", bad, text)
        kind = m.lastgroup
        start = m.start(kind)
        toks.append((kind, m.group(kind), start))
        pos = m.end()
    toks.append(("eof", "", len(text)))
    return toks


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.toks[self.i]

    def take(self):
        t = self.toks[self.i]
        self.i += 1
        return t

    def fail(self, expected: str):
        kind, val, off = self.peek()
        found = "end of input" if kind == "eof" else repr(val)
        raise ExprSyntaxError(f"expected {expected}, found {found}", off, self.text)

    def expect_op(self, op: str):
        kind, val, _ = self.peek()
        if kind != "op" or val != op:
            self.fail(repr(op))
        self.take()

    def parse(self) -> Expr:
        e = self.expr()
        if self.peek()[0] != "eof":
            self.fail("operator or end of input")
        return e

    def expr(self):
        left = self.term()
        while self.peek()[0] == "op" and self.peek()[1] in "+-":
            op = self.take()[1]
            left = BinOp(op, left, self.term())
        return left

    def term(self):
        left = self.unary()
        while self.peek()[0] == "op" and self.peek()[1] in "*/":
            op = self.take()[1]
            left = BinOp(op, left, self.unary())
        return left

    def unary(self):
        if self.peek()[0] == "op" and self.peek()[1] == "-":
            self.take()
            return Neg(self.unary())
        return self.power()

    def power(self):
        base = self.atom()
        while self.peek()[0] == "op" and self.peek()[1] == "^":
            self.take()
            kind, val, _ = self.peek()
            if kind != "num" or not val.isdigit():
                self.fail("nonnegative integer exponent")
            self.take()
            base = Pow(base, int(val))
        return base

    def atom(self):
        kind, val, off = self.peek()
        if kind == "num":
            self.take()
            return Num(float(val))
        if kind == "id":
            self.take()
            nxt = self.peek()
            if nxt[0] == "op" and nxt[1] == "(":
                if val not in FUNCTIONS:
                    raise UnknownFunction(val, off)
                self.take()
                arg = self.expr()
                self.expect_op(")")
                return Call(val, arg)
            if val in VARIABLES:
                return Var(val)
            if val in FUNCTIONS:
                self.fail("'(' after function name")
            return Param(val)
        if kind == "op" and val == "(":
            self.take()
            e = self.expr()
            self.expect_op(")")
            return e
        self.fail("number, identifier or '('")


def parse(text: str) -> Expr:
    """Parse ``text`` into an immutable AST."""
    return _Parser(text).parse()


# -- printing ---------------------------------------------------------------

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2}


def _prec(e: Expr) -> int:
    if isinstance(e, BinOp):
        return _PREC[e.op]
    if isinstance(e, Neg):
        return 3
    if isinstance(e, Pow):
        return 4
    if isinstance(e, Num) and e.value < 0:
        return 3
    return 5


def _fmt_num(x: float) -> str:
    if x == int(x) and abs(x) < 1e15:
        return str(int(x))
    return repr(x)


def pretty(e: Expr) -> str:
    """Render with the fewest parentheses that keep the AST unchanged on re-parse."""
    if isinstance(e, Num):
        return _fmt_num(e.value)
    if isinstance(e, (Var, Param)):
        return e.name
    if isinstance(e, Call):
        return f"{e.func}({pretty(e.arg)})"
    if isinstance(e, Neg):
        s = pretty(e.arg)
        return "-" + (f"({s})" if _prec(e.arg) < 3 else s)
    if isinstance(e, Pow):
        s = pretty(e.base)
        # a negative literal base or any compound base needs parentheses
        return (f"({s})" if _prec(e.base) < 5 else s) + f"^{e.exp}"
    p = _PREC[e.op]
    ls, rs = pretty(e.left), pretty(e.right)
    if _prec(e.left) < p:
        ls = f"({ls})"
    if _prec(e.right) <= p:
        rs = f"({rs})"
    return f"{ls} {e.op} {rs}"


# -- analysis ---------------------------------------------------------------

def free_params(e: Expr) -> frozenset:
    if isinstance(e, Param):
        return frozenset([e.name])
    if isinstance(e, (Num, Var)):
        return frozenset()
    if isinstance(e, BinOp):
        return free_params(e.left) | free_params(e.right)
    if isinstance(e, Neg):
        return free_params(e.arg)
    if isinstance(e, Pow):
        return free_params(e.base)
    return free_params(e.arg)


def polynomial_degree(e: Expr):
    """Total degree in (u, v) when ``e`` is a polynomial, else None."""
    if isinstance(e, (Num, Param)):
        return 0
    if isinstance(e, Var):
        return 1
    if isinstance(e, Neg):
        return polynomial_degree(e.arg)
    if isinstance(e, Pow):
        d = polynomial_degree(e.base)
        return None if d is None else d * e.exp
    if isinstance(e, Call):
        return 0 if polynomial_degree(e.arg) == 0 else None
    l, r = polynomial_degree(e.left), polynomial_degree(e.right)
    if l is None or r is None:
        return None
    if e.op in "+-":
        return max(l, r)
    if e.op == "*":
        return l + r
    return l if r == 0 else None


def substitute(e: Expr, params: Mapping[str, float]) -> Expr:
    """Replace bound parameters by numeric literals."""
    if isinstance(e, Param):
        return Num(float(params[e.name])) if e.name in params else e
    if isinstance(e, (Num, Var)):
        return e
    if isinstance(e, BinOp):
        return BinOp(e.op, substitute(e.left, params), substitute(e.right, params))
    if isinstance(e, Neg):
        return Neg(substitute(e.arg, params))
    if isinstance(e, Pow):
        return Pow(substitute(e.base, params), e.exp)
    return Call(e.func, substitute(e.arg, params))


def _param(name, params):
    try:
        return float(params[name])
    except KeyError:
        raise UnboundParameter(name) from None


# -- evaluation -------------------------------------------------------------

_JET_FUNCS = {"sin": jets.jet_sin, "cos": jets.jet_cos, "exp": jets.jet_exp, "sqrt": jets.jet_sqrt}


def eval_jet(e: Expr, center, degree: int, params: Mapping[str, float] | None = None) -> Jet:
    """Jet of ``e`` at ``center``; center coordinates may be arrays for a batch of points."""
    params = params or {}
    for name in free_params(e):
        _param(name, params)

    # constant subtrees stay plain floats; only u, v dependence builds jets
    def rec(x):
        if isinstance(x, Num):
            return x.value
        if isinstance(x, Var):
            return Jet.variable(x.name, degree, center)
        if isinstance(x, Param):
            return _param(x.name, params)
        if isinstance(x, Neg):
            return -rec(x.arg)
        if isinstance(x, Pow):
            return rec(x.base) ** x.exp
        if isinstance(x, Call):
            arg = rec(x.arg)
            if isinstance(arg, Jet):
                return _JET_FUNCS[x.func](arg)
            if x.func == "sqrt" and arg < 0:
                raise SqrtDomain("sqrt of a negative constant")
            return float(_NP_FUNCS[x.func](arg))
        l, r = rec(x.left), rec(x.right)
        if x.op == "+":
            return l + r
        if x.op == "-":
            return l - r
        if x.op == "*":
            return l * r
        if not isinstance(r, Jet) and abs(r) <= DEFAULT_TOL.eps_div:
            raise DivisionByNearZero("division by near-zero constant")
        return l / r

    out = rec(e)
    return out if isinstance(out, Jet) else Jet.constant(out, degree, center)


_NP_FUNCS = {"sin": np.sin, "cos": np.cos, "exp": np.exp, "sqrt": np.sqrt}


def eval_point(e: Expr, u, v, params: Mapping[str, float] | None = None):
    """Plain numeric evaluation (numpy broadcasting over u, v)."""
    params = params or {}

    def rec(x):
        if isinstance(x, Num):
            return x.value
        if isinstance(x, Var):
            return u if x.name == "u" else v
        if isinstance(x, Param):
            return _param(x.name, params)
        if isinstance(x, Neg):
            return -rec(x.arg)
        if isinstance(x, Pow):
            return rec(x.base) ** x.exp
        if isinstance(x, Call):
            return _NP_FUNCS[x.func](rec(x.arg))
        l, r = rec(x.left), rec(x.right)
        if x.op == "+":
            return l + r
        if x.op == "-":
            return l - r
        if x.op == "*":
            return l * r
        if np.any(np.abs(r) <= 1e-300):
            raise DivisionByNearZero("division by zero in pointwise evaluation")
        return l / r

    return rec(e)


def require_polynomial(e: Expr) -> int:
    d = polynomial_degree(e)
    if d is None:
        raise NotPolynomial(f"{pretty(e)} is not a polynomial in u, v")
    return d


# -- symbolic differentiation ------------------------------------------------

def _is_num(e, x=None) -> bool:
    return isinstance(e, Num) and (x is None or e.value == x)


def _sadd(a, b):
    if _is_num(a, 0.0):
        return b
    if _is_num(b, 0.0):
        return a
    if _is_num(a) and _is_num(b):
        return Num(a.value + b.value)
    return Add(a, b)


def _ssub(a, b):
    if _is_num(b, 0.0):
        return a
    if _is_num(a, 0.0):
        return _sneg(b)
    if _is_num(a) and _is_num(b):
        return Num(a.value - b.value)
    return Sub(a, b)


def _sneg(a):
    if _is_num(a):
        return Num(-a.value)
    if isinstance(a, Neg):
        return a.arg
    return Neg(a)


def _smul(a, b):
    if _is_num(a, 0.0) or _is_num(b, 0.0):
        return Num(0.0)
    if _is_num(a, 1.0):
        return b
    if _is_num(b, 1.0):
        return a
    if _is_num(a) and _is_num(b):
        return Num(a.value * b.value)
    return Mul(a, b)


def _sdiv(a, b):
    if _is_num(a, 0.0):
        return Num(0.0)
    if _is_num(b, 1.0):
        return a
    return Div(a, b)


def diff(e: Expr, var: str) -> Expr:
    """Symbolic partial derivative with respect to ``u`` or ``v``."""
    if isinstance(e, (Num, Param)):
        return Num(0.0)
    if isinstance(e, Var):
        return Num(1.0 if e.name == var else 0.0)
    if isinstance(e, Neg):
        return _sneg(diff(e.arg, var))
    if isinstance(e, Pow):
        if e.exp == 0:
            return Num(0.0)
        inner = e.base if e.exp == 2 else Pow(e.base, e.exp - 1)
        if e.exp == 1:
            return diff(e.base, var)
        return _smul(_smul(Num(float(e.exp)), inner), diff(e.base, var))
    if isinstance(e, Call):
        da = diff(e.arg, var)
        if _is_num(da, 0.0):
            return Num(0.0)
        outer = {"sin": lambda x: Call("cos", x), "cos": lambda x: Neg(Call("sin", x)),
                 "exp": lambda x: Call("exp", x),
                 "sqrt": lambda x: Div(Num(0.5), Call("sqrt", x))}[e.func](e.arg)
        return _smul(outer, da)
    dl, dr = diff(e.left, var), diff(e.right, var)
    if e.op == "+":
        return _sadd(dl, dr)
    if e.op == "-":
        return _ssub(dl, dr)
    if e.op == "*":
        return _sadd(_smul(dl, e.right), _smul(e.left, dr))
    # (l/r)' = l'/r - l r'/r^2
    return _ssub(_sdiv(dl, e.right), _sdiv(_smul(e.left, dr), Pow(e.right, 2)))
