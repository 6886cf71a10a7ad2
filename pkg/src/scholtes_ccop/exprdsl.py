"""Scalar expression language with second-order forward-mode differentiation.

Expressions are written over variables ``x1 .. xn`` using ``+ - * / ^``,
unary minus, parentheses, decimal literals and the functions
``sin cos exp log sqrt``.  Evaluation propagates second-order jets
(value, gradient, Hessian) through the tree, so derivatives are exact up to
rounding.

    >>> e = parse_expression("(x1-1)^2+(x2-1)^2", 2)
    >>> r = eval2(e, [0.0, 1.0])
    >>> r.value, r.gradient.tolist()
    (1.0, [-2.0, 0.0])
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

__all__ = [
    "Expr",
    "Num",
    "Var",
    "Neg",
    "BinOp",
    "Call",
    "Eval2",
    "ExprSyntaxError",
    "ExprDomainError",
    "parse_expression",
    "eval2",
    "evaluate",
    "to_text",
    "check_derivatives",
    "DerivativeReport",
    "max_var_index",
]

FUNCTIONS = ("sin", "cos", "exp", "log", "sqrt")


class ExprSyntaxError(ValueError):
    """Malformed expression text; ``offset`` is the byte offset of the problem."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} at offset {offset}")
        self.offset = offset


class ExprDomainError(ArithmeticError):
    def __init__(self, message: str, node: "Expr"):
        super().__init__(f"{message} in '{to_text(node)}' (offset {node.pos})")
        self.node = node


# --------------------------------------------------------------------------- AST


@dataclass(frozen=True)
class Num:
    value: float
    pos: int = 0


@dataclass(frozen=True)
class Var:
    index: int  # 1-based, as written
    pos: int = 0


@dataclass(frozen=True)
class Neg:
    arg: "Expr"
    pos: int = 0


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Expr"
    right: "Expr"
    pos: int = 0


@dataclass(frozen=True)
class Call:
    name: str
    arg: "Expr"
    pos: int = 0


Expr = Union[Num, Var, Neg, BinOp, Call]


# ------------------------------------------------------------------------ parser

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[-+*/^()])
    """,
    re.VERBOSE,
)


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ExprSyntaxError(f"unexpected character {text[pos]!r}", pos)
        kind = m.lastgroup
        if kind != "ws":
            tokens.append((kind, m.group(), pos))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    # expr   := term (('+'|'-') term)*
    # term   := unary (('*'|'/') unary)*
    # unary  := '-' unary | '+' unary | power
    # power  := atom ('^' unary)?          right-associative, binds tighter than unary minus
    # atom   := number | var | func '(' expr ')' | '(' expr ')'

    def __init__(self, text: str, n: int):
        self.tokens = _tokenize(text)
        self.i = 0
        self.n = n

    def peek(self):
        return self.tokens[self.i]

    def advance(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, value: str):
        kind, val, pos = self.peek()
        if val != value or kind != "op":
            what = "end of input" if kind == "end" else repr(val)
            raise ExprSyntaxError(f"expected {value!r}, found {what}", pos)
        return self.advance()

    def parse(self) -> Expr:
        node = self.expr()
        kind, val, pos = self.peek()
        if kind != "end":
            raise ExprSyntaxError(f"unexpected token {val!r}", pos)
        return node

    def expr(self) -> Expr:
        node = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            _, op, pos = self.advance()
            node = BinOp(op, node, self.term(), pos)
        return node

    def term(self) -> Expr:
        node = self.unary()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            _, op, pos = self.advance()
            node = BinOp(op, node, self.unary(), pos)
        return node

    def unary(self) -> Expr:
        kind, val, pos = self.peek()
        if kind == "op" and val == "-":
            self.advance()
            return Neg(self.unary(), pos)
        if kind == "op" and val == "+":
            self.advance()
            return self.unary()
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        kind, val, pos = self.peek()
        if kind == "op" and val == "^":
            self.advance()
            return BinOp("^", base, self.unary(), pos)
        return base

    def atom(self) -> Expr:
        kind, val, pos = self.advance()
        if kind == "num":
            return Num(float(val), pos)
        if kind == "ident":
            m = re.fullmatch(r"x([1-9]\d*)", val)
            if m:
                k = int(m.group(1))
                if k > self.n:
                    raise ExprSyntaxError(f"variable {val} out of range (n={self.n})", pos)
                return Var(k, pos)
            if val in FUNCTIONS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return Call(val, arg, pos)
            raise ExprSyntaxError(f"unknown identifier {val!r}", pos)
        if kind == "op" and val == "(":
            node = self.expr()
            self.expect(")")
            return node
        what = "end of input" if kind == "end" else repr(val)
        raise ExprSyntaxError(f"unexpected {what}", pos)


def parse_expression(text: str, n: int) -> Expr:
    """Parse ``text`` into an expression tree over ``x1 .. xn``."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    if not text or not text.strip():
        raise ExprSyntaxError("empty expression", 0)
    return _Parser(text, n).parse()


def max_var_index(expr: Expr) -> int:
    if isinstance(expr, Var):
        return expr.index
    if isinstance(expr, Num):
        return 0
    if isinstance(expr, (Neg, Call)):
        return max_var_index(expr.arg)
    return max(max_var_index(expr.left), max_var_index(expr.right))


# ----------------------------------------------------------------- pretty-print

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "neg": 3, "^": 4}


def to_text(expr: Expr) -> str:
    """Fully round-trippable text form (redundant parentheses are kept minimal but safe)."""
    return _fmt(expr, 0)


def _fmt(e: Expr, parent: int) -> str:
    if isinstance(e, Num):
        s = repr(float(e.value))
        return f"({s})" if parent >= _PREC["neg"] and e.value < 0 else s
    if isinstance(e, Var):
        return f"x{e.index}"
    if isinstance(e, Call):
        return f"{e.name}({_fmt(e.arg, 0)})"
    if isinstance(e, Neg):
        s = "-" + _fmt(e.arg, _PREC["neg"])
        return f"({s})" if parent >= _PREC["neg"] else s
    p = _PREC[e.op]
    if e.op == "^":
        s = f"{_fmt(e.left, p + 1)}^{_fmt(e.right, p)}"
    else:
        # left-assoc: right operand needs parentheses at equal precedence
        s = f"{_fmt(e.left, p)}{e.op}{_fmt(e.right, p + 1)}"
    return f"({s})" if p < parent else s


# -------------------------------------------------------------- second-order AD


class _Jet:
    """Value, gradient and Hessian of an intermediate quantity."""

    __slots__ = ("v", "g", "h")

    def __init__(self, v: float, g: np.ndarray, h: np.ndarray):
        self.v = v
        self.g = g
        self.h = h

    @classmethod
    def const(cls, v: float, n: int) -> "_Jet":
        return cls(float(v), np.zeros(n), np.zeros((n, n)))

    def is_const(self) -> bool:
        return not (self.g.any() or self.h.any())

    def add(self, o: "_Jet") -> "_Jet":
        return _Jet(self.v + o.v, self.g + o.g, self.h + o.h)

    def sub(self, o: "_Jet") -> "_Jet":
        return _Jet(self.v - o.v, self.g - o.g, self.h - o.h)

    def neg(self) -> "_Jet":
        return _Jet(-self.v, -self.g, -self.h)

    def mul(self, o: "_Jet") -> "_Jet":
        cross = np.outer(self.g, o.g)
        return _Jet(
            self.v * o.v,
            self.v * o.g + o.v * self.g,
            self.v * o.h + o.v * self.h + cross + cross.T,
        )

    def chain(self, f0: float, f1: float, f2: float) -> "_Jet":
        """Compose with a scalar function having derivatives f0, f1, f2 at self.v."""
        return _Jet(f0, f1 * self.g, f1 * self.h + f2 * np.outer(self.g, self.g))


def _int_power(base: _Jet, k: int, n: int) -> _Jet:
    # repeated squaring keeps everything polynomial in the jet arithmetic
    result = _Jet.const(1.0, n)
    acc = base
    while k:
        if k & 1:
            result = result.mul(acc)
        k >>= 1
        if k:
            acc = acc.mul(acc)
    return result


def _eval_jet(e: Expr, x: np.ndarray, n: int) -> _Jet:
    if isinstance(e, Num):
        return _Jet.const(e.value, n)
    if isinstance(e, Var):
        k = e.index - 1
        if k >= n:
            raise IndexError(f"x{e.index} referenced but point has length {n}")
        g = np.zeros(n)
        g[k] = 1.0
        return _Jet(float(x[k]), g, np.zeros((n, n)))
    if isinstance(e, Neg):
        return _eval_jet(e.arg, x, n).neg()
    if isinstance(e, Call):
        a = _eval_jet(e.arg, x, n)
        v = a.v
        if e.name == "sin":
            s, c = math.sin(v), math.cos(v)
            return a.chain(s, c, -s)
        if e.name == "cos":
            s, c = math.sin(v), math.cos(v)
            return a.chain(c, -s, -c)
        if e.name == "exp":
            ev = math.exp(v)
            return a.chain(ev, ev, ev)
        if e.name == "log":
            if v <= 0.0:
                raise ExprDomainError(f"log of nonpositive value {v!r}", e)
            return a.chain(math.log(v), 1.0 / v, -1.0 / (v * v))
        if e.name == "sqrt":
            if v <= 0.0:
                raise ExprDomainError(f"sqrt of nonpositive value {v!r}", e)
            r = math.sqrt(v)
            return a.chain(r, 0.5 / r, -0.25 / (r * v))
        raise ValueError(f"unknown function {e.name}")
    # binary
    a = _eval_jet(e.left, x, n)
    b = _eval_jet(e.right, x, n)
    if e.op == "+":
        return a.add(b)
    if e.op == "-":
        return a.sub(b)
    if e.op == "*":
        return a.mul(b)
    if e.op == "/":
        if b.v == 0.0:
            raise ExprDomainError("division by zero", e)
        inv = b.chain(1.0 / b.v, -1.0 / b.v**2, 2.0 / b.v**3)
        return a.mul(inv)
    if e.op == "^":
        if b.is_const():
            p = b.v
            if float(p).is_integer() and abs(p) <= 64:
                k = int(p)
                if k >= 0:
                    return _int_power(a, k, n)
                if a.v == 0.0:
                    raise ExprDomainError("zero raised to a negative power", e)
                r = _int_power(a, -k, n)
                return r.chain(1.0 / r.v, -1.0 / r.v**2, 2.0 / r.v**3)
            if a.v <= 0.0:
                raise ExprDomainError(f"non-integer power of nonpositive base {a.v!r}", e)
            return a.chain(a.v**p, p * a.v ** (p - 1), p * (p - 1) * a.v ** (p - 2))
        # variable exponent: a^b = exp(b log a)
        if a.v <= 0.0:
            raise ExprDomainError(f"variable power of nonpositive base {a.v!r}", e)
        la = a.chain(math.log(a.v), 1.0 / a.v, -1.0 / a.v**2)
        w = b.mul(la)
        ew = math.exp(w.v)
        return w.chain(ew, ew, ew)
    raise ValueError(f"unknown operator {e.op}")


@dataclass(frozen=True)
class Eval2:
    value: float
    gradient: np.ndarray
    hessian: np.ndarray


def eval2(expr: Expr, x: Sequence[float]) -> Eval2:
    """Value, gradient and Hessian of ``expr`` at ``x``.

    The dimension of the derivatives is ``len(x)``; the expression may reference
    any subset of the coordinates.
    """
    xv = np.asarray(x, dtype=float)
    n = xv.shape[0]
    jet = _eval_jet(expr, xv, n)
    # mirror the upper triangle so symmetry is exact
    h = np.triu(jet.h)
    h = h + np.triu(h, 1).T
    return Eval2(float(jet.v), jet.g.copy(), h)


def evaluate(expr: Expr, x: Sequence[float]) -> float:
    """Plain value, without derivative propagation."""
    return _eval_value(expr, x)


def _eval_value(e: Expr, x) -> float:
    if isinstance(e, Num):
        return e.value
    if isinstance(e, Var):
        return float(x[e.index - 1])
    if isinstance(e, Neg):
        return -_eval_value(e.arg, x)
    if isinstance(e, Call):
        v = _eval_value(e.arg, x)
        if e.name in ("log", "sqrt") and v <= 0.0:
            raise ExprDomainError(f"{e.name} of nonpositive value {v!r}", e)
        return getattr(math, e.name)(v)
    a = _eval_value(e.left, x)
    b = _eval_value(e.right, x)
    if e.op == "+":
        return a + b
    if e.op == "-":
        return a - b
    if e.op == "*":
        return a * b
    if e.op == "/":
        if b == 0.0:
            raise ExprDomainError("division by zero", e)
        return a / b
    if float(b).is_integer():
        if a == 0.0 and b < 0:
            raise ExprDomainError("zero raised to a negative power", e)
        return a ** int(b)
    if a <= 0.0:
        raise ExprDomainError(f"non-integer power of nonpositive base {a!r}", e)
    return a**b


# ------------------------------------------------------------ derivative check


@dataclass(frozen=True)
class DerivativeReport:
    max_rel_error: float
    gradient_rel_error: float
    hessian_rel_error: float
    domain_error: str | None = None

    @property
    def ok(self) -> bool:
        return self.domain_error is None and np.isfinite(self.max_rel_error)


def check_derivatives(expr: Expr, x: Sequence[float], step: float = 1e-5) -> DerivativeReport:
    """Compare AD derivatives against central differences.

    Gradient differences use function values; Hessian differences use the AD
    gradient.  Errors are relative to ``max(1, |value|)``.
    """
    if step <= 0:
        raise ValueError("step must be positive")
    x0 = np.asarray(x, dtype=float)
    n = x0.size
    try:
        ad = eval2(expr, x0)
        fd_g = np.empty(n)
        fd_h = np.empty((n, n))
        for k in range(n):
            e = np.zeros(n)
            e[k] = step
            fd_g[k] = (_eval_value(expr, x0 + e) - _eval_value(expr, x0 - e)) / (2 * step)
            fd_h[:, k] = (eval2(expr, x0 + e).gradient - eval2(expr, x0 - e).gradient) / (2 * step)
    except ExprDomainError as exc:
        return DerivativeReport(math.nan, math.nan, math.nan, str(exc))
    scale = max(1.0, abs(ad.value))
    ge = float(np.max(np.abs(ad.gradient - fd_g), initial=0.0)) / scale
    he = float(np.max(np.abs(ad.hessian - fd_h), initial=0.0)) / scale
    return DerivativeReport(max(ge, he), ge, he)
