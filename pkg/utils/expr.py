"""
Expression language for field components.

Grammar (whitespace insignificant):

    expr   := term (('+'|'-') term)*
    term   := factor (('*'|'/') factor)*
    factor := atom ('^' integer)?
    atom   := number | 'x' integer | func '(' expr ')' | '(' expr ')' | '-' atom
    func   := sin | cos | exp | sqrt

Parsed trees are immutable and are evaluated on jets, so values and partials
come out of the same code path for chart and ambient coordinates.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from utils.errors import EvalDomainError, ExprSyntaxError, UnknownIdentifier, VariableRange
from utils.jets import Jet

FUNCS = ("sin", "cos", "exp", "sqrt")


# AST

@dataclass(frozen=True)
class Const:
    value: float


@dataclass(frozen=True)
class Var:
    index: int


@dataclass(frozen=True)
class Neg:
    arg: "Expr"


@dataclass(frozen=True)
class Func:
    name: str
    arg: "Expr"


@dataclass(frozen=True)
class BinOp:
    op: str  # one of + - * /
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class PowInt:
    base: "Expr"
    exponent: int


Expr = Union[Const, Var, Neg, Func, BinOp, PowInt]


@dataclass(frozen=True)
class Jet2:
    value: float
    grad: np.ndarray
    hess: np.ndarray


# tokenizer

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^()]))"
)


@dataclass(frozen=True)
class _Tok:
    kind: str
    text: str
    offset: int


def _byte_offset(text: str, i: int) -> int:
    return len(text[:i].encode("utf-8"))


def _tokenize(text: str) -> List[_Tok]:
    toks: List[_Tok] = []
    pos = 0
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ExprSyntaxError(f"unexpected character {text[pos:].lstrip()[:1]!r}",
                                  _byte_offset(text, len(text) - len(text[pos:].lstrip())))
        kind = m.lastgroup
        start = m.start(kind)
        toks.append(_Tok(kind, m.group(kind), _byte_offset(text, start)))
        pos = m.end()
    toks.append(_Tok("end", "", _byte_offset(text, len(text))))
    return toks


class _Parser:
    def __init__(self, text: str, dim: int):
        self.text = text
        self.dim = dim
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self) -> _Tok:
        return self.toks[self.i]

    def take(self) -> _Tok:
        t = self.toks[self.i]
        self.i += 1
        return t

    def expect(self, text: str) -> _Tok:
        t = self.take()
        if t.text != text:
            found = t.text or "end of input"
            raise ExprSyntaxError(f"expected '{text}', found '{found}'", t.offset)
        return t

    def parse(self) -> Expr:
        e = self.expr()
        t = self.peek()
        if t.kind != "end":
            raise ExprSyntaxError(f"unexpected '{t.text}'", t.offset)
        return e

    def expr(self) -> Expr:
        e = self.term()
        while self.peek().text in ("+", "-"):
            op = self.take().text
            e = BinOp(op, e, self.term())
        return e

    def term(self) -> Expr:
        e = self.factor()
        while self.peek().text in ("*", "/"):
            op = self.take().text
            e = BinOp(op, e, self.factor())
        return e

    def factor(self) -> Expr:
        base = self.atom()
        if self.peek().text == "^":
            self.take()
            sign = 1
            if self.peek().text == "-":
                self.take()
                sign = -1
            t = self.take()
            if t.kind != "num" or not t.text.isdigit():
                raise ExprSyntaxError("exponent must be an integer literal", t.offset)
            return PowInt(base, sign * int(t.text))
        return base

    def atom(self) -> Expr:
        t = self.take()
        if t.kind == "num":
            return Const(float(t.text))
        if t.text == "-":
            return Neg(self.atom())
        if t.text == "(":
            e = self.expr()
            self.expect(")")
            return e
        if t.kind == "name":
            if t.text in FUNCS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return Func(t.text, arg)
            m = re.fullmatch(r"x(\d+)", t.text)
            if m:
                idx = int(m.group(1))
                if idx >= self.dim:
                    raise VariableRange(
                        f"variable index out of range: {t.text} with dimension {self.dim}", t.offset)
                return Var(idx)
            raise UnknownIdentifier(f"unknown identifier '{t.text}'", t.offset)
        found = t.text or "end of input"
        raise ExprSyntaxError(f"unexpected '{found}'", t.offset)


def parse_expr(text: str, dim: int) -> Expr:
    if dim < 1:
        raise ValueError("chart dimension must be at least 1")
    return _Parser(str(text), dim).parse()


# printer

def _fmt_const(v: float) -> str:
    return repr(float(v))


def _is_atom(e: Expr) -> bool:
    return isinstance(e, (Const, Var, Func, Neg))


def format_expr(e: Expr) -> str:
    if isinstance(e, Const):
        return _fmt_const(e.value)
    if isinstance(e, Var):
        return f"x{e.index}"
    if isinstance(e, Func):
        return f"{e.name}({format_expr(e.arg)})"
    if isinstance(e, Neg):
        inner = format_expr(e.arg)
        return f"-{inner}" if _is_atom(e.arg) else f"-({inner})"
    if isinstance(e, PowInt):
        base = format_expr(e.base)
        if not _is_atom(e.base):
            base = f"({base})"
        return f"{base}^{e.exponent}"
    if isinstance(e, BinOp):
        left = format_expr(e.left)
        right = format_expr(e.right)
        if e.op in ("+", "-"):
            if isinstance(e.right, BinOp) and e.right.op in ("+", "-"):
                right = f"({right})"
        else:
            if isinstance(e.left, BinOp) and e.left.op in ("+", "-"):
                left = f"({left})"
            if isinstance(e.right, BinOp):
                right = f"({right})"
        return f"{left} {e.op} {right}"
    raise TypeError(f"not an expression node: {e!r}")


# tree helpers used by the builders

def shift_vars(e: Expr, offset: int) -> Expr:
    if isinstance(e, Var):
        return Var(e.index + offset)
    if isinstance(e, Const):
        return e
    if isinstance(e, Neg):
        return Neg(shift_vars(e.arg, offset))
    if isinstance(e, Func):
        return Func(e.name, shift_vars(e.arg, offset))
    if isinstance(e, PowInt):
        return PowInt(shift_vars(e.base, offset), e.exponent)
    return BinOp(e.op, shift_vars(e.left, offset), shift_vars(e.right, offset))


def max_var(e: Expr) -> int:
    if isinstance(e, Var):
        return e.index
    if isinstance(e, Const):
        return -1
    if isinstance(e, (Neg, Func)):
        return max_var(e.arg)
    if isinstance(e, PowInt):
        return max_var(e.base)
    return max(max_var(e.left), max_var(e.right))


# evaluation

def eval_bound(e: Expr, env: Sequence[Jet]) -> Jet:
    """Evaluate with each variable bound to an arbitrary scalar jet."""
    if isinstance(e, Const):
        return Jet.constant(e.value, env[0].n, env[0].order)
    if isinstance(e, Var):
        return env[e.index]
    if isinstance(e, Neg):
        return -eval_bound(e.arg, env)
    if isinstance(e, BinOp):
        a = eval_bound(e.left, env)
        b = eval_bound(e.right, env)
        if e.op == "+":
            return a + b
        if e.op == "-":
            return a - b
        if e.op == "*":
            return a * b
        if float(b.value) == 0.0:
            raise EvalDomainError("division by zero", format_expr(e))
        return a / b
    if isinstance(e, PowInt):
        b = eval_bound(e.base, env)
        if e.exponent < 0 and float(b.value) == 0.0:
            raise EvalDomainError("negative power of zero", format_expr(e))
        return b.powi(e.exponent)
    if isinstance(e, Func):
        a = eval_bound(e.arg, env)
        if e.name == "sqrt":
            v = float(a.value)
            if v < 0.0 or (v == 0.0 and a.order >= 1):
                raise EvalDomainError("sqrt of negative or zero argument", format_expr(e))
        return getattr(a, e.name)()
    raise TypeError(f"not an expression node: {e!r}")


def eval_jet(e: Expr, point: Sequence[float], order: int = 2) -> Jet:
    return eval_bound(e, Jet.coordinates(point, order))


def eval_jet2(e: Expr, point: Sequence[float]) -> Jet2:
    j = eval_jet(e, point, 2)
    return Jet2(value=float(j.value), grad=j.parts[1].copy(), hess=j.parts[2].copy())


def eval_value(e: Expr, point: Sequence[float]) -> float:
    return float(eval_jet(e, point, 0).value)
