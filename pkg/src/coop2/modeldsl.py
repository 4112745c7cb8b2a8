"""A small expression language for user-defined vector fields.

Grammar (standard precedence, power binds tighter than unary minus):

    expr   := term (("+" | "-") term)*
    term   := unary (("*" | "/") unary)*
    unary  := "-" unary | power
    power  := atom ("^" integer)?
    atom   := number | identifier | "exp" "(" expr ")" | "(" expr ")"

Identifiers of the form ``x<i>`` are state variables (1-based); anything else
is a model parameter.  Exponents are nonnegative integer literals only.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np

__all__ = [
    "DslSyntaxError",
    "UnknownIdentifier",
    "DivisionNearZero",
    "Expr",
    "Num",
    "Var",
    "Param",
    "Neg",
    "Bin",
    "Pow",
    "ExpCall",
    "parse",
    "to_string",
    "evaluate",
    "eval_field",
    "jacobian_fd",
    "load_model_config",
]

_DIV_FLOOR = 1e-30


class DslSyntaxError(ValueError):
    """Parse failure with a 1-based line/column position."""

    def __init__(self, message: str, line: int, column: int, expected: str = ""):
        self.line = line
        self.column = column
        self.expected = expected
        super().__init__(f"{message} at line {line}, column {column}"
                         + (f" (expected {expected})" if expected else ""))


class UnknownIdentifier(ValueError):
    pass


class DivisionNearZero(ArithmeticError):
    pass


class Expr:
    """Base class for AST nodes; nodes are immutable and shareable."""

    __slots__ = ()


@dataclass(frozen=True)
class Num(Expr):
    value: float


@dataclass(frozen=True)
class Var(Expr):
    index: int  # 0-based state index


@dataclass(frozen=True)
class Param(Expr):
    name: str


@dataclass(frozen=True)
class Neg(Expr):
    arg: Expr


@dataclass(frozen=True)
class Bin(Expr):
    op: str  # one of + - * /
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Pow(Expr):
    base: Expr
    exponent: int


@dataclass(frozen=True)
class ExpCall(Expr):
    arg: Expr


_TOKEN_RE = re.compile(
    r"\s*(?:(?P<num>\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?"
    r"|(?P<ident>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^()]))"
)
_VAR_RE = re.compile(r"^x(\d+)$")


class _Tokenizer:
    def __init__(self, source: str):
        self.source = source
        self.pos = 0
        self.tokens: list[tuple[str, str, int]] = []  # (kind, text, offset)
        while self.pos < len(source):
            m = _TOKEN_RE.match(source, self.pos)
            if m is None or m.end() == self.pos:
                # skip leading whitespace before reporting
                rest = source[self.pos:]
                stripped = rest.lstrip()
                if not stripped:
                    break
                off = self.pos + (len(rest) - len(stripped))
                raise DslSyntaxError(
                    f"unexpected character {stripped[0]!r}", *_line_col(source, off)
                )
            kind = m.lastgroup
            text = m.group(kind)
            off = m.start(kind)
            if kind == "num":
                text = source[m.start(kind):m.end()].strip()
            self.tokens.append((kind, text, off))
            self.pos = m.end()
        self.tokens.append(("eof", "", len(source)))
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def next(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok


def _line_col(source: str, offset: int) -> tuple[int, int]:
    line = source.count("\n", 0, offset) + 1
    last_nl = source.rfind("\n", 0, offset)
    return line, offset - last_nl


class _Parser:
    def __init__(self, source: str, params: set[str] | None = None):
        self.source = source
        self.toks = _Tokenizer(source)
        self.params = params

    def error(self, message: str, offset: int, expected: str = ""):
        raise DslSyntaxError(message, *_line_col(self.source, offset), expected=expected)

    def parse(self) -> Expr:
        e = self.expr()
        kind, text, off = self.toks.peek()
        if kind != "eof":
            self.error(f"unexpected trailing token {text!r}", off, expected="end of input")
        return e

    def expr(self) -> Expr:
        e = self.term()
        while True:
            kind, text, _ = self.toks.peek()
            if kind == "op" and text in "+-":
                self.toks.next()
                e = Bin(text, e, self.term())
            else:
                return e

    def term(self) -> Expr:
        e = self.unary()
        while True:
            kind, text, _ = self.toks.peek()
            if kind == "op" and text in "*/":
                self.toks.next()
                e = Bin(text, e, self.unary())
            else:
                return e

    def unary(self) -> Expr:
        kind, text, _ = self.toks.peek()
        if kind == "op" and text == "-":
            self.toks.next()
            return Neg(self.unary())
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        kind, text, off = self.toks.peek()
        if kind == "op" and text == "^":
            self.toks.next()
            kind, text, off = self.toks.next()
            if kind != "num" or not text.isdigit():
                self.error(f"bad exponent {text!r}", off, expected="nonnegative integer")
            return Pow(base, int(text))
        return base

    def atom(self) -> Expr:
        kind, text, off = self.toks.next()
        if kind == "num":
            return Num(float(text))
        if kind == "ident":
            if text == "exp":
                k2, t2, o2 = self.toks.next()
                if (k2, t2) != ("op", "("):
                    self.error("exp must be called", o2, expected="(")
                arg = self.expr()
                k3, t3, o3 = self.toks.next()
                if (k3, t3) != ("op", ")"):
                    self.error("unclosed exp(", o3, expected=")")
                return ExpCall(arg)
            m = _VAR_RE.match(text)
            if m:
                return Var(int(m.group(1)) - 1)
            if self.params is not None and text not in self.params:
                raise UnknownIdentifier(f"undeclared identifier {text!r}")
            return Param(text)
        if (kind, text) == ("op", "("):
            e = self.expr()
            k2, t2, o2 = self.toks.next()
            if (k2, t2) != ("op", ")"):
                self.error("unbalanced parenthesis", o2, expected=")")
            return e
        self.error(f"unexpected token {text!r}" if text else "unexpected end of input",
                   off, expected="number, identifier, or (")


def parse(source: str, params: set[str] | None = None) -> Expr:
    """Parse a source string; with ``params`` given, undeclared names raise
    UnknownIdentifier at parse time instead of at evaluation."""
    return _Parser(source, params).parse()


def to_string(e: Expr) -> str:
    """Fully parenthesized rendering; reparses to a structurally identical tree."""
    if isinstance(e, Num):
        return repr(e.value)
    if isinstance(e, Var):
        return f"x{e.index + 1}"
    if isinstance(e, Param):
        return e.name
    if isinstance(e, Neg):
        return f"(-{to_string(e.arg)})"
    if isinstance(e, Bin):
        return f"({to_string(e.left)}{e.op}{to_string(e.right)})"
    if isinstance(e, Pow):
        return f"({to_string(e.base)}^{e.exponent})"
    if isinstance(e, ExpCall):
        return f"exp({to_string(e.arg)})"
    raise TypeError(f"not an Expr: {e!r}")


def evaluate(e: Expr, x, params: dict | None = None) -> float:
    """IEEE-double evaluation; deterministic given inputs."""
    x = np.asarray(x, dtype=float)
    params = params or {}

    def rec(node: Expr) -> float:
        if isinstance(node, Num):
            return node.value
        if isinstance(node, Var):
            if node.index >= x.size:
                raise UnknownIdentifier(f"x{node.index + 1} outside dimension {x.size}")
            return float(x[node.index])
        if isinstance(node, Param):
            try:
                return float(params[node.name])
            except KeyError:
                raise UnknownIdentifier(f"unbound parameter {node.name!r}") from None
        if isinstance(node, Neg):
            return -rec(node.arg)
        if isinstance(node, Bin):
            a, b = rec(node.left), rec(node.right)
            if node.op == "+":
                return a + b
            if node.op == "-":
                return a - b
            if node.op == "*":
                return a * b
            if abs(b) < _DIV_FLOOR:
                raise DivisionNearZero(f"denominator {b!r} below {_DIV_FLOOR}")
            return a / b
        if isinstance(node, Pow):
            return rec(node.base) ** node.exponent
        if isinstance(node, ExpCall):
            return float(np.exp(rec(node.arg)))
        raise TypeError(f"not an Expr: {node!r}")

    return rec(e)


def eval_field(field: list[Expr], x, params: dict | None = None) -> np.ndarray:
    return np.array([evaluate(e, x, params) for e in field])


def jacobian_fd(field: list[Expr], x, params: dict | None = None,
                h: float | None = None) -> np.ndarray:
    """Central-difference Jacobian; default step eps^(1/3) * max(1, |x_j|)."""
    x = np.asarray(x, dtype=float)
    n = x.size
    m = len(field)
    J = np.empty((m, n))
    base_h = np.finfo(float).eps ** (1.0 / 3.0)
    for j in range(n):
        hj = h if h is not None else base_h * max(1.0, abs(x[j]))
        xp = x.copy()
        xm = x.copy()
        xp[j] += hj
        xm[j] -= hj
        fp = eval_field(field, xp, params)
        fm = eval_field(field, xm, params)
        J[:, j] = (fp - fm) / (2.0 * hj)
    return J


def load_model_config(path):
    """Build a Model from a JSON config:

    { "name": str, "dim": n, "params": {name: value},
      "field": [expr-string x n], "box": {"lower": [...], "upper": [...]} }
    """
    from .models import Model  # local import to avoid a cycle

    cfg = json.loads(Path(path).read_text())
    for key in ("name", "dim", "params", "field", "box"):
        if key not in cfg:
            raise ValueError(f"model config missing {key!r}")
    n = int(cfg["dim"])
    params = {str(k): float(v) for k, v in cfg["params"].items()}
    if len(cfg["field"]) != n:
        raise ValueError(f"field has {len(cfg['field'])} expressions, expected {n}")
    exprs = [parse(src, params=set(params)) for src in cfg["field"]]
    lower = np.asarray(cfg["box"]["lower"], dtype=float)
    upper = np.asarray(cfg["box"]["upper"], dtype=float)
    if lower.size != n or upper.size != n or np.any(lower >= upper):
        raise ValueError("box must satisfy lower < upper componentwise")

    def fld(x):
        return eval_field(exprs, x, params)

    def jac(x):
        return jacobian_fd(exprs, x, params)

    return Model(name=str(cfg["name"]), n=n, field=fld, jacobian=jac,
                 box_lower=lower, box_upper=upper, params=params)
