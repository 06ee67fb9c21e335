"""A small arithmetic expression language for closed-form models.

Grammar, loosest binding first::

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := '-' unary | power
    power  := atom ('^' ['-'] INTEGER)?
    atom   := NUMBER | NAME | FUNC '(' expr (',' expr)* ')' | '(' expr ')'

``FUNC`` is one of ``min``, ``max`` (two arguments) or ``abs`` (one).
Implicit multiplication is not supported: write ``x*y``, not ``xy``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .core import DriftError

MAX_DEPTH = 100

FUNCTIONS = {"min": 2, "max": 2, "abs": 1}


class ExprError(DriftError):
    def __init__(self, message: str, pos: int | None = None):
        self.pos = pos
        if pos is not None:
            message = f"{message} (at position {pos})"
        super().__init__(message)


class EvalError(DriftError):
    def __init__(self, message: str, row: int | None = None):
        self.row = row
        if row is not None:
            message = f"{message} (row {row})"
        super().__init__(message)


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    name: str
    index: int


@dataclass(frozen=True)
class Neg:
    operand: "Expr"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Pow:
    base: "Expr"
    exponent: int


@dataclass(frozen=True)
class Call:
    fn: str
    args: tuple["Expr", ...]


Expr = Union[Num, Var, Neg, BinOp, Pow, Call]

_TOKEN = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>[-+*/^(),])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class _Tok:
    kind: str
    text: str
    pos: int


def tokenize(source: str) -> list[_Tok]:
    toks = []
    pos = 0
    while pos < len(source):
        m = _TOKEN.match(source, pos)
        if m is None:
            raise ExprError(f"unexpected character {source[pos]!r}", pos)
        if m.lastgroup != "ws":
            toks.append(_Tok(m.lastgroup, m.group(), pos))
        pos = m.end()
    toks.append(_Tok("end", "", len(source)))
    return toks


class _Parser:
    def __init__(self, source: str, feature_names: Sequence[str]):
        self.toks = tokenize(source)
        self.i = 0
        self.names = {name: j for j, name in enumerate(feature_names)}
        self.depth = 0

    @property
    def tok(self) -> _Tok:
        return self.toks[self.i]

    def advance(self) -> _Tok:
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def expect(self, text: str) -> _Tok:
        if self.tok.text != text or self.tok.kind not in ("op",):
            found = self.tok.text or "end of input"
            raise ExprError(f"expected {text!r}, found {found!r}", self.tok.pos)
        return self.advance()

    def enter(self):
        self.depth += 1
        if self.depth > MAX_DEPTH:
            raise ExprError("expression nested too deeply", self.tok.pos)

    def parse(self) -> Expr:
        node = self.expr()
        if self.tok.kind != "end":
            raise ExprError(f"unexpected {self.tok.text!r}", self.tok.pos)
        return node

    def expr(self) -> Expr:
        self.enter()
        node = self.term()
        while self.tok.kind == "op" and self.tok.text in "+-":
            op = self.advance().text
            node = BinOp(op, node, self.term())
        self.depth -= 1
        return node

    def term(self) -> Expr:
        node = self.unary()
        while self.tok.kind == "op" and self.tok.text in "*/":
            op = self.advance().text
            node = BinOp(op, node, self.unary())
        return node

    def unary(self) -> Expr:
        if self.tok.kind == "op" and self.tok.text == "-":
            self.advance()
            self.enter()
            node = Neg(self.unary())
            self.depth -= 1
            return node
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        if self.tok.kind == "op" and self.tok.text == "^":
            self.advance()
            sign = 1
            if self.tok.kind == "op" and self.tok.text == "-":
                self.advance()
                sign = -1
            tok = self.tok
            if tok.kind != "num":
                raise ExprError("exponent must be an integer literal", tok.pos)
            if not tok.text.isdigit():
                raise ExprError(f"non-integer exponent {tok.text!r}", tok.pos)
            self.advance()
            return Pow(base, sign * int(tok.text))
        return base

    def atom(self) -> Expr:
        tok = self.tok
        if tok.kind == "num":
            self.advance()
            value = float(tok.text)
            if not np.isfinite(value):
                raise ExprError(f"literal {tok.text!r} is not finite", tok.pos)
            return Num(value)
        if tok.kind == "name":
            self.advance()
            if self.tok.kind == "op" and self.tok.text == "(":
                return self.call(tok)
            if tok.text not in self.names:
                raise ExprError(f"unknown identifier {tok.text!r}", tok.pos)
            return Var(tok.text, self.names[tok.text])
        if tok.kind == "op" and tok.text == "(":
            self.advance()
            node = self.expr()
            self.expect(")")
            return node
        found = tok.text or "end of input"
        raise ExprError(f"unexpected {found!r}", tok.pos)

    def call(self, name_tok: _Tok) -> Expr:
        fn = name_tok.text
        if fn not in FUNCTIONS:
            raise ExprError(f"unknown function {fn!r}", name_tok.pos)
        self.expect("(")
        args = [self.expr()]
        while self.tok.kind == "op" and self.tok.text == ",":
            self.advance()
            args.append(self.expr())
        self.expect(")")
        if len(args) != FUNCTIONS[fn]:
            raise ExprError(
                f"{fn} takes {FUNCTIONS[fn]} argument(s), got {len(args)}", name_tok.pos
            )
        return Call(fn, tuple(args))


def parse_expr(source: str, feature_names: Sequence[str]) -> Expr:
    """Parse ``source`` against the declared feature names."""
    if not isinstance(source, str):
        raise ExprError("expression must be a string")
    return _Parser(source, list(feature_names)).parse()


def eval_expr(expr: Expr, batch) -> np.ndarray:
    """Evaluate ``expr`` on every row of an (m, n) batch."""
    batch = np.asarray(batch, dtype=float)
    if batch.ndim != 2:
        raise EvalError(f"batch must be 2-D, got shape {batch.shape}")
    if batch.shape[0] == 0:
        return np.zeros(0)
    needed = max_index(expr)
    if needed >= batch.shape[1]:
        raise EvalError(f"expression uses column {needed} but batch has {batch.shape[1]}")
    with np.errstate(all="ignore"):
        out = _eval(expr, batch)
    out = np.broadcast_to(out, (batch.shape[0],)).astype(float)
    bad = np.flatnonzero(~np.isfinite(out))
    if len(bad):
        raise EvalError("expression overflowed to a non-finite value", int(bad[0]))
    return out


def _eval(node: Expr, batch: np.ndarray):
    if isinstance(node, Num):
        return np.float64(node.value)
    if isinstance(node, Var):
        return batch[:, node.index]
    if isinstance(node, Neg):
        return -_eval(node.operand, batch)
    if isinstance(node, Pow):
        base = _eval(node.base, batch)
        if node.exponent < 0:
            zero = np.flatnonzero(np.broadcast_to(base, (batch.shape[0],)) == 0)
            if len(zero):
                raise EvalError("division by zero", int(zero[0]))
        return np.power(base, float(node.exponent))
    if isinstance(node, Call):
        args = [_eval(a, batch) for a in node.args]
        if node.fn == "min":
            return np.minimum(*args)
        if node.fn == "max":
            return np.maximum(*args)
        return np.abs(args[0])
    left = _eval(node.left, batch)
    right = _eval(node.right, batch)
    if node.op == "+":
        return left + right
    if node.op == "-":
        return left - right
    if node.op == "*":
        return left * right
    zero = np.flatnonzero(np.broadcast_to(right, (batch.shape[0],)) == 0)
    if len(zero):
        raise EvalError("division by zero", int(zero[0]))
    return left / right


def max_index(node: Expr) -> int:
    if isinstance(node, Var):
        return node.index
    if isinstance(node, Num):
        return -1
    if isinstance(node, (Neg,)):
        return max_index(node.operand)
    if isinstance(node, Pow):
        return max_index(node.base)
    if isinstance(node, Call):
        return max(max_index(a) for a in node.args)
    return max(max_index(node.left), max_index(node.right))


def to_source(node: Expr) -> str:
    """Render an AST back to source; binary operations are fully parenthesized."""
    if isinstance(node, Num):
        return repr(node.value)
    if isinstance(node, Var):
        return node.name
    if isinstance(node, Neg):
        return f"-{_wrap(node.operand)}"
    if isinstance(node, Pow):
        return f"{_wrap(node.base)}^{node.exponent}"
    if isinstance(node, Call):
        return f"{node.fn}({', '.join(to_source(a) for a in node.args)})"
    return f"({to_source(node.left)} {node.op} {to_source(node.right)})"


def _wrap(node: Expr) -> str:
    text = to_source(node)
    # binary operations render with their own parentheses
    if isinstance(node, (Var, Call, BinOp)) or (isinstance(node, Num) and not text.startswith("-")):
        return text
    return f"({text})"
