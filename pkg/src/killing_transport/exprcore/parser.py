"""Recursive-descent parser for scalar-field expressions.

Grammar (EBNF)::

    expr    = term , { ("+" | "-") , term } ;
    term    = unary , { ("*" | "/") , unary } ;
    unary   = ("-" | "+") , unary | power ;
    power   = atom , [ "^" , unary ] ;           (* right associative *)
    atom    = number | identifier | func , "(" , expr , ")" | "(" , expr , ")" ;
    func    = "sin" | "cos" | "tan" | "sinh" | "cosh" | "tanh"
            | "exp" | "log" | "sqrt" | "abs" ;

Unary minus binds looser than ``^`` so ``-u^2`` is ``-(u^2)``; the exponent
of ``^`` may itself carry a sign (``u^-2``).
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Callable, Mapping

import numpy as np

from ..errors import ExprSyntaxError, UnknownIdentifier

CHART_VARIABLES = ("u", "v") + tuple(f"x{i}" for i in range(1, 10))

FUNCTIONS: dict[str, Callable] = {
    "sin": np.sin,
    "cos": np.cos,
    "tan": np.tan,
    "sinh": np.sinh,
    "cosh": np.cosh,
    "tanh": np.tanh,
    "exp": np.exp,
    "log": np.log,
    "sqrt": np.sqrt,
    "abs": np.abs,
}

CONSTANTS = {"pi": math.pi}

_BINARY = {
    "+": np.add,
    "-": np.subtract,
    "*": np.multiply,
    "/": np.divide,
    "^": np.power,
}

_TOKEN = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<number>(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[-+*/^()])
    """,
    re.VERBOSE,
)


# --- AST --------------------------------------------------------------------


class Expr:
    """Base class of expression nodes."""

    def evaluate(self, env: Mapping[str, object]):
        raise NotImplementedError

    def variables(self) -> frozenset[str]:
        return frozenset()

    def __str__(self) -> str:
        return to_text(self)


@dataclass(frozen=True)
class Num(Expr):
    value: float

    def evaluate(self, env):
        return self.value


@dataclass(frozen=True)
class Var(Expr):
    name: str

    def evaluate(self, env):
        return env[self.name]

    def variables(self):
        return frozenset((self.name,))


@dataclass(frozen=True)
class Const(Expr):
    name: str

    def evaluate(self, env):
        return CONSTANTS[self.name]


@dataclass(frozen=True)
class Neg(Expr):
    operand: Expr

    def evaluate(self, env):
        return np.negative(self.operand.evaluate(env))

    def variables(self):
        return self.operand.variables()


@dataclass(frozen=True)
class BinOp(Expr):
    op: str
    left: Expr
    right: Expr

    def evaluate(self, env):
        return _BINARY[self.op](self.left.evaluate(env), self.right.evaluate(env))

    def variables(self):
        return self.left.variables() | self.right.variables()


@dataclass(frozen=True)
class Call(Expr):
    func: str
    arg: Expr

    def evaluate(self, env):
        return FUNCTIONS[self.func](self.arg.evaluate(env))

    def variables(self):
        return self.arg.variables()


# --- pretty printing ----------------------------------------------------------


def to_text(node: Expr) -> str:
    """Fully parenthesised text that re-parses to an equivalent tree."""
    if isinstance(node, Num):
        return repr(float(node.value))
    if isinstance(node, (Var, Const)):
        return node.name
    if isinstance(node, Neg):
        return f"(-{to_text(node.operand)})"
    if isinstance(node, BinOp):
        return f"({to_text(node.left)} {node.op} {to_text(node.right)})"
    if isinstance(node, Call):
        return f"{node.func}({to_text(node.arg)})"
    raise TypeError(f"not an expression node: {node!r}")


# --- parser -------------------------------------------------------------------


@dataclass
class _Tok:
    kind: str
    text: str
    offset: int  # byte offset into the source


def _tokenize(source: str) -> list[_Tok]:
    toks = []
    pos = 0
    while pos < len(source):
        m = _TOKEN.match(source, pos)
        if m is None:
            raise ExprSyntaxError(_byte_offset(source, pos), "a number, name, operator or parenthesis", source)
        kind = m.lastgroup
        if kind != "ws":
            toks.append(_Tok(kind, m.group(), _byte_offset(source, pos)))
        pos = m.end()
    toks.append(_Tok("end", "", _byte_offset(source, len(source))))
    return toks


def _byte_offset(source: str, index: int) -> int:
    return len(source[:index].encode("utf-8"))


class _Parser:
    def __init__(self, source: str, variables):
        self.source = source
        self.variables = frozenset(variables)
        self.toks = _tokenize(source)
        self.i = 0

    @property
    def tok(self) -> _Tok:
        return self.toks[self.i]

    def fail(self, expected: str):
        raise ExprSyntaxError(self.tok.offset, expected, self.source)

    def accept(self, text: str) -> bool:
        if self.tok.kind == "op" and self.tok.text == text:
            self.i += 1
            return True
        return False

    def expect(self, text: str):
        if not self.accept(text):
            self.fail(repr(text))

    def parse(self) -> Expr:
        node = self.expr()
        if self.tok.kind != "end":
            self.fail("an operator or end of input")
        return node

    def expr(self) -> Expr:
        node = self.term()
        while self.tok.kind == "op" and self.tok.text in "+-":
            op = self.tok.text
            self.i += 1
            node = BinOp(op, node, self.term())
        return node

    def term(self) -> Expr:
        node = self.unary()
        while self.tok.kind == "op" and self.tok.text in "*/":
            op = self.tok.text
            self.i += 1
            node = BinOp(op, node, self.unary())
        return node

    def unary(self) -> Expr:
        if self.accept("-"):
            return Neg(self.unary())
        if self.accept("+"):
            return self.unary()
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        if self.accept("^"):
            return BinOp("^", base, self.unary())
        return base

    def atom(self) -> Expr:
        tok = self.tok
        if tok.kind == "number":
            self.i += 1
            return Num(float(tok.text))
        if tok.kind == "name":
            self.i += 1
            if tok.text in FUNCTIONS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return Call(tok.text, arg)
            if tok.text in CONSTANTS:
                return Const(tok.text)
            if tok.text in self.variables:
                return Var(tok.text)
            raise UnknownIdentifier(tok.text, tok.offset)
        if self.accept("("):
            node = self.expr()
            self.expect(")")
            return node
        self.fail("a number, name or '('")


def parse_expr(source: str, variables=CHART_VARIABLES) -> Expr:
    """Parse ``source`` into an expression tree.

    Parameters
    ----------
    source : str
        Expression text, e.g. ``"sin(u)^2"``.
    variables : iterable of str
        Identifiers accepted as free variables.  Chart expressions use the
        default (``u``, ``v``, ``x1`` .. ``x9``); curve components use ``("t",)``.

    Raises
    ------
    ExprSyntaxError
        With the byte offset of the first offending token.
    UnknownIdentifier
        For names that are neither variables, constants nor functions.
    """
    if not isinstance(source, str) or not source.strip():
        raise ExprSyntaxError(0, "a non-empty expression", source if isinstance(source, str) else "")
    return _Parser(source, variables).parse()


def evaluate(node: Expr, **env):
    """Evaluate ``node`` with numpy broadcasting over the given variables."""
    with np.errstate(all="ignore"):
        return node.evaluate(env)
