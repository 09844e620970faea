"""Tiny expression language for user-defined map pieces.

Grammar (infix, case-sensitive)::

    expr    := term  (("+" | "-") term)*
    term    := factor (("*" | "/") factor)*
    factor  := ("-" | "+") factor | primary ("^" factor)?   # "**" = "^"
    primary := NUMBER | "x" | "pi" | FUNC "(" expr ")" | "(" expr ")"
    FUNC    := exp | sin | arcsin | asin | abs

Numbers are ordinary decimal or scientific literals.  The only free
variable is ``x``.  Parsed expressions evaluate on scalars (math module,
used in the simulation path) and on numpy arrays (grid analysis).
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

import numpy as np

from .errors import ParseError

__all__ = ["parse", "Node"]


class Node:
    """Expression-tree node; subclasses implement scalar and array eval."""

    def eval(self, x: float) -> float:
        raise NotImplementedError

    def eval_vec(self, xs: np.ndarray) -> np.ndarray:
        raise NotImplementedError


@dataclass(frozen=True)
class Num(Node):
    value: float

    def eval(self, x):
        return self.value

    def eval_vec(self, xs):
        return np.full_like(xs, self.value, dtype=float)

    def __str__(self):
        return repr(self.value)


@dataclass(frozen=True)
class Var(Node):
    def eval(self, x):
        return x

    def eval_vec(self, xs):
        return np.asarray(xs, dtype=float)

    def __str__(self):
        return "x"


_BINOPS = {
    "+": (lambda a, b: a + b, np.add),
    "-": (lambda a, b: a - b, np.subtract),
    "*": (lambda a, b: a * b, np.multiply),
    "/": (lambda a, b: a / b, np.divide),
    "^": (lambda a, b: a**b, np.power),
}

_FUNCS = {
    "exp": (math.exp, np.exp),
    "sin": (math.sin, np.sin),
    "arcsin": (math.asin, np.arcsin),
    "asin": (math.asin, np.arcsin),
    "abs": (abs, np.abs),
}


@dataclass(frozen=True)
class BinOp(Node):
    op: str
    left: Node
    right: Node

    def eval(self, x):
        return _BINOPS[self.op][0](self.left.eval(x), self.right.eval(x))

    def eval_vec(self, xs):
        return _BINOPS[self.op][1](self.left.eval_vec(xs), self.right.eval_vec(xs))

    def __str__(self):
        return f"({self.left} {self.op} {self.right})"


@dataclass(frozen=True)
class Neg(Node):
    operand: Node

    def eval(self, x):
        return -self.operand.eval(x)

    def eval_vec(self, xs):
        return -self.operand.eval_vec(xs)

    def __str__(self):
        return f"(-{self.operand})"


@dataclass(frozen=True)
class Func(Node):
    name: str
    arg: Node

    def eval(self, x):
        return _FUNCS[self.name][0](self.arg.eval(x))

    def eval_vec(self, xs):
        return _FUNCS[self.name][1](self.arg.eval_vec(xs))

    def __str__(self):
        return f"{self.name}({self.arg})"


_TOKEN_RE = re.compile(
    r"\s*(?:(?P<num>\d+\.\d*(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?|\d+(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_]\w*)"
    r"|(?P<op>\*\*|[-+*/^()]))"
)


def _tokenize(text: str) -> list[str]:
    tokens = []
    text = text.strip()
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r} at column {pos} in {text!r}")
        if m.lastgroup == "op" and m.group("op") == "**":
            tokens.append("^")
        else:
            tokens.append(m.group().strip())
        pos = m.end()
    return tokens


class _Parser:
    def __init__(self, tokens: list[str], source: str):
        self.tokens = tokens
        self.source = source
        self.i = 0

    def peek(self):
        return self.tokens[self.i] if self.i < len(self.tokens) else None

    def next(self):
        tok = self.peek()
        self.i += 1
        return tok

    def expect(self, tok: str):
        got = self.next()
        if got != tok:
            raise ParseError(f"expected {tok!r}, got {got!r} in {self.source!r}")

    def parse_expr(self) -> Node:
        node = self.parse_term()
        while self.peek() in ("+", "-"):
            op = self.next()
            node = BinOp(op, node, self.parse_term())
        return node

    def parse_term(self) -> Node:
        node = self.parse_factor()
        while self.peek() in ("*", "/"):
            op = self.next()
            node = BinOp(op, node, self.parse_factor())
        return node

    def parse_factor(self) -> Node:
        # unary sign binds looser than the (right-associative) power, so
        # -x^2 reads as -(x^2)
        tok = self.peek()
        if tok == "-":
            self.next()
            return Neg(self.parse_factor())
        if tok == "+":
            self.next()
            return self.parse_factor()
        base = self.parse_primary()
        if self.peek() == "^":
            self.next()
            return BinOp("^", base, self.parse_factor())
        return base

    def parse_primary(self) -> Node:
        tok = self.next()
        if tok is None:
            raise ParseError(f"unexpected end of expression in {self.source!r}")
        if tok == "(":
            node = self.parse_expr()
            self.expect(")")
            return node
        if re.fullmatch(r"[A-Za-z_]\w*", tok):
            if tok == "x":
                return Var()
            if tok == "pi":
                return Num(math.pi)
            if tok in _FUNCS:
                self.expect("(")
                arg = self.parse_expr()
                self.expect(")")
                return Func(tok, arg)
            raise ParseError(f"unknown name {tok!r} in {self.source!r}")
        try:
            return Num(float(tok))
        except ValueError:
            raise ParseError(f"bad token {tok!r} in {self.source!r}") from None


def parse(text: str) -> Node:
    """Parse ``text`` into an expression tree."""
    tokens = _tokenize(text)
    if not tokens:
        raise ParseError("empty expression")
    parser = _Parser(tokens, text)
    node = parser.parse_expr()
    if parser.peek() is not None:
        raise ParseError(f"trailing tokens starting at {parser.peek()!r} in {text!r}")
    return node
