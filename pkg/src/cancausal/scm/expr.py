"""Expression trees for functional equations, plus a prefix-notation parser.

Syntax::

    expr   := number | name | "(" op expr+ ")"
    op     := "+" | "-" | "*" | "tanh" | "exp" | "square" | "cube" | "abs" | "identity"

``(* c e)`` with a numeric literal ``c`` and one other operand parses to
``Scaled``; ``(- a b)`` is ``a + (-1)*b`` and ``(- a)`` is ``(-1)*a``.
Names are resolved later by the model, which knows which are nodes and which
are noise terms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

UNARY = {
    "tanh": np.tanh,
    "exp": np.exp,
    "square": np.square,
    "cube": lambda v: v * v * v,
    "abs": np.abs,
    "identity": lambda v: v,
}


class Expr:
    """Base class; concrete nodes are frozen dataclasses below."""

    def evaluate(self, env: dict):
        raise NotImplementedError

    def var_refs(self) -> frozenset:
        return frozenset().union(*(c.var_refs() for c in self.children()))

    def noise_refs(self) -> frozenset:
        return frozenset().union(*(c.noise_refs() for c in self.children()))

    def children(self) -> tuple:
        return ()

    def depth(self) -> int:
        return 1 + max((c.depth() for c in self.children()), default=0)


@dataclass(frozen=True)
class Constant(Expr):
    value: float

    def evaluate(self, env):
        return self.value

    def __str__(self):
        return repr(float(self.value))


@dataclass(frozen=True)
class VarRef(Expr):
    name: str

    def evaluate(self, env):
        return env[self.name]

    def var_refs(self):
        return frozenset([self.name])

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class NoiseRef(Expr):
    name: str

    def evaluate(self, env):
        return env[self.name]

    def noise_refs(self):
        return frozenset([self.name])

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class Sum(Expr):
    terms: tuple

    def evaluate(self, env):
        out = self.terms[0].evaluate(env)
        for t in self.terms[1:]:
            out = out + t.evaluate(env)
        return out

    def children(self):
        return self.terms

    def __str__(self):
        return "(+ " + " ".join(map(str, self.terms)) + ")"


@dataclass(frozen=True)
class Product(Expr):
    factors: tuple

    def evaluate(self, env):
        out = self.factors[0].evaluate(env)
        for f in self.factors[1:]:
            out = out * f.evaluate(env)
        return out

    def children(self):
        return self.factors

    def __str__(self):
        return "(* " + " ".join(map(str, self.factors)) + ")"


@dataclass(frozen=True)
class Unary(Expr):
    kind: str
    arg: Expr

    def __post_init__(self):
        if self.kind not in UNARY:
            raise ValueError(f"unknown function {self.kind!r}")

    def evaluate(self, env):
        return UNARY[self.kind](self.arg.evaluate(env))

    def children(self):
        return (self.arg,)

    def __str__(self):
        return f"({self.kind} {self.arg})"


@dataclass(frozen=True)
class Scaled(Expr):
    coefficient: float
    arg: Expr

    def evaluate(self, env):
        return self.coefficient * self.arg.evaluate(env)

    def children(self):
        return (self.arg,)

    def __str__(self):
        return f"(* {float(self.coefficient)!r} {self.arg})"


def add(*terms) -> Expr:
    return terms[0] if len(terms) == 1 else Sum(tuple(terms))


def mul(*factors) -> Expr:
    return factors[0] if len(factors) == 1 else Product(tuple(factors))


def scale(c: float, e: Expr) -> Expr:
    return Scaled(float(c), e)


def transform(e: Expr, leaf: Callable[[Expr], Expr]) -> Expr:
    """Rebuild ``e`` bottom-up, mapping every leaf through ``leaf``."""
    if isinstance(e, Sum):
        return Sum(tuple(transform(t, leaf) for t in e.terms))
    if isinstance(e, Product):
        return Product(tuple(transform(t, leaf) for t in e.factors))
    if isinstance(e, Unary):
        return Unary(e.kind, transform(e.arg, leaf))
    if isinstance(e, Scaled):
        return Scaled(e.coefficient, transform(e.arg, leaf))
    return leaf(e)


# ---------------------------------------------------------------------------
# parsing

class ParseError(ValueError):
    def __init__(self, msg, line=None, column=None):
        self.msg = msg
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f"line {line}, column {column}: "
        super().__init__(where + msg)


def _tokenize(text, line, col0):
    tokens = []
    i = 0
    while i < len(text):
        ch = text[i]
        if ch.isspace():
            i += 1
        elif ch in "()":
            tokens.append((ch, col0 + i))
            i += 1
        else:
            j = i
            while j < len(text) and not text[j].isspace() and text[j] not in "()":
                j += 1
            tokens.append((text[i:j], col0 + i))
            i = j
    return tokens


def _number(tok):
    try:
        v = float(tok)
    except ValueError:
        return None
    return v if math.isfinite(v) else None


def parse_expr(text: str, line: int = 1, column: int = 1) -> Expr:
    """Parse prefix ``text``; names become ``VarRef`` placeholders."""
    tokens = _tokenize(text, line, column)
    if not tokens:
        raise ParseError("empty expression", line, column)
    pos = 0

    def err(msg, at):
        col = tokens[at][1] if at < len(tokens) else column + len(text)
        return ParseError(msg, line, col)

    def parse():
        nonlocal pos
        if pos >= len(tokens):
            raise err("unexpected end of expression", pos)
        tok, col = tokens[pos]
        if tok == ")":
            raise err("unexpected ')'", pos)
        if tok != "(":
            pos += 1
            num = _number(tok)
            if num is not None:
                return Constant(num)
            if not (tok[0].isalpha() or tok[0] == "_"):
                raise ParseError(f"bad token {tok!r}", line, col)
            return VarRef(tok)
        pos += 1
        if pos >= len(tokens):
            raise err("missing operator after '('", pos)
        op, op_col = tokens[pos]
        pos += 1
        args = []
        while pos < len(tokens) and tokens[pos][0] != ")":
            args.append(parse())
        if pos >= len(tokens):
            raise ParseError("unbalanced '('", line, col)
        pos += 1
        if not args:
            raise ParseError(f"operator {op!r} needs arguments", line, op_col)
        if op == "+":
            return add(*args)
        if op == "*":
            consts = [a for a in args if isinstance(a, Constant)]
            if len(args) == 2 and len(consts) == 1:
                other = args[1] if args[0] is consts[0] else args[0]
                return Scaled(consts[0].value, other)
            return mul(*args)
        if op == "-":
            if len(args) == 1:
                return Scaled(-1.0, args[0])
            return add(args[0], *(Scaled(-1.0, a) for a in args[1:]))
        if op in UNARY:
            if len(args) != 1:
                raise ParseError(f"{op} takes one argument", line, op_col)
            return Unary(op, args[0])
        raise ParseError(f"unknown operator {op!r}", line, op_col)

    out = parse()
    if pos != len(tokens):
        raise err("trailing tokens after expression", pos)
    return out


def resolve(e: Expr, nodes, noises, line=None, column=None) -> Expr:
    """Turn parsed name placeholders into ``VarRef``/``NoiseRef`` nodes."""
    nodes, noises = set(nodes), set(noises)

    def leaf(x):
        if isinstance(x, VarRef):
            if x.name in noises:
                return NoiseRef(x.name)
            if x.name in nodes:
                return x
            raise ParseError(f"unknown name {x.name!r}", line, column)
        return x

    return transform(e, leaf)
