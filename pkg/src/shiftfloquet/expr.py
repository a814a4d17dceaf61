"""A small arithmetic expression language.

Grammar, loosest binding first::

    expr    := expr ('+' | '-') expr
             | expr ('*' | '/') expr
             | expr '^' expr            (right associative)
             | '-' expr                 (binds tighter than '^')
             | NUMBER | NAME | NAME '(' args ')' | '(' expr ')'

so ``-2^2`` is ``(-2)^2`` and ``2^3^2`` is ``2^(3^2)``.  Parsing uses
precedence climbing; evaluation compiles the tree into nested closures.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional

from .errors import ArityError, EvalDomain, ExpressionSyntaxError, UnknownIdentifier

INTPOW_TOL = 1e-9

# ---------------------------------------------------------------------------
# syntax tree


@dataclass(frozen=True)
class Node:
    pos: tuple = field(default=(1, 1), compare=False, repr=False, kw_only=True)


@dataclass(frozen=True)
class Num(Node):
    value: float


@dataclass(frozen=True)
class Var(Node):
    name: str


@dataclass(frozen=True)
class Const(Node):
    name: str


@dataclass(frozen=True)
class Neg(Node):
    arg: Node


@dataclass(frozen=True)
class BinOp(Node):
    op: str
    left: Node
    right: Node


@dataclass(frozen=True)
class Call(Node):
    name: str
    args: tuple


CONSTANTS = {"pi": math.pi, "e": math.e}
FUNCTIONS = {"sin": 1, "cos": 1, "exp": 1, "ln": 1, "sqrt": 1, "abs": 1, "sign": 1,
             "pow": 2, "intpow": 2}
# binary operator -> (precedence, right associative)
BINARY = {"+": (1, False), "-": (1, False), "*": (2, False), "/": (2, False), "^": (3, True)}

_DEFAULT_VAR = re.compile(r"t|[xu][1-9][0-9]*")

# ---------------------------------------------------------------------------
# lexer

_TOKEN = re.compile(r"""
    (?P<ws>[ \t\r\n]+)
  | (?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[-+*/^(),])
""", re.VERBOSE)


@dataclass
class _Tok:
    kind: str
    text: str
    line: int
    col: int


def _tokenize(src: str) -> list:
    toks, i, line, col = [], 0, 1, 1
    while i < len(src):
        m = _TOKEN.match(src, i)
        if m is None:
            raise ExpressionSyntaxError(f"unexpected character {src[i]!r}", line, col)
        text = m.group()
        if m.lastgroup != "ws":
            toks.append(_Tok(m.lastgroup, text, line, col))
        for ch in text:
            if ch == "\n":
                line, col = line + 1, 1
            else:
                col += 1
        i = m.end()
    toks.append(_Tok("end", "", line, col))
    return toks


# ---------------------------------------------------------------------------
# parser

_OPERAND_START = ("number", "name", "'('", "'-'")


class _Parser:
    def __init__(self, src, variables):
        self.toks = _tokenize(src)
        self.i = 0
        self.variables = variables

    @property
    def tok(self):
        return self.toks[self.i]

    def fail(self, msg, expected=(), cls=ExpressionSyntaxError, tok=None):
        tok = tok or self.tok
        raise cls(msg, tok.line, tok.col, expected)

    def expect(self, text):
        if self.tok.text != text or self.tok.kind != "op":
            found = self.tok.text or "end of input"
            self.fail(f"unexpected {found!r}", (f"'{text}'",))
        self.i += 1

    def parse(self):
        node = self.expr(1)
        if self.tok.kind != "end":
            self.fail(f"unexpected {self.tok.text!r}", ("end of input", "operator"))
        return node

    def expr(self, min_prec):
        lhs = self.unary()
        while self.tok.kind == "op" and self.tok.text in BINARY:
            prec, right = BINARY[self.tok.text]
            if prec < min_prec:
                break
            tok = self.tok
            self.i += 1
            rhs = self.expr(prec if right else prec + 1)
            lhs = BinOp(tok.text, lhs, rhs, pos=(tok.line, tok.col))
        return lhs

    def unary(self):
        tok = self.tok
        if tok.kind == "op" and tok.text == "-":
            self.i += 1
            return Neg(self.unary(), pos=(tok.line, tok.col))
        return self.primary()

    def primary(self):
        tok = self.tok
        pos = (tok.line, tok.col)
        if tok.kind == "num":
            self.i += 1
            value = float(tok.text)
            if not math.isfinite(value):
                self.fail(f"numeric literal {tok.text!r} overflows", tok=tok)
            return Num(value, pos=pos)
        if tok.kind == "name":
            self.i += 1
            name = tok.text
            if self.tok.kind == "op" and self.tok.text == "(":
                if name not in FUNCTIONS:
                    self.fail(f"unknown function {name!r}", sorted(FUNCTIONS), UnknownIdentifier, tok)
                return self.call(name, tok)
            if name in FUNCTIONS:
                self.fail(f"function {name!r} needs an argument list", ("'('",))
            if name in CONSTANTS:
                return Const(name, pos=pos)
            if self.variables(name):
                return Var(name, pos=pos)
            self.fail(f"unknown identifier {name!r}", (), UnknownIdentifier, tok)
        if tok.kind == "op" and tok.text == "(":
            self.i += 1
            node = self.expr(1)
            self.expect(")")
            return node
        found = tok.text or "end of input"
        self.fail(f"unexpected {found!r}", _OPERAND_START)

    def call(self, name, tok):
        self.expect("(")
        args = []
        if not (self.tok.kind == "op" and self.tok.text == ")"):
            args.append(self.expr(1))
            while self.tok.kind == "op" and self.tok.text == ",":
                self.i += 1
                args.append(self.expr(1))
        self.expect(")")
        if len(args) != FUNCTIONS[name]:
            raise ArityError(f"{name} takes {FUNCTIONS[name]} argument(s), got {len(args)}",
                             tok.line, tok.col)
        return Call(name, tuple(args), pos=(tok.line, tok.col))


def parse_expression(src: str, variables: Optional[Iterable[str]] = None) -> Node:
    """Parse ``src``; ``variables`` restricts the admissible free names.

    Without ``variables`` the names t, x1, x2, ... and u1, u2, ... are accepted.
    """
    if variables is None:
        allowed = _DEFAULT_VAR.fullmatch
    else:
        names = frozenset(variables)
        allowed = names.__contains__
    return _Parser(src, allowed).parse()


# ---------------------------------------------------------------------------
# printing and inspection

def serialize(node: Node) -> str:
    """Fully parenthesized text that parses back to an equal tree."""
    if isinstance(node, Num):
        text = repr(node.value)
        return f"({text})" if node.value < 0 or text.startswith("-") else text
    if isinstance(node, (Var, Const)):
        return node.name
    if isinstance(node, Neg):
        return f"(-{serialize(node.arg)})"
    if isinstance(node, BinOp):
        return f"({serialize(node.left)} {node.op} {serialize(node.right)})"
    if isinstance(node, Call):
        return f"{node.name}({', '.join(serialize(a) for a in node.args)})"
    raise TypeError(f"not an expression node: {node!r}")


def free_variables(node: Node) -> set:
    if isinstance(node, Var):
        return {node.name}
    if isinstance(node, Neg):
        return free_variables(node.arg)
    if isinstance(node, BinOp):
        return free_variables(node.left) | free_variables(node.right)
    if isinstance(node, Call):
        return set().union(*(free_variables(a) for a in node.args))
    return set()


# ---------------------------------------------------------------------------
# evaluation

def _checked(x, what):
    if not math.isfinite(x):
        raise EvalDomain(f"{what} produced a non-finite value")
    return x


def _ln(x):
    if x <= 0:
        raise EvalDomain(f"ln of nonpositive value {x!r}")
    return math.log(x)


def _sqrt(x):
    if x < 0:
        raise EvalDomain(f"sqrt of negative value {x!r}")
    return math.sqrt(x)


def _pow(a, b):
    try:
        v = math.pow(a, b)
    except (ValueError, OverflowError):
        raise EvalDomain(f"{a!r}^{b!r} is undefined over the reals") from None
    return _checked(v, "power")


def _intpow(a, k):
    n = round(k)
    if abs(k - n) > INTPOW_TOL:
        raise EvalDomain(f"intpow exponent {k!r} is not an integer")
    if a == 0 and n < 0:
        raise EvalDomain("intpow of zero to a negative power")
    try:
        return _checked(float(a) ** int(n), "intpow")
    except OverflowError:
        raise EvalDomain("intpow overflow") from None


def _div(a, b):
    if b == 0:
        raise EvalDomain("division by zero")
    return a / b


def _exp(x):
    try:
        return math.exp(x)
    except OverflowError:
        raise EvalDomain("exp overflow") from None


def _sign(x):
    return float((x > 0) - (x < 0))


_IMPL = {
    "sin": math.sin, "cos": math.cos, "exp": _exp, "ln": _ln, "sqrt": _sqrt,
    "abs": abs, "sign": _sign, "pow": _pow, "intpow": _intpow,
}
_BIN_IMPL = {
    "+": lambda a, b: a + b,
    "-": lambda a, b: a - b,
    "*": lambda a, b: a * b,
    "/": _div,
    "^": _pow,
}


def compile_expression(node: Node) -> Callable[[dict], float]:
    """Return env -> value; raises EvalDomain outside the domain."""
    if isinstance(node, Num):
        v = node.value
        return lambda env: v
    if isinstance(node, Const):
        v = CONSTANTS[node.name]
        return lambda env: v
    if isinstance(node, Var):
        name = node.name

        def var(env):
            try:
                return float(env[name])
            except KeyError:
                raise EvalDomain(f"variable {name!r} is unbound") from None
        return var
    if isinstance(node, Neg):
        f = compile_expression(node.arg)
        return lambda env: -f(env)
    if isinstance(node, BinOp):
        f, g = compile_expression(node.left), compile_expression(node.right)
        op = _BIN_IMPL[node.op]
        return lambda env: _checked(op(f(env), g(env)), node.op)
    if isinstance(node, Call):
        fn = _IMPL[node.name]
        parts = [compile_expression(a) for a in node.args]
        if len(parts) == 1:
            (p,) = parts
            return lambda env: _checked(fn(p(env)), node.name)
        return lambda env: fn(*(p(env) for p in parts))
    raise TypeError(f"not an expression node: {node!r}")


def evaluate(node: Node, **env) -> float:
    return compile_expression(node)(env)
