"""A small closed expression language for problem data.

Expressions are built from numbers, the constant ``pi``, the variables
declared for the parse context (a subset of ``t``, ``x``, ``u``), the
operators ``+ - * / ^`` and a fixed set of functions::

    sin cos tan atan exp ln sqrt abs      (one argument)
    min max                               (two arguments)

``^`` binds tightest and is right-associative, then unary minus, then
``* /``, then ``+ -``.  So ``-t^2`` is ``-(t^2)`` and ``2^3^2`` is ``2^9``.

Evaluation works on floats or on numpy arrays (elementwise); domain
violations raise :class:`EvaluationError` instead of producing NaN.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Mapping, Union

import numpy as np

__all__ = [
    "Expr",
    "Const",
    "Var",
    "Neg",
    "BinOp",
    "Call",
    "ExprError",
    "ExprSyntaxError",
    "EvaluationError",
    "parse",
    "evaluate",
    "to_source",
    "free_variables",
    "VARIABLES",
    "FUNCTIONS",
]

VARIABLES = frozenset({"t", "x", "u"})
CONSTANTS = {"pi": math.pi}

# name -> arity
FUNCTIONS = {
    "sin": 1,
    "cos": 1,
    "tan": 1,
    "atan": 1,
    "exp": 1,
    "ln": 1,
    "sqrt": 1,
    "abs": 1,
    "min": 2,
    "max": 2,
}

Value = Union[float, np.ndarray]


class ExprError(ValueError):
    """Base class for parse and evaluation failures."""


class ExprSyntaxError(ExprError):
    """Malformed source text.  ``offset`` is the UTF-8 byte offset of the problem."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at byte {offset})")
        self.offset = offset


class EvaluationError(ExprError):
    """Domain violation or non-finite result during evaluation."""


@dataclass(frozen=True)
class Const:
    value: float


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Neg:
    operand: "Expr"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Call:
    name: str
    args: tuple


Expr = Union[Const, Var, Neg, BinOp, Call]


# --------------------------------------------------------------------------
# tokenizer

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[-+*/^(),])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class _Token:
    kind: str  # "num" | "name" | "op" | "end"
    text: str
    pos: int  # character index


def _tokenize(source: str) -> list[_Token]:
    tokens = []
    pos = 0
    while pos < len(source):
        m = _TOKEN_RE.match(source, pos)
        if m is None:
            raise ExprSyntaxError(
                f"unexpected character {source[pos]!r}", _byte_offset(source, pos)
            )
        kind = m.lastgroup
        if kind != "ws":
            tokens.append(_Token(kind, m.group(), pos))
        pos = m.end()
    tokens.append(_Token("end", "", len(source)))
    return tokens


def _byte_offset(source: str, pos: int) -> int:
    return len(source[:pos].encode("utf-8"))


# --------------------------------------------------------------------------
# parser


class _Parser:
    def __init__(self, source: str, variables: frozenset):
        self.source = source
        self.variables = variables
        self.tokens = _tokenize(source)
        self.i = 0

    @property
    def tok(self) -> _Token:
        return self.tokens[self.i]

    def error(self, message: str, tok: _Token | None = None):
        tok = tok or self.tok
        return ExprSyntaxError(message, _byte_offset(self.source, tok.pos))

    def accept(self, text: str) -> bool:
        if self.tok.kind == "op" and self.tok.text == text:
            self.i += 1
            return True
        return False

    def expect(self, text: str) -> None:
        if not self.accept(text):
            found = self.tok.text or "end of input"
            raise self.error(f"expected {text!r}, found {found!r}")

    def parse(self) -> Expr:
        if self.tok.kind == "end":
            raise self.error("empty expression")
        node = self.expr()
        if self.tok.kind != "end":
            raise self.error(f"unexpected token {self.tok.text!r}")
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
        base = self.primary()
        if self.accept("^"):
            # right-associative; the exponent may carry its own sign
            return BinOp("^", base, self.unary())
        return base

    def primary(self) -> Expr:
        tok = self.tok
        if tok.kind == "num":
            self.i += 1
            value = float(tok.text)
            if not math.isfinite(value):
                raise self.error(f"numeric literal {tok.text!r} overflows", tok)
            return Const(value)
        if tok.kind == "name":
            self.i += 1
            return self.named(tok)
        if self.accept("("):
            node = self.expr()
            self.expect(")")
            return node
        found = tok.text or "end of input"
        raise self.error(f"unexpected token {found!r}")

    def named(self, tok: _Token) -> Expr:
        name = tok.text
        if name in FUNCTIONS:
            if not (self.tok.kind == "op" and self.tok.text == "("):
                raise self.error(f"function {name!r} must be called with arguments", tok)
            self.i += 1
            args = [self.expr()]
            while self.accept(","):
                args.append(self.expr())
            self.expect(")")
            arity = FUNCTIONS[name]
            if len(args) != arity:
                raise self.error(
                    f"function {name!r} takes {arity} argument(s), got {len(args)}", tok
                )
            return Call(name, tuple(args))
        if name in CONSTANTS:
            return Const(CONSTANTS[name])
        if name in VARIABLES:
            if name not in self.variables:
                allowed = ", ".join(sorted(self.variables)) or "none"
                raise self.error(
                    f"variable {name!r} not allowed here (allowed: {allowed})", tok
                )
            return Var(name)
        raise self.error(f"unknown identifier {name!r}", tok)


def parse(source: str, variables) -> Expr:
    """Parse ``source`` into an expression tree over ``variables``.

    ``variables`` is any iterable of names drawn from ``t``, ``x``, ``u``.
    Raises :class:`ExprSyntaxError` on malformed text, unknown names,
    wrong function arity or a variable outside the declared set.
    """
    if isinstance(source, bytes):
        source = source.decode("utf-8")
    variables = frozenset(variables)
    extra = variables - VARIABLES
    if extra:
        raise ValueError(f"unsupported variable names: {sorted(extra)}")
    return _Parser(source, variables).parse()


# --------------------------------------------------------------------------
# evaluation


def _check(ok, message: str) -> None:
    if not np.all(ok):
        raise EvaluationError(message)


def _call(name: str, args: list) -> Value:
    a = args[0]
    if name == "ln":
        _check(a > 0, "ln of a non-positive value")
        return np.log(a)
    if name == "sqrt":
        _check(a >= 0, "sqrt of a negative value")
        return np.sqrt(a)
    if name == "min":
        return np.minimum(a, args[1])
    if name == "max":
        return np.maximum(a, args[1])
    return _UNARY[name](a)


_UNARY = {
    "sin": np.sin,
    "cos": np.cos,
    "tan": np.tan,
    "atan": np.arctan,
    "exp": np.exp,
    "abs": np.abs,
}


def _power(base, expo) -> Value:
    base = np.asarray(base, dtype=float)
    expo = np.asarray(expo, dtype=float)
    integral = expo == np.round(expo)
    _check((base >= 0) | integral, "negative base raised to a non-integer power")
    _check((base != 0) | (expo >= 0), "zero raised to a negative power")
    return np.power(base, expo)


def _eval(e: Expr, env: Mapping[str, Value]) -> Value:
    if isinstance(e, Const):
        return e.value
    if isinstance(e, Var):
        try:
            return env[e.name]
        except KeyError:
            raise EvaluationError(f"no binding for variable {e.name!r}") from None
    if isinstance(e, Neg):
        return -_eval(e.operand, env)
    if isinstance(e, BinOp):
        a = _eval(e.left, env)
        b = _eval(e.right, env)
        if e.op == "+":
            return np.add(a, b)
        if e.op == "-":
            return np.subtract(a, b)
        if e.op == "*":
            return np.multiply(a, b)
        if e.op == "/":
            _check(np.asarray(b) != 0, "division by zero")
            return np.divide(a, b)
        return _power(a, b)
    if isinstance(e, Call):
        return _call(e.name, [_eval(arg, env) for arg in e.args])
    raise TypeError(f"not an expression node: {e!r}")


def evaluate(e: Expr, bindings: Mapping[str, Value]) -> Value:
    """Evaluate ``e`` with variables bound to floats or numpy arrays.

    Returns a float when every binding is scalar, otherwise an array
    broadcast over the bindings.
    """
    env = {k: (np.asarray(v, dtype=float) if np.ndim(v) else float(v))
           for k, v in bindings.items()}
    with np.errstate(all="ignore"):
        out = _eval(e, env)
    _check(np.isfinite(out), "non-finite result")
    if np.ndim(out) == 0:
        return float(out)
    shape = np.broadcast_shapes(*(np.shape(v) for v in env.values()), np.shape(out))
    return np.broadcast_to(np.asarray(out, dtype=float), shape).copy()


# --------------------------------------------------------------------------
# printing and inspection


def to_source(e: Expr) -> str:
    """Render ``e`` as source text that parses back to the same tree."""
    if isinstance(e, Const):
        if e.value == math.pi:
            return "pi"
        return repr(e.value)
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Neg):
        return f"(-{to_source(e.operand)})"
    if isinstance(e, BinOp):
        return f"({to_source(e.left)} {e.op} {to_source(e.right)})"
    if isinstance(e, Call):
        return f"{e.name}({', '.join(to_source(a) for a in e.args)})"
    raise TypeError(f"not an expression node: {e!r}")


def free_variables(e: Expr) -> frozenset:
    """Names of the variables that actually occur in ``e``."""
    if isinstance(e, Var):
        return frozenset({e.name})
    if isinstance(e, Neg):
        return free_variables(e.operand)
    if isinstance(e, BinOp):
        return free_variables(e.left) | free_variables(e.right)
    if isinstance(e, Call):
        return frozenset().union(*(free_variables(a) for a in e.args))
    return frozenset()
