"""A tiny arithmetic language for coefficient and forcing functions of t.

Grammar (no implicit multiplication, ^ is right associative and binds
tighter than unary minus, so -t^2 is -(t^2)):

    expr    := term (('+' | '-') term)*
    term    := factor (('*' | '/') factor)*
    factor  := '-' factor | power
    power   := primary ('^' factor)?
    primary := NUMBER | 't' | IDENT '(' expr ')' | 'pi' | 'e' | '(' expr ')'

Known functions: exp, sin, cos, tan, sqrt, ln, abs. The constants pi and e
fold to numbers at parse time. Parse errors carry the byte offset of the
offending token and the set of token kinds that were expected there.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Union

FUNCTIONS = {
    "exp": math.exp,
    "sin": math.sin,
    "cos": math.cos,
    "tan": math.tan,
    "sqrt": math.sqrt,
    "ln": math.log,
    "abs": abs,
}

CONSTANTS = {"pi": math.pi, "e": math.e}

_TOKEN_RE = re.compile(
    r"""
    (?P<NUMBER>(\d+(\.\d*)?|\.\d+)([eE][+-]?\d+)?)
  | (?P<IDENT>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<OP>[-+*/^()])
  | (?P<WS>\s+)
  | (?P<BAD>.)
    """,
    re.VERBOSE,
)


class ParseError(ValueError):
    """Source text does not match the grammar; ``offset`` is 0-based."""

    def __init__(self, message: str, offset: int, expected: frozenset[str] = frozenset()):
        self.offset = offset
        self.expected = expected
        detail = f"{message} at offset {offset}"
        if expected:
            detail += f" (expected {', '.join(sorted(expected))})"
        super().__init__(detail)


class UnknownIdentifierError(ParseError):
    """An identifier that is not t, a known function, or a constant."""

    def __init__(self, name: str, offset: int):
        self.name = name
        super().__init__(f"unknown identifier {name!r}", offset)


class EvalError(ArithmeticError):
    """Evaluation hit a domain error, overflow, or non-finite value."""


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    """The independent variable t."""


@dataclass(frozen=True)
class Neg:
    arg: "Expr"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Call:
    fn: str
    arg: "Expr"


Expr = Union[Num, Var, Neg, BinOp, Call]


@dataclass(frozen=True)
class _Token:
    kind: str  # NUMBER, IDENT, one of + - * / ^ ( ), or END
    text: str
    offset: int


def _tokenize(src: str) -> list[_Token]:
    tokens = []
    for match in _TOKEN_RE.finditer(src):
        kind = match.lastgroup
        if kind == "WS":
            continue
        if kind == "BAD":
            raise ParseError(f"unexpected character {match.group()!r}", match.start())
        text = match.group()
        tokens.append(_Token(text if kind == "OP" else kind, text, match.start()))
    tokens.append(_Token("END", "", len(src)))
    return tokens


class _Parser:
    def __init__(self, tokens: list[_Token]):
        self.tokens = tokens
        self.pos = 0

    @property
    def current(self) -> _Token:
        return self.tokens[self.pos]

    def advance(self) -> _Token:
        token = self.tokens[self.pos]
        self.pos += 1
        return token

    def expect(self, kind: str) -> _Token:
        if self.current.kind != kind:
            raise ParseError(
                f"unexpected token {self.current.text or 'end of input'!r}",
                self.current.offset,
                frozenset({kind}),
            )
        return self.advance()

    def parse_expr(self) -> Expr:
        node = self.parse_term()
        while self.current.kind in ("+", "-"):
            op = self.advance().kind
            node = BinOp(op, node, self.parse_term())
        return node

    def parse_term(self) -> Expr:
        node = self.parse_factor()
        while self.current.kind in ("*", "/"):
            op = self.advance().kind
            node = BinOp(op, node, self.parse_factor())
        return node

    def parse_factor(self) -> Expr:
        if self.current.kind == "-":
            self.advance()
            return Neg(self.parse_factor())
        return self.parse_power()

    def parse_power(self) -> Expr:
        base = self.parse_primary()
        if self.current.kind == "^":
            self.advance()
            return BinOp("^", base, self.parse_factor())
        return base

    def parse_primary(self) -> Expr:
        token = self.current
        if token.kind == "NUMBER":
            self.advance()
            return Num(float(token.text))
        if token.kind == "IDENT":
            self.advance()
            if token.text == "t":
                return Var()
            if token.text in CONSTANTS:
                return Num(CONSTANTS[token.text])
            if token.text in FUNCTIONS:
                self.expect("(")
                arg = self.parse_expr()
                self.expect(")")
                return Call(token.text, arg)
            raise UnknownIdentifierError(token.text, token.offset)
        if token.kind == "(":
            self.advance()
            node = self.parse_expr()
            self.expect(")")
            return node
        raise ParseError(
            f"unexpected token {token.text or 'end of input'!r}",
            token.offset,
            frozenset({"NUMBER", "IDENT", "(", "-"}),
        )


def parse(src: str) -> Expr:
    """Parse ``src`` into an expression tree, or raise :class:`ParseError`."""
    parser = _Parser(_tokenize(src))
    node = parser.parse_expr()
    if parser.current.kind != "END":
        raise ParseError(
            f"trailing input {parser.current.text!r}",
            parser.current.offset,
            frozenset({"END"}),
        )
    return node


def evaluate(expr: Expr, t: float) -> float:
    """Evaluate the tree at the given t; non-finite results raise EvalError."""
    value = _eval(expr, t)
    if not math.isfinite(value):
        raise EvalError(f"expression evaluated to a non-finite value at t={t}")
    return value


def _eval(expr: Expr, t: float) -> float:
    if isinstance(expr, Num):
        return expr.value
    if isinstance(expr, Var):
        return float(t)
    if isinstance(expr, Neg):
        return -_eval(expr.arg, t)
    if isinstance(expr, BinOp):
        left = _eval(expr.left, t)
        right = _eval(expr.right, t)
        if expr.op == "+":
            return left + right
        if expr.op == "-":
            return left - right
        if expr.op == "*":
            return left * right
        if expr.op == "/":
            if right == 0.0:
                raise EvalError(f"division by zero at t={t}")
            return left / right
        try:
            return math.pow(left, right)
        except (ValueError, OverflowError) as exc:
            raise EvalError(f"cannot raise {left} to power {right} at t={t}") from exc
    fn = FUNCTIONS[expr.fn]
    arg = _eval(expr.arg, t)
    try:
        return float(fn(arg))
    except (ValueError, OverflowError) as exc:
        raise EvalError(f"{expr.fn}({arg}) is undefined at t={t}") from exc


_PREC_ADD, _PREC_MUL, _PREC_NEG, _PREC_POW, _PREC_ATOM = 1, 2, 3, 4, 5


def _precedence(expr: Expr) -> int:
    if isinstance(expr, (Num, Var, Call)):
        return _PREC_ATOM
    if isinstance(expr, Neg):
        return _PREC_NEG
    if expr.op in ("+", "-"):
        return _PREC_ADD
    if expr.op in ("*", "/"):
        return _PREC_MUL
    return _PREC_POW


def _wrap(expr: Expr, minimum: int) -> str:
    text = to_source(expr)
    return f"({text})" if _precedence(expr) < minimum else text


def to_source(expr: Expr) -> str:
    """Render the tree back to source that reparses to an equal tree."""
    if isinstance(expr, Num):
        return repr(expr.value)
    if isinstance(expr, Var):
        return "t"
    if isinstance(expr, Call):
        return f"{expr.fn}({to_source(expr.arg)})"
    if isinstance(expr, Neg):
        return f"-{_wrap(expr.arg, _PREC_NEG)}"
    if expr.op == "^":
        # Left operand must be an atom; right side may be any factor.
        return f"{_wrap(expr.left, _PREC_ATOM)}^{_wrap(expr.right, _PREC_NEG)}"
    prec = _precedence(expr)
    left = _wrap(expr.left, prec)
    # Left associativity: a - (b - c) needs the parentheses kept.
    right = _wrap(expr.right, prec + 1)
    return f"{left} {expr.op} {right}"
