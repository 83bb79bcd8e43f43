"""A small arithmetic language for operators and kernels.

Grammar (lowest to highest precedence)::

    expr  := cond | sum
    cond  := "if" sum CMP sum "then" expr "else" expr
    sum   := prod (("+" | "-") prod)*
    prod  := unary (("*" | "/") unary)*
    unary := "-" unary | pow
    pow   := atom ("^" unary)?
    atom  := NUMBER | IDENT | IDENT "(" expr ("," expr)* ")" | "(" expr ")"
    CMP   := "<" | "<=" | ">" | ">=" | "=="

``^`` is right-associative and binds tighter than unary minus, so ``-2^2``
is ``-(2^2)``. Functions: ``exp``, ``abs`` (one argument), ``min``, ``max``
(two arguments).
"""
from __future__ import annotations

import math
import operator
import re
from dataclasses import dataclass
from typing import Mapping, Union

import numpy as np

from .errors import DomainError, ExprSyntaxError, NonFiniteError, UnboundVariableError

KEYWORDS = ("if", "then", "else")
COMPARISONS = ("<", "<=", ">", ">=", "==")
FUNCTIONS = {"exp": 1, "abs": 1, "min": 2, "max": 2}


@dataclass(frozen=True)
class Token:
    kind: str  # number | ident | keyword | op | lparen | rparen | comma | end
    lexeme: str
    position: int


_TOKEN_RE = re.compile(r"""
    (?P<ws>\s+)
  | (?P<number>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op><=|>=|==|[-+*/^<>])
  | (?P<lparen>\()
  | (?P<rparen>\))
  | (?P<comma>,)
""", re.VERBOSE)


def tokenize(source: str) -> list[Token]:
    tokens = []
    pos = 0
    byte_pos = 0
    while pos < len(source):
        m = _TOKEN_RE.match(source, pos)
        if m is None:
            raise ExprSyntaxError(f"illegal character {source[pos]!r}", byte_pos)
        kind = m.lastgroup
        text = m.group()
        if kind != "ws":
            if kind == "ident" and text in KEYWORDS:
                kind = "keyword"
            tokens.append(Token(kind, text, byte_pos))
        pos = m.end()
        byte_pos += len(text.encode("utf-8"))
    return tokens


# -- tree ---------------------------------------------------------------------

@dataclass(frozen=True)
class Num:
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
    fn: str
    args: tuple


@dataclass(frozen=True)
class Cond:
    cmp: str
    lhs: "Expr"
    rhs: "Expr"
    then: "Expr"
    orelse: "Expr"


Expr = Union[Num, Var, Neg, BinOp, Call, Cond]


class _Parser:
    def __init__(self, tokens, source_len):
        self.tokens = list(tokens)
        self.i = 0
        self.end = Token("end", "", source_len)

    def peek(self) -> Token:
        return self.tokens[self.i] if self.i < len(self.tokens) else self.end

    def advance(self) -> Token:
        tok = self.peek()
        self.i += 1
        return tok

    def expect(self, kind, lexeme=None) -> Token:
        tok = self.peek()
        if tok.kind != kind or (lexeme is not None and tok.lexeme != lexeme):
            want = lexeme or kind
            got = "end of input" if tok.kind == "end" else repr(tok.lexeme)
            raise ExprSyntaxError(f"expected {want}, got {got}", tok.position)
        return self.advance()

    def at(self, kind, *lexemes) -> bool:
        tok = self.peek()
        return tok.kind == kind and (not lexemes or tok.lexeme in lexemes)

    def parse(self) -> Expr:
        node = self.expr()
        tok = self.peek()
        if tok.kind != "end":
            raise ExprSyntaxError(f"unexpected {tok.lexeme!r}", tok.position)
        return node

    def expr(self) -> Expr:
        if self.at("keyword", "if"):
            return self.cond()
        return self.sum()

    def cond(self) -> Expr:
        self.expect("keyword", "if")
        lhs = self.sum()
        tok = self.peek()
        if not (tok.kind == "op" and tok.lexeme in COMPARISONS):
            raise ExprSyntaxError("expected comparison operator", tok.position)
        self.advance()
        rhs = self.sum()
        self.expect("keyword", "then")
        then = self.expr()
        self.expect("keyword", "else")
        orelse = self.expr()
        return Cond(tok.lexeme, lhs, rhs, then, orelse)

    def sum(self) -> Expr:
        node = self.prod()
        while self.at("op", "+", "-"):
            op = self.advance().lexeme
            node = BinOp(op, node, self.prod())
        return node

    def prod(self) -> Expr:
        node = self.unary()
        while self.at("op", "*", "/"):
            op = self.advance().lexeme
            node = BinOp(op, node, self.unary())
        return node

    def unary(self) -> Expr:
        if self.at("op", "-"):
            self.advance()
            return Neg(self.unary())
        return self.pow()

    def pow(self) -> Expr:
        base = self.atom()
        if self.at("op", "^"):
            self.advance()
            return BinOp("^", base, self.unary())
        return base

    def atom(self) -> Expr:
        tok = self.peek()
        if tok.kind == "number":
            self.advance()
            return Num(float(tok.lexeme))
        if tok.kind == "ident":
            self.advance()
            if not self.at("lparen"):
                return Var(tok.lexeme)
            if tok.lexeme not in FUNCTIONS:
                raise ExprSyntaxError(f"unknown function {tok.lexeme!r}", tok.position)
            self.advance()
            args = [self.expr()]
            while self.at("comma"):
                self.advance()
                args.append(self.expr())
            self.expect("rparen")
            if len(args) != FUNCTIONS[tok.lexeme]:
                raise ExprSyntaxError(
                    f"{tok.lexeme} takes {FUNCTIONS[tok.lexeme]} argument(s), got {len(args)}",
                    tok.position)
            return Call(tok.lexeme, tuple(args))
        if tok.kind == "lparen":
            self.advance()
            node = self.expr()
            self.expect("rparen")
            return node
        got = "end of input" if tok.kind == "end" else repr(tok.lexeme)
        raise ExprSyntaxError(f"unexpected {got}", tok.position)


def parse(tokens, source_len: int | None = None) -> Expr:
    """Parse a token list. ``source_len`` only improves end-of-input diagnostics."""
    tokens = list(tokens)
    if source_len is None:
        source_len = tokens[-1].position + len(tokens[-1].lexeme.encode()) if tokens else 0
    return _Parser(tokens, source_len).parse()


def compile_expr(source: str) -> Expr:
    return parse(tokenize(source), len(source.encode("utf-8")))


# -- scalar evaluation ----------------------------------------------------------

_CMP = {"<": operator.lt, "<=": operator.le, ">": operator.gt,
        ">=": operator.ge, "==": operator.eq}


def _power(base: float, exp: float) -> float:
    if base == 0.0 and exp < 0:
        raise DomainError("0 raised to a negative power")
    if base < 0 and not float(exp).is_integer():
        raise DomainError(f"negative base {base} with non-integer exponent {exp}")
    try:
        return math.pow(base, exp)
    except OverflowError as exc:
        raise NonFiniteError(f"{base}^{exp} overflows") from exc


def _eval(e: Expr, env: Mapping[str, float]) -> float:
    if isinstance(e, Num):
        return e.value
    if isinstance(e, Var):
        try:
            return env[e.name]
        except KeyError:
            raise UnboundVariableError(f"unbound variable {e.name!r}") from None
    if isinstance(e, Neg):
        return -_eval(e.operand, env)
    if isinstance(e, BinOp):
        a = _eval(e.left, env)
        b = _eval(e.right, env)
        if e.op == "+":
            r = a + b
        elif e.op == "-":
            r = a - b
        elif e.op == "*":
            r = a * b
        elif e.op == "/":
            if b == 0.0:
                raise DomainError("division by zero")
            r = a / b
        else:
            r = _power(a, b)
        if not math.isfinite(r):
            raise NonFiniteError(f"non-finite result of {e.op}")
        return r
    if isinstance(e, Call):
        args = [_eval(a, env) for a in e.args]
        if e.fn == "exp":
            try:
                return math.exp(args[0])
            except OverflowError as exc:
                raise NonFiniteError("exp overflows") from exc
        if e.fn == "abs":
            return abs(args[0])
        if e.fn == "min":
            return min(args)
        return max(args)
    if isinstance(e, Cond):
        taken = _CMP[e.cmp](_eval(e.lhs, env), _eval(e.rhs, env))
        return _eval(e.then if taken else e.orelse, env)
    raise TypeError(f"not an expression node: {e!r}")


def evaluate(e: Expr, env: Mapping[str, float]) -> float:
    """Evaluate ``e`` with real arithmetic; only the taken branch of a conditional runs."""
    return float(_eval(e, env))


# -- vectorised evaluation ------------------------------------------------------

def _veval(e: Expr, env):
    if isinstance(e, Num):
        return e.value
    if isinstance(e, Var):
        try:
            return env[e.name]
        except KeyError:
            raise UnboundVariableError(f"unbound variable {e.name!r}") from None
    if isinstance(e, Neg):
        return -_veval(e.operand, env)
    if isinstance(e, BinOp):
        a = _veval(e.left, env)
        b = _veval(e.right, env)
        if e.op == "+":
            return a + b
        if e.op == "-":
            return a - b
        if e.op == "*":
            return a * b
        if e.op == "/":
            return np.divide(a, b)
        a, b = np.asarray(a, float), np.asarray(b, float)
        bad = ((a < 0) & (b != np.round(b))) | ((a == 0) & (b < 0))
        return np.where(bad, np.nan, np.power(np.abs(a), b) * np.where(
            (a < 0) & (np.mod(b, 2) == 1), -1.0, 1.0))
    if isinstance(e, Call):
        args = [_veval(a, env) for a in e.args]
        if e.fn == "exp":
            return np.exp(args[0])
        if e.fn == "abs":
            return np.abs(args[0])
        if e.fn == "min":
            return np.minimum(*args)
        return np.maximum(*args)
    if isinstance(e, Cond):
        taken = _CMP[e.cmp](_veval(e.lhs, env), _veval(e.rhs, env))
        return np.where(taken, _veval(e.then, env), _veval(e.orelse, env))
    raise TypeError(f"not an expression node: {e!r}")


def evaluate_array(e: Expr, env: Mapping[str, object], strict: bool = True) -> np.ndarray:
    """Elementwise evaluation over broadcastable numpy arrays.

    The result has the broadcast shape of the bound arrays, even when the
    expression does not mention them. Both branches of a conditional are computed and the untaken one discarded,
    so domain failures surface only as non-finite entries of the result. With
    ``strict`` a non-finite entry raises :class:`NonFiniteError`; otherwise the
    caller decides which entries matter.
    """
    with np.errstate(all="ignore"):
        out = np.asarray(_veval(e, env), dtype=float)
        shape = np.broadcast_shapes(*(np.shape(v) for v in env.values()), out.shape)
        out = np.broadcast_to(out, shape).copy()
    if strict and not np.all(np.isfinite(out)):
        raise NonFiniteError("non-finite value in vectorised evaluation")
    return out


# -- inspection -----------------------------------------------------------------

def free_vars(e: Expr) -> set[str]:
    if isinstance(e, Num):
        return set()
    if isinstance(e, Var):
        return {e.name}
    if isinstance(e, Neg):
        return free_vars(e.operand)
    if isinstance(e, BinOp):
        return free_vars(e.left) | free_vars(e.right)
    if isinstance(e, Call):
        return set().union(*(free_vars(a) for a in e.args))
    return (free_vars(e.lhs) | free_vars(e.rhs)
            | free_vars(e.then) | free_vars(e.orelse))


def to_source(e: Expr) -> str:
    """Fully parenthesised rendering that parses back to the same tree."""
    if isinstance(e, Num):
        return repr(e.value)
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Neg):
        return f"(-{to_source(e.operand)})"
    if isinstance(e, BinOp):
        return f"({to_source(e.left)} {e.op} {to_source(e.right)})"
    if isinstance(e, Call):
        return f"{e.fn}({', '.join(to_source(a) for a in e.args)})"
    return (f"(if {to_source(e.lhs)} {e.cmp} {to_source(e.rhs)} "
            f"then {to_source(e.then)} else {to_source(e.orelse)})")


def branch_points(e: Expr, var: str) -> list[float]:
    """Constants that ``var`` is compared against in conditionals of ``e``.

    These are where a piecewise definition switches branch, so samplers probe
    them directly.
    """
    found = set()

    def visit(node):
        if isinstance(node, Cond):
            for side, other in ((node.lhs, node.rhs), (node.rhs, node.lhs)):
                if side == Var(var) and not free_vars(other):
                    try:
                        found.add(evaluate(other, {}))
                    except DomainError:
                        pass
            for child in (node.lhs, node.rhs, node.then, node.orelse):
                visit(child)
        elif isinstance(node, Neg):
            visit(node.operand)
        elif isinstance(node, BinOp):
            visit(node.left)
            visit(node.right)
        elif isinstance(node, Call):
            for a in node.args:
                visit(a)

    visit(e)
    return sorted(found)
