"""Expression language for functions of ``t``.

Grammar (``^`` binds tighter than unary minus, and is right-associative)::

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := '-' unary | power
    power  := atom ('^' unary)?
    atom   := number | 't' | 'pi' | 'e' | name '(' expr ')' | '(' expr ')'

Expressions compile to a flat postfix program (see ``OPCODES``) that both
kernel backends execute.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from functools import lru_cache

from .errors import EvaluationError, ExprSyntaxError, UnknownIdentifier

FUNCTIONS = ("sin", "cos", "exp", "log", "abs", "sqrt")
CONSTANTS = {"pi": math.pi, "e": math.e}

OPCODES = {
    "const": 0, "t": 1, "+": 2, "-": 3, "*": 4, "/": 5, "^": 6, "neg": 7,
    "sin": 8, "cos": 9, "exp": 10, "log": 11, "abs": 12, "sqrt": 13,
}

# binding strength used by the printer
_PREC_ADD, _PREC_MUL, _PREC_UNARY, _PREC_POW, _PREC_ATOM = 1, 2, 3, 4, 5


class Expr:
    __slots__ = ()

    def evaluate(self, t: float) -> float:
        """Tree-walking evaluation; raises EvaluationError on domain failures."""
        try:
            value = self._eval(float(t))
        except (ValueError, ZeroDivisionError, OverflowError) as exc:
            raise EvaluationError(t, f"evaluation failed at t={t!r}: {exc}") from None
        return value

    def __str__(self):
        return to_text(self)


@dataclass(frozen=True, slots=True)
class Num(Expr):
    value: float

    def _eval(self, t):
        return self.value


@dataclass(frozen=True, slots=True)
class Var(Expr):
    def _eval(self, t):
        return t


@dataclass(frozen=True, slots=True)
class Const(Expr):
    name: str

    def _eval(self, t):
        return CONSTANTS[self.name]


@dataclass(frozen=True, slots=True)
class Neg(Expr):
    operand: Expr

    def _eval(self, t):
        return _finite(-self.operand._eval(t))


@dataclass(frozen=True, slots=True)
class Bin(Expr):
    op: str
    left: Expr
    right: Expr

    def _eval(self, t):
        x, y = self.left._eval(t), self.right._eval(t)
        return _finite(_binary(self.op, x, y))


@dataclass(frozen=True, slots=True)
class Call(Expr):
    name: str
    arg: Expr

    def _eval(self, t):
        return _finite(_unary(self.name, self.arg._eval(t)))


T = Var()


def _finite(x):
    if not math.isfinite(x):
        raise ValueError("non-finite intermediate value")
    return x


def _binary(op, x, y):
    if op == "+":
        return x + y
    if op == "-":
        return x - y
    if op == "*":
        return x * y
    if op == "/":
        return x / y
    return math.pow(x, y)


def _unary(name, x):
    if name == "sin":
        return math.sin(x)
    if name == "cos":
        return math.cos(x)
    if name == "exp":
        return math.exp(x)
    if name == "log":
        if x <= 0:
            raise ValueError("log of a non-positive value")
        return math.log(x)
    if name == "abs":
        return abs(x)
    if x < 0:
        raise ValueError("sqrt of a negative value")
    return math.sqrt(x)


# ---------------------------------------------------------------- tokenizer

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<ident>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^()]))"
)
_ATOM_START = {"number", "identifier", "(", "-"}
_AFTER_OPERAND = {"+", "-", "*", "/", "^"}


@dataclass(frozen=True, slots=True)
class Token:
    kind: str  # "number" | "identifier" | an operator character | "end"
    text: str
    offset: int  # byte offset


def tokenize(text: str) -> list[Token]:
    tokens = []
    pos = 0
    byte_at = _byte_offsets(text)
    while True:
        while pos < len(text) and text[pos].isspace():
            pos += 1
        if pos >= len(text):
            tokens.append(Token("end", "", byte_at(len(text))))
            return tokens
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            expected = _AFTER_OPERAND | {"end", ")"} if tokens and tokens[-1].kind in ("number", "identifier", ")") else _ATOM_START
            raise ExprSyntaxError(byte_at(pos), expected, f"unexpected character {text[pos]!r} at byte {byte_at(pos)}")
        kind = m.lastgroup
        start = m.start(kind)
        lexeme = m.group(kind)
        tokens.append(Token({"num": "number", "ident": "identifier"}.get(kind, lexeme), lexeme, byte_at(start)))
        pos = m.end()


def _byte_offsets(text):
    if text.isascii():
        return lambda i: i
    prefix = [0]
    for ch in text:
        prefix.append(prefix[-1] + len(ch.encode("utf-8")))
    return lambda i: prefix[i]


# ---------------------------------------------------------------- parser

class _Parser:
    def __init__(self, text):
        self.tokens = tokenize(text)
        self.i = 0

    @property
    def tok(self):
        return self.tokens[self.i]

    def advance(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def fail(self, expected):
        raise ExprSyntaxError(self.tok.offset, expected)

    def parse(self):
        node = self.expr()
        if self.tok.kind != "end":
            self.fail(_AFTER_OPERAND | {"end"})
        return node

    def expr(self):
        node = self.term()
        while self.tok.kind in ("+", "-"):
            op = self.advance().kind
            node = Bin(op, node, self.term())
        return node

    def term(self):
        node = self.unary()
        while self.tok.kind in ("*", "/"):
            op = self.advance().kind
            node = Bin(op, node, self.unary())
        return node

    def unary(self):
        if self.tok.kind == "-":
            self.advance()
            return Neg(self.unary())
        return self.power()

    def power(self):
        base = self.atom()
        if self.tok.kind == "^":
            self.advance()
            return Bin("^", base, self.unary())
        return base

    def atom(self):
        tok = self.tok
        if tok.kind == "number":
            self.advance()
            return Num(float(tok.text))
        if tok.kind == "(":
            self.advance()
            node = self.expr()
            if self.tok.kind != ")":
                self.fail(_AFTER_OPERAND | {")"})
            self.advance()
            return node
        if tok.kind == "identifier":
            self.advance()
            name = tok.text
            if name in FUNCTIONS:
                if self.tok.kind != "(":
                    self.fail({"("})
                self.advance()
                arg = self.expr()
                if self.tok.kind != ")":
                    self.fail(_AFTER_OPERAND | {")"})
                self.advance()
                return Call(name, arg)
            if name == "t":
                return T
            if name in CONSTANTS:
                return Const(name)
            raise UnknownIdentifier(name, tok.offset)
        self.fail(_ATOM_START)


def parse_expression(text: str) -> Expr:
    """Parse ``text`` into an expression tree.

    Raises ExprSyntaxError (with byte offset and expected-token set) or
    UnknownIdentifier.
    """
    return _Parser(text).parse()


# ---------------------------------------------------------------- printer

def _prec(node):
    if isinstance(node, Bin):
        return {"+": _PREC_ADD, "-": _PREC_ADD, "*": _PREC_MUL, "/": _PREC_MUL, "^": _PREC_POW}[node.op]
    if isinstance(node, Neg):
        return _PREC_UNARY
    return _PREC_ATOM


def _format_number(x):
    if x.is_integer() and abs(x) < 1e16:
        return str(int(x))
    return repr(x)


def to_text(node: Expr) -> str:
    """Canonical text with the minimum parentheses that preserve the tree."""

    def wrap(child, needs):
        s = to_text(child)
        return f"({s})" if needs else s

    if isinstance(node, Num):
        if node.value < 0 or not math.isfinite(node.value):
            return f"({_format_number(node.value)})" if math.isfinite(node.value) else repr(node.value)
        return _format_number(node.value)
    if isinstance(node, Var):
        return "t"
    if isinstance(node, Const):
        return node.name
    if isinstance(node, Neg):
        return "-" + wrap(node.operand, _prec(node.operand) < _PREC_UNARY)
    if isinstance(node, Call):
        return f"{node.name}({to_text(node.arg)})"
    p = _prec(node)
    if node.op == "^":
        left = wrap(node.left, _prec(node.left) <= _PREC_POW)
        right = wrap(node.right, _prec(node.right) < _PREC_UNARY)
        return f"{left}^{right}"
    left = wrap(node.left, _prec(node.left) < p)
    right = wrap(node.right, _prec(node.right) <= p)
    return f"{left} {node.op} {right}"


# ---------------------------------------------------------------- compilation

def compile_expr(node: Expr) -> tuple[tuple[int, ...], tuple[float, ...], int]:
    """Postfix program: (opcodes, constants in order of use, max stack depth)."""
    ops, consts = [], []
    depth = 0
    max_depth = 0

    def emit(op, delta):
        nonlocal depth, max_depth
        ops.append(OPCODES[op])
        depth += delta
        max_depth = max(max_depth, depth)

    def walk(n):
        if isinstance(n, Num):
            consts.append(n.value)
            emit("const", 1)
        elif isinstance(n, Const):
            consts.append(CONSTANTS[n.name])
            emit("const", 1)
        elif isinstance(n, Var):
            emit("t", 1)
        elif isinstance(n, Neg):
            walk(n.operand)
            emit("neg", 0)
        elif isinstance(n, Call):
            walk(n.arg)
            emit(n.name, 0)
        else:
            walk(n.left)
            walk(n.right)
            emit(n.op, -1)

    walk(node)
    return tuple(ops), tuple(consts), max_depth


@lru_cache(maxsize=4096)
def cached_compile(node: Expr):
    return compile_expr(node)


def is_constant(node: Expr) -> bool:
    if isinstance(node, Var):
        return False
    if isinstance(node, (Num, Const)):
        return True
    if isinstance(node, Neg):
        return is_constant(node.operand)
    if isinstance(node, Call):
        return is_constant(node.arg)
    return is_constant(node.left) and is_constant(node.right)
