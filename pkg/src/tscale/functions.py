"""Real-valued functions on a time scale.

Three backings are supported:

* :class:`ExprFunction` - an expression in ``t``, compiled for the kernels;
* :class:`TableFunction` - values at isolated points plus one expression per
  dense segment (tables are never interpolated across a segment);
* :class:`CallableFunction` - any Python ``float -> float`` callable.

Arithmetic between functions keeps the expression form whenever possible so
that dense-segment quadrature of products and squares stays in compiled code.
"""

from __future__ import annotations

import bisect
import math
from typing import Callable, Iterable, Mapping

from . import kernels
from .errors import DenseTableError, EvaluationError, MissingTableValue
from .expr import FUNCTIONS, Bin, Call, Expr, Neg, Num, _binary, _unary, parse_expression, to_text
from .timescale import snap_tolerance


class ScaleFunction:
    """Base class; subclasses implement ``__call__`` and ``dense_expr``."""

    def __call__(self, t: float) -> float:
        raise NotImplementedError

    def dense_expr(self, lo: float, hi: float) -> Expr | None:
        """Expression valid on the dense piece [lo, hi], or None for opaque callables."""
        return None

    def segment_program(self, lo: float, hi: float):
        expr = self.dense_expr(lo, hi)
        return None if expr is None else kernels.program_for(expr)

    # arithmetic

    def __add__(self, other):
        return combine("+", self, other)

    def __radd__(self, other):
        return combine("+", other, self)

    def __sub__(self, other):
        return combine("-", self, other)

    def __rsub__(self, other):
        return combine("-", other, self)

    def __mul__(self, other):
        return combine("*", self, other)

    def __rmul__(self, other):
        return combine("*", other, self)

    def __truediv__(self, other):
        return combine("/", self, other)

    def __neg__(self):
        return self.map("neg")

    def square(self) -> "ScaleFunction":
        return combine("*", self, self)

    def map(self, name: str) -> "ScaleFunction":
        """Apply a unary function (``neg`` or one of the expression calls)."""
        if name != "neg" and name not in FUNCTIONS:
            raise ValueError(f"unknown unary function {name!r}")
        return _map(name, self)


class ExprFunction(ScaleFunction):
    def __init__(self, expr: Expr | str):
        self.expr = parse_expression(expr) if isinstance(expr, str) else expr
        self._program = kernels.program_for(self.expr)

    def __call__(self, t):
        return self._program.eval(float(t))

    def dense_expr(self, lo, hi):
        return self.expr

    def segment_program(self, lo, hi):
        return self._program

    def __repr__(self):
        return f"ExprFunction({to_text(self.expr)!r})"


class TableFunction(ScaleFunction):
    """Values at isolated points plus an expression for each dense segment."""

    def __init__(self, values: Mapping[float, float], pieces: Iterable[tuple[float, float, Expr | str]] = ()):
        self.values = {float(k): float(v) for k, v in values.items()}
        self._keys = sorted(self.values)
        self.pieces = tuple(
            (float(lo), float(hi), parse_expression(e) if isinstance(e, str) else e) for lo, hi, e in pieces
        )
        self._piece_programs = [(lo, hi, kernels.program_for(e)) for lo, hi, e in self.pieces]

    def _piece_at(self, t):
        for lo, hi, prog in self._piece_programs:
            if lo <= t <= hi:
                return prog
        return None

    def __call__(self, t):
        t = float(t)
        if self.pieces:
            prog = self._piece_at(t)
            if prog is not None:
                return prog.eval(t)
        v = self.values.get(t)
        if v is not None:
            return v
        i = bisect.bisect_left(self._keys, t)
        for j in (i - 1, i):
            if 0 <= j < len(self._keys) and abs(self._keys[j] - t) <= snap_tolerance(t):
                return self.values[self._keys[j]]
        raise MissingTableValue(t, f"no table value at t={t!r}")

    def dense_expr(self, lo, hi):
        for plo, phi, expr in self.pieces:
            if plo <= lo and hi <= phi:
                return expr
        raise DenseTableError(f"table function has no expression for dense segment [{lo!r}, {hi!r}]")

    def __repr__(self):
        return f"TableFunction({len(self.values)} values, {len(self.pieces)} pieces)"


class CallableFunction(ScaleFunction):
    def __init__(self, fn: Callable[[float], float], name: str | None = None):
        self.fn = fn
        self.name = name or getattr(fn, "__name__", "callable")

    def __call__(self, t):
        try:
            v = float(self.fn(t))
        except (ValueError, ZeroDivisionError, OverflowError) as exc:
            raise EvaluationError(t, f"evaluation failed at t={t!r}: {exc}") from None
        if not math.isfinite(v):
            raise EvaluationError(t, f"non-finite value at t={t!r}")
        return v

    def __repr__(self):
        return f"CallableFunction({self.name})"


def constant(c: float) -> ExprFunction:
    return ExprFunction(Num(float(c)))


def as_function(obj) -> ScaleFunction:
    """Coerce numbers, expression text, Expr trees, mappings and callables."""
    if isinstance(obj, ScaleFunction):
        return obj
    if isinstance(obj, (int, float)):
        return constant(obj)
    if isinstance(obj, (str, Expr)):
        return ExprFunction(obj)
    if isinstance(obj, Mapping):
        return TableFunction(obj)
    if callable(obj):
        return CallableFunction(obj)
    raise TypeError(f"cannot build a scale function from {type(obj).__name__}")


def _table_parts(*fs):
    keys = set()
    pieces = None
    for f in fs:
        if isinstance(f, TableFunction):
            keys.update(f.values)
            if pieces is None:
                pieces = [(lo, hi) for lo, hi, _ in f.pieces]
    return sorted(keys), pieces or []


def _checked(t, op, *args):
    try:
        v = op(*args)
    except (ValueError, ZeroDivisionError, OverflowError) as exc:
        raise EvaluationError(t, f"evaluation failed at t={t!r}: {exc}") from None
    if not math.isfinite(v):
        raise EvaluationError(t, f"non-finite value at t={t!r}")
    return v


def combine(op: str, f, g) -> ScaleFunction:
    f, g = as_function(f), as_function(g)
    if isinstance(f, ExprFunction) and isinstance(g, ExprFunction):
        return ExprFunction(Bin(op, f.expr, g.expr))
    if isinstance(f, CallableFunction) or isinstance(g, CallableFunction):
        return CallableFunction(lambda t: _binary(op, f(t), g(t)), f"({f!r} {op} {g!r})")
    keys, pieces = _table_parts(f, g)
    values = {k: _checked(k, _binary, op, f(k), g(k)) for k in keys}
    return TableFunction(values, [(lo, hi, Bin(op, f.dense_expr(lo, hi), g.dense_expr(lo, hi))) for lo, hi in pieces])


def _apply_unary(name, x):
    return -x if name == "neg" else _unary(name, x)


def _wrap_unary(name, expr):
    return Neg(expr) if name == "neg" else Call(name, expr)


def _map(name, f):
    if isinstance(f, ExprFunction):
        return ExprFunction(_wrap_unary(name, f.expr))
    if isinstance(f, CallableFunction):
        return CallableFunction(lambda t: _apply_unary(name, f(t)), f"{name}({f!r})")
    values = {k: _checked(k, _apply_unary, name, v) for k, v in f.values.items()}
    return TableFunction(values, [(lo, hi, _wrap_unary(name, e)) for lo, hi, e in f.pieces])
