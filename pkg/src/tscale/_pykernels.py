"""Pure-Python kernels: postfix expression programs, adaptive Simpson, extremum search.

The generic ``simpson`` and ``extrema`` accept any float -> float callable and
are also used by the compiled backend for native Python functions. The
compiled backend mirrors these algorithms step for step.
"""

import math

import numpy as np

from .errors import EvaluationError, QuadratureNonConvergent

NAME = "python"

# quadrature never accepts a panel before this many bisections
MIN_LEVEL = 2
GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0
GOLDEN_ITERS = 80


def simpson(f, a, b, tol, max_depth):
    """Adaptive Simpson on [a, b] to absolute tolerance ``tol``.

    Returns ``(value, error_estimate)``; raises QuadratureNonConvergent when a
    panel still misses its tolerance share after ``max_depth`` bisections.
    """
    if a == b:
        return 0.0, 0.0
    fa, fm, fb = f(a), f(0.5 * (a + b)), f(b)
    whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    return _simpson_rec(f, a, b, fa, fm, fb, whole, tol, 0, max_depth)


def _simpson_rec(f, a, b, fa, fm, fb, whole, tol, level, max_depth):
    m = 0.5 * (a + b)
    lm = 0.5 * (a + m)
    rm = 0.5 * (m + b)
    flm, frm = f(lm), f(rm)
    left = (m - a) / 6.0 * (fa + 4.0 * flm + fm)
    right = (b - m) / 6.0 * (fm + 4.0 * frm + fb)
    delta = left + right - whole
    if level >= MIN_LEVEL and abs(delta) <= 15.0 * tol:
        return left + right + delta / 15.0, abs(delta) / 15.0
    if level >= max_depth or not (a < lm < m < rm < b):
        raise QuadratureNonConvergent(
            f"adaptive Simpson did not reach tolerance {tol:.3g} on [{a!r}, {b!r}] within {max_depth} levels"
        )
    lv, le = _simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, level + 1, max_depth)
    rv, re_ = _simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, level + 1, max_depth)
    return lv + rv, le + re_


def _golden(f, lo, hi, sign, best):
    # maximises sign*f on [lo, hi]; ``best`` is the incumbent sign*f value
    x1 = hi - GOLDEN * (hi - lo)
    x2 = lo + GOLDEN * (hi - lo)
    f1, f2 = sign * f(x1), sign * f(x2)
    for _ in range(GOLDEN_ITERS):
        if f1 > best:
            best = f1
        if f2 > best:
            best = f2
        if hi - lo <= 1e-15 * (1.0 + abs(lo) + abs(hi)):
            break
        if f1 < f2:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + GOLDEN * (hi - lo)
            f2 = sign * f(x2)
        else:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - GOLDEN * (hi - lo)
            f1 = sign * f(x1)
    return best


def grid(lo, hi, n):
    step = (hi - lo) / (n - 1)
    xs = [lo + i * step for i in range(n)]
    xs[-1] = hi
    return xs


def extrema(f, lo, hi, n):
    """(min, max) of f over [lo, hi]: an n-point grid, then golden-section
    polishing inside the grid cells around the best samples."""
    if lo == hi:
        v = f(lo)
        return v, v
    xs = grid(lo, hi, n)
    vals = [f(x) for x in xs]
    kmax = max(range(n), key=vals.__getitem__)
    kmin = min(range(n), key=vals.__getitem__)
    vmax = _golden(f, xs[max(kmax - 1, 0)], xs[min(kmax + 1, n - 1)], 1.0, vals[kmax])
    vmin = -_golden(f, xs[max(kmin - 1, 0)], xs[min(kmin + 1, n - 1)], -1.0, -vals[kmin])
    return vmin, vmax


def run_program(ops, consts, t):
    stack = []
    push = stack.append
    pop = stack.pop
    c = 0
    for op in ops:
        if op == 0:
            push(consts[c])
            c += 1
            continue
        if op == 1:
            push(t)
            continue
        if op <= 6:
            y = pop()
            x = pop()
            if op == 2:
                r = x + y
            elif op == 3:
                r = x - y
            elif op == 4:
                r = x * y
            elif op == 5:
                if y == 0.0:
                    raise EvaluationError(t, f"division by zero at t={t!r}")
                r = x / y
            else:
                try:
                    r = math.pow(x, y)
                except (ValueError, OverflowError, ZeroDivisionError):
                    raise EvaluationError(t, f"invalid power at t={t!r}") from None
        else:
            x = pop()
            if op == 7:
                r = -x
            elif op == 8:
                r = math.sin(x)
            elif op == 9:
                r = math.cos(x)
            elif op == 10:
                try:
                    r = math.exp(x)
                except OverflowError:
                    raise EvaluationError(t, f"exp overflow at t={t!r}") from None
            elif op == 11:
                if x <= 0.0:
                    raise EvaluationError(t, f"log of non-positive value {x!r} at t={t!r}")
                r = math.log(x)
            elif op == 12:
                r = abs(x)
            else:
                if x < 0.0:
                    raise EvaluationError(t, f"sqrt of negative value {x!r} at t={t!r}")
                r = math.sqrt(x)
        if not math.isfinite(r):
            raise EvaluationError(t, f"non-finite value at t={t!r}")
        push(r)
    return stack[0]


class Program:
    """A compiled expression executed by the Python interpreter."""

    backend = NAME

    def __init__(self, ops, consts, depth=None):
        self.ops = tuple(int(o) for o in ops)
        self.consts = tuple(float(c) for c in consts)

    def eval(self, t):
        return run_program(self.ops, self.consts, float(t))

    def eval_grid(self, xs):
        return np.array([run_program(self.ops, self.consts, float(x)) for x in xs], dtype=float)

    def simpson(self, a, b, tol, max_depth):
        return simpson(self.eval, float(a), float(b), float(tol), int(max_depth))

    def extrema(self, lo, hi, n):
        return extrema(self.eval, float(lo), float(hi), int(n))
