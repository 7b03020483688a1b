# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels: postfix expression programs, adaptive Simpson, extremum search.

Mirrors ``tscale._pykernels`` operation for operation; the two backends are
expected to agree to the last bit on identical programs.
"""

from libc.math cimport sin, cos, exp, log, fabs, sqrt, pow, isfinite
from libc.stdlib cimport malloc, free

import numpy as np

from .errors import EvaluationError, QuadratureNonConvergent

NAME = "cython"

cdef enum:
    STACK_MAX = 256
    MIN_LEVEL = 2
    GOLDEN_ITERS = 80

cdef double GOLDEN = 0.6180339887498949

# status codes
cdef enum:
    OK = 0
    EVAL_FAILED = 1
    NOT_CONVERGED = 2


cdef struct QuadState:
    int status
    double where
    int max_depth


cdef class Program:
    """A compiled expression executed as native code."""

    cdef int n_ops
    cdef int *ops
    cdef double *consts
    cdef readonly tuple op_codes
    cdef readonly tuple constants

    backend = NAME

    def __cinit__(self, ops, consts, depth=None):
        self.op_codes = tuple(int(o) for o in ops)
        self.constants = tuple(float(c) for c in consts)
        if depth is not None and depth > STACK_MAX:
            raise ValueError(f"expression needs stack depth {depth} > {STACK_MAX}")
        self.n_ops = len(self.op_codes)
        self.ops = <int *> malloc(max(self.n_ops, 1) * sizeof(int))
        self.consts = <double *> malloc(max(len(self.constants), 1) * sizeof(double))
        if self.ops == NULL or self.consts == NULL:
            raise MemoryError()
        cdef int i
        for i in range(self.n_ops):
            self.ops[i] = self.op_codes[i]
        for i in range(len(self.constants)):
            self.consts[i] = self.constants[i]

    def __dealloc__(self):
        free(self.ops)
        free(self.consts)

    cdef double run(self, double t, int *status) noexcept nogil:
        cdef double stack[STACK_MAX]
        cdef int sp = 0
        cdef int c = 0
        cdef int i, op
        cdef double x, y, r
        for i in range(self.n_ops):
            op = self.ops[i]
            if op == 0:
                stack[sp] = self.consts[c]
                c += 1
                sp += 1
                continue
            if op == 1:
                stack[sp] = t
                sp += 1
                continue
            if op <= 6:
                sp -= 1
                y = stack[sp]
                x = stack[sp - 1]
                if op == 2:
                    r = x + y
                elif op == 3:
                    r = x - y
                elif op == 4:
                    r = x * y
                elif op == 5:
                    if y == 0.0:
                        status[0] = EVAL_FAILED
                        return 0.0
                    r = x / y
                else:
                    r = pow(x, y)
            else:
                x = stack[sp - 1]
                if op == 7:
                    r = -x
                elif op == 8:
                    r = sin(x)
                elif op == 9:
                    r = cos(x)
                elif op == 10:
                    r = exp(x)
                elif op == 11:
                    if x <= 0.0:
                        status[0] = EVAL_FAILED
                        return 0.0
                    r = log(x)
                elif op == 12:
                    r = fabs(x)
                else:
                    if x < 0.0:
                        status[0] = EVAL_FAILED
                        return 0.0
                    r = sqrt(x)
            if not isfinite(r):
                status[0] = EVAL_FAILED
                return 0.0
            stack[sp - 1] = r
        return stack[0]

    def eval(self, double t):
        cdef int status = OK
        cdef double v = self.run(t, &status)
        if status != OK:
            raise EvaluationError(t, f"evaluation failed at t={t!r}")
        return v

    def eval_grid(self, xs):
        cdef double[::1] src = np.ascontiguousarray(xs, dtype=np.float64)
        out = np.empty(src.shape[0], dtype=np.float64)
        cdef double[::1] dst = out
        cdef int status = OK
        cdef Py_ssize_t i
        for i in range(src.shape[0]):
            dst[i] = self.run(src[i], &status)
            if status != OK:
                raise EvaluationError(src[i], f"evaluation failed at t={src[i]!r}")
        return out

    cdef double _f(self, double t, QuadState *st) noexcept nogil:
        cdef int status = OK
        cdef double v
        if st.status != OK:
            return 0.0
        v = self.run(t, &status)
        if status != OK:
            st.status = EVAL_FAILED
            st.where = t
        return v

    cdef double _simpson_rec(self, double a, double b, double fa, double fm, double fb,
                             double whole, double tol, int level, QuadState *st,
                             double *err) noexcept nogil:
        cdef double m = 0.5 * (a + b)
        cdef double lm = 0.5 * (a + m)
        cdef double rm = 0.5 * (m + b)
        cdef double flm = self._f(lm, st)
        cdef double frm = self._f(rm, st)
        cdef double left, right, delta, lv, rv, le = 0.0, re = 0.0
        if st.status != OK:
            return 0.0
        left = (m - a) / 6.0 * (fa + 4.0 * flm + fm)
        right = (b - m) / 6.0 * (fm + 4.0 * frm + fb)
        delta = left + right - whole
        if level >= MIN_LEVEL and fabs(delta) <= 15.0 * tol:
            err[0] = fabs(delta) / 15.0
            return left + right + delta / 15.0
        if level >= st.max_depth or not (a < lm and lm < m and m < rm and rm < b):
            st.status = NOT_CONVERGED
            st.where = a
            return 0.0
        # errors are summed pairwise like the values, matching the Python backend bit for bit
        lv = self._simpson_rec(a, m, fa, flm, fm, left, 0.5 * tol, level + 1, st, &le)
        if st.status != OK:
            return 0.0
        rv = self._simpson_rec(m, b, fm, frm, fb, right, 0.5 * tol, level + 1, st, &re)
        err[0] = le + re
        return lv + rv

    def simpson(self, double a, double b, double tol, int max_depth):
        cdef QuadState st
        cdef double err = 0.0
        cdef double fa, fm, fb, whole, value
        if a == b:
            return 0.0, 0.0
        st.status = OK
        st.where = 0.0
        st.max_depth = max_depth
        with nogil:
            fa = self._f(a, &st)
            fm = self._f(0.5 * (a + b), &st)
            fb = self._f(b, &st)
            value = 0.0
            if st.status == OK:
                whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)
                value = self._simpson_rec(a, b, fa, fm, fb, whole, tol, 0, &st, &err)
        if st.status == EVAL_FAILED:
            raise EvaluationError(st.where, f"evaluation failed at t={st.where!r}")
        if st.status == NOT_CONVERGED:
            raise QuadratureNonConvergent(
                f"adaptive Simpson did not reach tolerance {tol:.3g} on [{a!r}, {b!r}] within {max_depth} levels"
            )
        return value, err

    cdef double _golden(self, double lo, double hi, double sign, double best, QuadState *st) noexcept nogil:
        cdef double x1 = hi - GOLDEN * (hi - lo)
        cdef double x2 = lo + GOLDEN * (hi - lo)
        cdef double f1 = sign * self._f(x1, st)
        cdef double f2 = sign * self._f(x2, st)
        cdef int k
        for k in range(GOLDEN_ITERS):
            if f1 > best:
                best = f1
            if f2 > best:
                best = f2
            if hi - lo <= 1e-15 * (1.0 + fabs(lo) + fabs(hi)):
                break
            if f1 < f2:
                lo = x1
                x1 = x2
                f1 = f2
                x2 = lo + GOLDEN * (hi - lo)
                f2 = sign * self._f(x2, st)
            else:
                hi = x2
                x2 = x1
                f2 = f1
                x1 = hi - GOLDEN * (hi - lo)
                f1 = sign * self._f(x1, st)
        return best

    def extrema(self, double lo, double hi, int n):
        cdef QuadState st
        cdef double step, x, v, vmin, vmax
        cdef double xmin_lo, xmin_hi, xmax_lo, xmax_hi
        cdef int i, kmin = 0, kmax = 0
        st.status = OK
        st.where = 0.0
        st.max_depth = 0
        if lo == hi:
            v = self.eval(lo)
            return v, v
        step = (hi - lo) / (n - 1)
        with nogil:
            vmin = vmax = self._f(lo, &st)
            for i in range(1, n):
                x = hi if i == n - 1 else lo + i * step
                v = self._f(x, &st)
                if v > vmax:
                    vmax = v
                    kmax = i
                if v < vmin:
                    vmin = v
                    kmin = i
            if st.status == OK:
                xmax_lo = lo + (kmax - 1) * step if kmax > 0 else lo
                xmax_hi = (hi if kmax + 1 == n - 1 else lo + (kmax + 1) * step) if kmax < n - 1 else hi
                xmin_lo = lo + (kmin - 1) * step if kmin > 0 else lo
                xmin_hi = (hi if kmin + 1 == n - 1 else lo + (kmin + 1) * step) if kmin < n - 1 else hi
                vmax = self._golden(xmax_lo, xmax_hi, 1.0, vmax, &st)
                vmin = -self._golden(xmin_lo, xmin_hi, -1.0, -vmin, &st)
        if st.status != OK:
            raise EvaluationError(st.where, f"evaluation failed at t={st.where!r}")
        return vmin, vmax


def simpson(f, a, b, tol, max_depth):
    from ._pykernels import simpson as _simpson
    return _simpson(f, a, b, tol, max_depth)


def extrema(f, lo, hi, n):
    from ._pykernels import extrema as _extrema
    return _extrema(f, lo, hi, n)
