"""Delta, nabla and diamond-alpha derivatives and integrals on a time scale.

Integrals are split into an exact sum over scattered points (each weighted by
its forward or backward graininess) and adaptive Simpson quadrature over the
dense segments of the window. Derivatives are exact difference quotients at
scattered points and Richardson-extrapolated finite differences at dense ones.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field

from . import kernels
from .errors import DerivativeDiverged, DomainViolation, EmptyScale
from .functions import CallableFunction, ScaleFunction, as_function
from .timescale import TimeScale

DEFAULT_TOL = 1e-10
FD_CONVERGENCE = 1e-8
FD_MAX_HALVINGS = 30


def default_tol() -> float:
    """Default quadrature tolerance; ``TSCALE_TOL`` overrides it."""
    raw = os.environ.get("TSCALE_TOL")
    if raw:
        tol = float(raw)
        if not tol > 0:
            raise ValueError(f"TSCALE_TOL must be positive, got {raw!r}")
        return tol
    return DEFAULT_TOL


@dataclass(frozen=True)
class QuadratureConfig:
    abs_tol: float = field(default_factory=default_tol)
    max_depth: int = 50
    fd_step_init: float = 1e-3

    def __post_init__(self):
        if not self.abs_tol > 0:
            raise ValueError("abs_tol must be positive")
        if self.max_depth < 1:
            raise ValueError("max_depth must be at least 1")
        if not self.fd_step_init > 0:
            raise ValueError("fd_step_init must be positive")


def check_alpha(alpha: float) -> float:
    alpha = float(alpha)
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha must lie in [0, 1], got {alpha!r}")
    return alpha


def _cfg(cfg):
    return cfg if cfg is not None else QuadratureConfig()


# ------------------------------------------------------------------ integrals

@dataclass(frozen=True)
class IntegralParts:
    """Pieces of the delta and nabla integrals of one function over one window."""

    delta_sum: float  # sum of mu(t) f(t) over right-scattered t in [a, b)
    nabla_sum: float  # sum of nu(t) f(t) over left-scattered t in (a, b]
    dense: float  # quadrature over the dense segments (shared by both)
    dense_error: float  # Simpson's own error estimate
    tolerance: float  # quadrature tolerance spent; 0 when no dense segment

    @property
    def delta(self) -> float:
        return self.delta_sum + self.dense

    @property
    def nabla(self) -> float:
        return self.nabla_sum + self.dense

    def diamond(self, alpha: float) -> float:
        return alpha * self.delta + (1.0 - alpha) * self.nabla


ZERO_PARTS = IntegralParts(0.0, 0.0, 0.0, 0.0, 0.0)


def integral_parts(f, ts: TimeScale, a: float, b: float, cfg: QuadratureConfig | None = None) -> IntegralParts:
    cfg = _cfg(cfg)
    f = as_function(f)
    a, b = ts.window(a, b)
    if a == b:
        return ZERO_PARTS
    segs = ts.segments
    cache = {}

    def value(t):
        v = cache.get(t)
        if v is None:
            v = cache[t] = f(t)
        return v

    delta_terms, nabla_terms = [], []
    for (_, hi), (lo_next, _) in zip(segs, segs[1:]):
        if hi >= b:
            break
        if lo_next <= a:
            continue
        gap = lo_next - hi
        if a <= hi:
            delta_terms.append(gap * value(hi))
        if lo_next <= b:
            nabla_terms.append(gap * value(lo_next))

    dense = ts.dense_segments(a, b)
    total = err = 0.0
    if dense:
        tol = cfg.abs_tol / len(dense)
        for lo, hi in dense:
            prog = f.segment_program(lo, hi)
            if prog is not None:
                v, e = prog.simpson(lo, hi, tol, cfg.max_depth)
            else:
                v, e = kernels.simpson(f, lo, hi, tol, cfg.max_depth)
            total += v
            err += e
    return IntegralParts(
        math.fsum(delta_terms), math.fsum(nabla_terms), total, err, cfg.abs_tol if dense else 0.0
    )


def delta_integral(f, ts: TimeScale, a: float, b: float, cfg: QuadratureConfig | None = None) -> float:
    return integral_parts(f, ts, a, b, cfg).delta


def nabla_integral(f, ts: TimeScale, a: float, b: float, cfg: QuadratureConfig | None = None) -> float:
    return integral_parts(f, ts, a, b, cfg).nabla


def diamond_integral(f, ts: TimeScale, a: float, b: float, alpha: float, cfg: QuadratureConfig | None = None) -> float:
    """alpha * delta integral + (1 - alpha) * nabla integral."""
    return integral_parts(f, ts, a, b, cfg).diamond(check_alpha(alpha))


# ---------------------------------------------------------------- derivatives

def _dense_derivative(f: ScaleFunction, lo: float, hi: float, t: float, cfg: QuadratureConfig) -> float:
    h0 = cfg.fd_step_init
    room_l, room_r = t - lo, hi - t
    central = min(room_l, room_r) >= h0 / 1024.0
    if central:
        h = min(h0, room_l, room_r)

        def quotient(h):
            return (f(t + h) - f(t - h)) / (2.0 * h)

        k1, k2 = 4.0, 16.0
    else:
        sign = 1.0 if room_r >= room_l else -1.0
        h = min(h0, max(room_l, room_r))
        ft = f(t)

        def quotient(h):
            return (f(t + sign * h) - ft) / (sign * h)

        k1, k2 = 2.0, 4.0

    d_prev = quotient(h)
    r1_prev = None
    est_prev = None
    for _ in range(FD_MAX_HALVINGS):
        h *= 0.5
        d = quotient(h)
        r1 = (k1 * d - d_prev) / (k1 - 1.0)
        if r1_prev is not None:
            est = (k2 * r1 - r1_prev) / (k2 - 1.0)
            if est_prev is not None and abs(est - est_prev) <= FD_CONVERGENCE * max(1.0, abs(est)):
                return est
            est_prev = est
        d_prev, r1_prev = d, r1
    raise DerivativeDiverged(f"finite differences did not settle at t={t!r}")


def delta_derivative(f, ts: TimeScale, t: float, cfg: QuadratureConfig | None = None) -> float:
    cfg = _cfg(cfg)
    f = as_function(f)
    t, i = ts.locate(t)
    try:
        dom = ts.delta_domain()
    except EmptyScale:
        raise DomainViolation("a single-point scale has no delta derivative") from None
    if t > dom.max:
        raise DomainViolation(f"t={t!r} is a left-scattered maximum")
    s = ts.sigma(t)
    if s > t:
        return (f(s) - f(t)) / (s - t)
    lo, hi = ts.segments[i]
    return _dense_derivative(f, lo, hi, t, cfg)


def nabla_derivative(f, ts: TimeScale, t: float, cfg: QuadratureConfig | None = None) -> float:
    cfg = _cfg(cfg)
    f = as_function(f)
    t, i = ts.locate(t)
    try:
        dom = ts.nabla_domain()
    except EmptyScale:
        raise DomainViolation("a single-point scale has no nabla derivative") from None
    if t < dom.min:
        raise DomainViolation(f"t={t!r} is a right-scattered minimum")
    r = ts.rho(t)
    if r < t:
        return (f(t) - f(r)) / (t - r)
    lo, hi = ts.segments[i]
    return _dense_derivative(f, lo, hi, t, cfg)


def diamond_derivative(f, ts: TimeScale, t: float, alpha: float, cfg: QuadratureConfig | None = None) -> float:
    alpha = check_alpha(alpha)
    f = as_function(f)
    return alpha * delta_derivative(f, ts, t, cfg) + (1.0 - alpha) * nabla_derivative(f, ts, t, cfg)


def ftc_defect(h, ts: TimeScale, t: float, alpha: float, cfg: QuadratureConfig | None = None) -> float:
    """Diamond derivative of the running diamond integral of h, minus h(t).

    Zero on the reals; generally nonzero on scales with scattered points,
    since the diamond integral has no antiderivative property.
    """
    cfg = _cfg(cfg)
    alpha = check_alpha(alpha)
    h = as_function(h)
    start = ts.min
    running = CallableFunction(lambda s: diamond_integral(h, ts, start, s, alpha, cfg), "running_integral")
    return diamond_derivative(running, ts, t, alpha, cfg) - h(ts.snap(t))
