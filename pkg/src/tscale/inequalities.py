"""Checkers for the diamond-alpha Gruss, Jensen and mean-square inequalities.

Every checker returns an :class:`InequalityReport`. A report is satisfied when
``lhs <= rhs + error_budget + SATISFACTION_GUARD``; ``error_budget`` collects
the quadrature tolerance spent on each integral, propagated to first order,
plus a relative rounding allowance of 1e-12 on the operands.

``rhs_factor`` on each checker multiplies the right-hand side; it exists for
fault injection (a value below 1 must eventually produce violations).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

from . import kernels
from .calculus import QuadratureConfig, check_alpha, integral_parts
from .errors import BoundsViolated, InvalidBase, ReversedRange, ShapeError
from .functions import ScaleFunction, as_function
from .timescale import TimeScale

SATISFACTION_GUARD = 1e-9
ROUNDING = 1e-12
BOUND_SAMPLES = 1024
MEAN_ZERO_THRESHOLD = 1e-12
JENSEN_CATALOG = ("square", "abs", "exp")


@dataclass(frozen=True)
class BoundsBox:
    lower: float
    upper: float
    provenance: str = "user"  # "user" | "inferred"

    def __post_init__(self):
        if not self.lower <= self.upper:
            raise ValueError(f"bounds need lower <= upper, got [{self.lower!r}, {self.upper!r}]")

    @property
    def width(self) -> float:
        return self.upper - self.lower

    def widened(self, eps: float) -> "BoundsBox":
        return BoundsBox(self.lower - eps, self.upper + eps, self.provenance)

    def to_dict(self) -> dict:
        return {"lower": self.lower, "upper": self.upper, "provenance": self.provenance}


@dataclass(frozen=True)
class InequalityReport:
    name: str
    alpha: float | None
    lhs: float
    rhs: float
    slack: float
    satisfied: bool
    error_budget: float
    bounds_used: tuple[BoundsBox, ...]
    window: tuple[float, float]
    details: dict = field(default_factory=dict, compare=False)


def make_report(name, alpha, lhs, rhs, budget, bounds, window, **details) -> InequalityReport:
    return InequalityReport(
        name=name,
        alpha=alpha,
        lhs=lhs,
        rhs=rhs,
        slack=rhs - lhs,
        satisfied=lhs <= rhs + budget + SATISFACTION_GUARD,
        error_budget=budget,
        bounds_used=tuple(bounds),
        window=window,
        details=details,
    )


# -------------------------------------------------------------------- bounds

def infer_bounds(f, ts: TimeScale, a: float, b: float, cfg: QuadratureConfig | None = None,
                 samples: int = BOUND_SAMPLES) -> BoundsBox:
    """Envelope of f on [a, b]: exact over isolated points, grid plus
    golden-section polish on dense segments."""
    f = as_function(f)
    a, b = ts.window(a, b)
    values = [f(t) for t in ts.isolated_points(a, b)]
    for lo, hi in ts.dense_segments(a, b):
        prog = f.segment_program(lo, hi)
        if prog is not None:
            values.extend(prog.extrema(lo, hi, samples))
        else:
            values.extend(kernels.extrema(f, lo, hi, samples))
    if not values:  # a == b inside a dense segment
        values.append(f(a))
    return BoundsBox(min(values), max(values), "inferred")


def _resolve_bounds(given: BoundsBox | None, inferred: BoundsBox, label: str) -> BoundsBox:
    if given is None:
        return inferred
    if not isinstance(given, BoundsBox):
        given = BoundsBox(*given)
    tol = ROUNDING * max(1.0, abs(inferred.lower), abs(inferred.upper))
    if given.lower > inferred.lower + tol or given.upper < inferred.upper - tol:
        raise BoundsViolated(
            f"{label} takes values in [{inferred.lower!r}, {inferred.upper!r}], "
            f"outside the supplied bounds [{given.lower!r}, {given.upper!r}]"
        )
    return given


def _open_window(ts, a, b):
    a, b = ts.window(a, b)
    if not a < b:
        raise ReversedRange(f"need a < b, got a={a!r}, b={b!r}")
    return a, b


# -------------------------------------------------------------------- Gruss

def check_gruss(f, g, ts: TimeScale, a: float, b: float, alpha: float,
                bounds_f: BoundsBox | None = None, bounds_g: BoundsBox | None = None,
                cfg: QuadratureConfig | None = None, *, rhs_factor: float = 1.0) -> InequalityReport:
    """|mean(fg) - mean(f) mean(g)| <= (Phi - phi)(Gamma - gamma) / 4 with diamond-alpha means."""
    cfg = cfg or QuadratureConfig()
    alpha = check_alpha(alpha)
    f, g = as_function(f), as_function(g)
    a, b = _open_window(ts, a, b)
    bf = _resolve_bounds(bounds_f, infer_bounds(f, ts, a, b, cfg), "f")
    bg = _resolve_bounds(bounds_g, infer_bounds(g, ts, a, b, cfg), "g")

    length = b - a
    pf = integral_parts(f, ts, a, b, cfg)
    pg = integral_parts(g, ts, a, b, cfg)
    pfg = integral_parts(f * g, ts, a, b, cfg)
    i_f, i_g, i_fg = pf.diamond(alpha), pg.diamond(alpha), pfg.diamond(alpha)
    mean_fg = i_fg / length
    product_of_means = (i_f / length) * (i_g / length)
    lhs = abs(mean_fg - product_of_means)
    rhs = rhs_factor * 0.25 * bf.width * bg.width

    ef, eg, efg = pf.tolerance, pg.tolerance, pfg.tolerance
    budget = (
        efg / length
        + (abs(i_f) * eg + abs(i_g) * ef + ef * eg) / length / length
        + ROUNDING * (abs(mean_fg) + abs(product_of_means))
    )
    return make_report(
        "gruss", alpha, lhs, rhs, budget, (bf, bg), (a, b),
        integral_f=i_f, integral_g=i_g, integral_fg=i_fg,
    )


# -------------------------------------------------------------------- Jensen

def _convex(tag):
    if tag == "square":
        return lambda x: x * x, lambda x, d: 2.0 * (abs(x) + d)
    if tag == "abs":
        return abs, lambda x, d: 1.0
    if tag == "exp":
        return math.exp, lambda x, d: math.exp(x + d)
    raise ValueError(f"convex function must be one of {JENSEN_CATALOG}, got {tag!r}")


def _compose(tag, u: ScaleFunction) -> ScaleFunction:
    if tag == "square":
        return u.square()
    return u.map(tag)


def check_jensen(u, h: str, ts: TimeScale, a: float, b: float, alpha: float,
                 cfg: QuadratureConfig | None = None, *, rhs_factor: float = 1.0) -> InequalityReport:
    """h(mean(u)) <= mean(h o u) with diamond-alpha means and h from the convex catalog."""
    cfg = cfg or QuadratureConfig()
    alpha = check_alpha(alpha)
    hfun, hslope = _convex(h)
    u = as_function(u)
    a, b = _open_window(ts, a, b)
    length = b - a
    pu = integral_parts(u, ts, a, b, cfg)
    phu = integral_parts(_compose(h, u), ts, a, b, cfg)
    mean_u = pu.diamond(alpha) / length
    lhs = hfun(mean_u)
    rhs = rhs_factor * phu.diamond(alpha) / length
    du = pu.tolerance / length
    budget = hslope(mean_u, du) * du + phu.tolerance / length + ROUNDING * (abs(lhs) + abs(rhs))
    return make_report("jensen", alpha, lhs, rhs, budget, (), (a, b), convex=h, mean=mean_u)


# ----------------------------------------------------------- mean square bound

def check_mean_square_bound(f, ts: TimeScale, a: float, b: float, alpha: float,
                            bounds: BoundsBox | None = None, cfg: QuadratureConfig | None = None,
                            *, rhs_factor: float = 1.0) -> InequalityReport:
    """mean(f^2) - mean(f)^2 <= (M - m)^2 / 4; records whether the mean vanished."""
    cfg = cfg or QuadratureConfig()
    alpha = check_alpha(alpha)
    f = as_function(f)
    a, b = _open_window(ts, a, b)
    box = _resolve_bounds(bounds, infer_bounds(f, ts, a, b, cfg), "f")
    length = b - a
    pf = integral_parts(f, ts, a, b, cfg)
    pf2 = integral_parts(f.square(), ts, a, b, cfg)
    mean = pf.diamond(alpha) / length
    mean_sq = pf2.diamond(alpha) / length
    lhs = mean_sq - mean * mean
    rhs = rhs_factor * 0.25 * box.width * box.width
    d = pf.tolerance / length
    budget = pf2.tolerance / length + 2.0 * abs(mean) * d + d * d + ROUNDING * (abs(mean_sq) + mean * mean)
    regime = "mean-zero" if abs(mean) <= MEAN_ZERO_THRESHOLD * length else "mean-nonzero"
    return make_report("mean_square", alpha, lhs, rhs, budget, (box,), (a, b), regime=regime, mean=mean)


# ----------------------------------------------------------- finite sequences

def _sequence_bounds(xs, given, label):
    inferred = BoundsBox(min(xs), max(xs), "inferred")
    return _resolve_bounds(given, inferred, label)


def discrete_gruss(x: Sequence[float], y: Sequence[float], bounds_x: BoundsBox | None = None,
                   bounds_y: BoundsBox | None = None, *, rhs_factor: float = 1.0) -> InequalityReport:
    """|(1/n) sum x_i y_i - (1/n^2) sum x_i sum y_i| <= (Phi - phi)(Gamma - gamma) / 4."""
    x = [float(v) for v in x]
    y = [float(v) for v in y]
    if len(x) != len(y):
        raise ShapeError(f"sequences differ in length: {len(x)} != {len(y)}")
    if not x:
        raise ShapeError("sequences must be non-empty")
    n = len(x)
    bx = _sequence_bounds(x, bounds_x, "x")
    by = _sequence_bounds(y, bounds_y, "y")
    sx, sy = math.fsum(x), math.fsum(y)
    sxy = math.fsum(xi * yi for xi, yi in zip(x, y))
    mean_xy = sxy / n
    product_of_means = sx * sy / (n * n)
    lhs = abs(mean_xy - product_of_means)
    rhs = rhs_factor * 0.25 * bx.width * by.width
    budget = ROUNDING * (abs(mean_xy) + abs(product_of_means))
    return make_report("discrete_gruss", None, lhs, rhs, budget, (bx, by), (0.0, float(n)),
                       integral_f=sx, integral_g=sy, integral_fg=sxy)


# ------------------------------------------------------------- quantum scale

def quantum_points(q: float, m: int, n: int) -> list[float]:
    q = float(q)
    if not q > 1.0:
        raise InvalidBase(f"quantum base must exceed 1, got {q!r}")
    return [q ** i for i in range(m, n + 1)]


def quantum_gruss(f, g, q: float, m: int, n: int, bounds_f: BoundsBox | None = None,
                  bounds_g: BoundsBox | None = None, *, rhs_factor: float = 1.0) -> InequalityReport:
    """Gruss inequality on {q^m, ..., q^n} with weights q^i and values at q^(i+1)."""
    m, n = int(m), int(n)
    pts = quantum_points(q, m, n)
    if not m < n:
        raise ReversedRange(f"need m < n, got m={m}, n={n}")
    f, g = as_function(f), as_function(g)
    fv = [f(p) for p in pts]
    gv = [g(p) for p in pts]
    bf = _sequence_bounds(fv, bounds_f, "f")
    bg = _sequence_bounds(gv, bounds_g, "g")
    weights = pts[:-1]  # q^i for i = m .. n-1
    total = math.fsum(weights)
    s_fg = math.fsum(w * fi * gi for w, fi, gi in zip(weights, fv[1:], gv[1:]))
    s_f = math.fsum(w * fi for w, fi in zip(weights, fv[1:]))
    s_g = math.fsum(w * gi for w, gi in zip(weights, gv[1:]))
    mean_fg = s_fg / total
    product_of_means = s_f * s_g / (total * total)
    lhs = abs(mean_fg - product_of_means)
    rhs = rhs_factor * 0.25 * bf.width * bg.width
    budget = ROUNDING * (abs(mean_fg) + abs(product_of_means))
    return make_report("quantum_gruss", 0.0, lhs, rhs, budget, (bf, bg), (pts[0], pts[-1]),
                       weighted_mean_fg=mean_fg, product_of_means=product_of_means)
