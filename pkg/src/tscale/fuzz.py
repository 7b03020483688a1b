"""Seeded random scales and functions, brute-force oracles, property suites, shrinking.

Every trial draws from its own PCG64 stream seeded with ``(seed, trial_index)``,
so a trial can be replayed alone and the trial order does not matter.
"""

from __future__ import annotations

import dataclasses
import hashlib
import math
import time
from dataclasses import dataclass, field

import numpy as np

from .calculus import (
    QuadratureConfig,
    delta_derivative,
    delta_integral,
    diamond_derivative,
    diamond_integral,
    integral_parts,
    nabla_derivative,
    nabla_integral,
)
from .errors import DenseSegmentPresent, NotAViolation
from .expr import T, Bin, Call, Expr, Num
from .functions import ExprFunction, ScaleFunction, TableFunction
from .inequalities import (
    BoundsBox,
    InequalityReport,
    check_gruss,
    check_jensen,
    check_mean_square_bound,
    infer_bounds,
)
from .timescale import TimeScale, canonicalize

FAMILIES = ("polynomial", "trig", "table", "piecewise_linear")
PROPERTIES = ("gruss", "jensen", "mean_square", "blend_identity", "integral_props", "product_rule", "oracle_equiv")
INEQUALITY_PROPERTIES = ("gruss", "jensen", "mean_square")
AMPLITUDE = 100.0
EXP_AMPLITUDE = 3.0  # keeps exp(u) in a range where absolute quadrature tolerances are meaningful
MAX_SHRINK_STEPS = 200
EXACT_REL = 1e-12


@dataclass(frozen=True)
class FuzzConfig:
    seed: int = 0
    trials: int = 1000
    max_segments: int = 6
    coord_range: tuple[float, float] = (-10.0, 10.0)
    function_families: tuple[str, ...] = FAMILIES
    alpha_grid: tuple[float, ...] = (0.0, 0.25, 0.5, 0.75, 1.0)
    point_probability: float = 0.5
    quad: QuadratureConfig = field(default_factory=QuadratureConfig)
    rhs_factor: float = 1.0

    def __post_init__(self):
        if self.trials < 1 or self.max_segments < 1:
            raise ValueError("trials and max_segments must be positive")
        lo, hi = self.coord_range
        if not lo < hi:
            raise ValueError("coord_range must be increasing")
        unknown = set(self.function_families) - set(FAMILIES)
        if unknown or not self.function_families:
            raise ValueError(f"unknown function families {sorted(unknown)}")


def trial_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed & (2**64 - 1), index])))


# ----------------------------------------------------------------- generators

def gen_scale(rng: np.random.Generator, cfg: FuzzConfig) -> TimeScale:
    """1..max_segments disjoint segments in coord_range; each degenerates to a
    point with probability ``cfg.point_probability``."""
    lo, hi = cfg.coord_range
    k = int(rng.integers(1, cfg.max_segments + 1))
    xs = np.sort(rng.uniform(lo, hi, 2 * k))
    degenerate = rng.random(k) < cfg.point_probability
    raw = []
    for i in range(k):
        a, b = float(xs[2 * i]), float(xs[2 * i + 1])
        raw.append((a, a) if degenerate[i] else (a, b))
    ts = canonicalize(raw)
    if len(ts) == 1 and ts.min == ts.max:
        a, b = float(xs[0]), float(xs[1])
        ts = canonicalize([(a, a), (b, b)] if cfg.point_probability >= 1.0 else [(a, b)])
    return ts


@dataclass(frozen=True)
class FunctionSpec:
    """A generated function in a form the shrinker can simplify."""

    family: str
    params: tuple

    def build(self) -> ScaleFunction:
        fam, p = self.family, self.params
        if fam == "polynomial":
            center, radius, coeffs = p
            return ExprFunction(_horner(_unit(center, radius), coeffs))
        if fam == "trig":
            amp, freq, phase, offset = p
            arg = Bin("+", Bin("*", Num(freq), T), Num(phase))
            return ExprFunction(Bin("+", Bin("*", Num(amp), Call("sin", arg)), Num(offset)))
        if fam == "piecewise_linear":
            center, radius, scale, intercept, slope, kinks = p
            x = _unit(center, radius)
            body = Bin("+", Num(intercept), Bin("*", Num(slope), x))
            for k, w in kinks:
                body = Bin("+", body, Bin("*", Num(w), Call("abs", Bin("-", x, Num(k)))))
            return ExprFunction(Bin("*", Num(scale), body))
        if fam == "table":
            values, pieces = p
            return TableFunction(dict(values), [(lo, hi, _linear(lo, hi, v0, v1)) for lo, hi, v0, v1 in pieces])
        raise ValueError(f"unknown family {fam!r}")

    def simpler(self) -> list["FunctionSpec"]:
        fam, p = self.family, self.params
        if fam == "polynomial" and len(p[2]) > 1:
            return [FunctionSpec(fam, (p[0], p[1], p[2][:-1]))]
        if fam == "piecewise_linear" and p[5]:
            return [FunctionSpec(fam, p[:5] + (p[5][:-1],))]
        if fam == "trig" and p[0] != 0.0:
            return [FunctionSpec("polynomial", (0.0, 1.0, (p[3],)))]
        return []


def _unit(center, radius):
    return Bin("/", Bin("-", T, Num(center)), Num(radius))


def _horner(x: Expr, coeffs) -> Expr:
    acc: Expr = Num(coeffs[-1])
    for c in reversed(coeffs[:-1]):
        acc = Bin("+", Bin("*", acc, x), Num(c))
    return acc


def _linear(lo, hi, v0, v1):
    return Bin("+", Num(v0), Bin("*", Num(v1 - v0), Bin("/", Bin("-", T, Num(lo)), Num(hi - lo))))


def gen_function_spec(rng: np.random.Generator, ts: TimeScale, cfg: FuzzConfig,
                      amplitude: float = AMPLITUDE, family: str | None = None) -> FunctionSpec:
    """Random function with |f| <= amplitude on [min(ts), max(ts)]."""
    fam = family or cfg.function_families[int(rng.integers(len(cfg.function_families)))]
    center = 0.5 * (ts.min + ts.max)
    radius = max(0.5 * (ts.max - ts.min), 1e-6)
    if fam == "polynomial":
        degree = int(rng.integers(0, 6))
        c = rng.uniform(-1.0, 1.0, degree + 1)
        c *= amplitude * rng.uniform(0.1, 1.0) / max(np.abs(c).sum(), 1e-300)
        return FunctionSpec(fam, (center, radius, tuple(float(v) for v in c)))
    if fam == "trig":
        share = rng.uniform(0.0, 1.0)
        total = amplitude * rng.uniform(0.1, 1.0)
        amp = float(total * share * rng.choice([-1.0, 1.0]))
        offset = float(total * (1.0 - share) * rng.uniform(-1.0, 1.0))
        return FunctionSpec(fam, (amp, float(rng.uniform(0.1, 2.0)), float(rng.uniform(0, 2 * math.pi)), offset))
    if fam == "piecewise_linear":
        kinks = tuple((float(rng.uniform(-1, 1)), float(rng.uniform(-1, 1))) for _ in range(int(rng.integers(0, 4))))
        intercept, slope = float(rng.uniform(-1, 1)), float(rng.uniform(-1, 1))
        xs = [-1.0, 1.0] + [k for k, _ in kinks]
        peak = max(abs(intercept + slope * x + sum(w * abs(x - k) for k, w in kinks)) for x in xs)
        scale = float(amplitude * rng.uniform(0.1, 1.0) / max(peak, 1e-12))
        return FunctionSpec(fam, (center, radius, scale, intercept, slope, kinks))
    if fam == "table":
        values = tuple((p, float(rng.uniform(-1.0, 1.0))) for p in ts.points())
        pieces = tuple(
            (lo, hi, float(rng.uniform(-1.0, 1.0)), float(rng.uniform(-1.0, 1.0)))
            for lo, hi in ts.segments if lo < hi
        )
        return FunctionSpec(fam, (values, pieces))
    raise ValueError(f"unknown family {fam!r}")


def gen_function(rng: np.random.Generator, ts: TimeScale, cfg: FuzzConfig,
                 amplitude: float = AMPLITUDE) -> tuple[ScaleFunction, BoundsBox]:
    """A random function and a box enveloping it on the whole scale."""
    f = gen_function_spec(rng, ts, cfg, amplitude).build()
    box = infer_bounds(f, ts, ts.min, ts.max, cfg.quad)
    return f, box.widened(1e-9)


def gen_window(rng: np.random.Generator, ts: TimeScale) -> tuple[float, float]:
    """a < b drawn from scale points (segment endpoints and dense interior points)."""
    cands = set()
    for lo, hi in ts.segments:
        cands.update((lo, hi))
        if lo < hi:
            cands.update(float(x) for x in rng.uniform(lo, hi, 2))
    cands = sorted(cands)
    i, j = sorted(int(k) for k in rng.choice(len(cands), 2, replace=False))
    return cands[i], cands[j]


# -------------------------------------------------------------------- oracle

def discrete_oracle_integral(f, ts: TimeScale, a: float, b: float, side="delta", alpha: float | None = None) -> float:
    """Direct sums over a purely discrete scale: sum mu f, sum nu f, or their alpha blend."""
    if not ts.is_discrete:
        raise DenseSegmentPresent("the brute-force oracle needs a purely discrete scale")
    pts = ts.points()
    a, b = ts.window(a, b)
    delta = 0.0
    nabla = 0.0
    for k in range(len(pts) - 1):
        left, right = pts[k], pts[k + 1]
        if a <= left and right <= b:
            delta += (right - left) * f(left)
            nabla += (right - left) * f(right)
    if side == "delta":
        return delta
    if side == "nabla":
        return nabla
    if side == "diamond":
        return alpha * delta + (1.0 - alpha) * nabla
    raise ValueError(f"side must be delta, nabla or diamond, not {side!r}")


def _oracle_magnitude(f, ts, a, b):
    pts = [p for p in ts.points() if a <= p <= b]
    return sum((r - l) * (abs(f(l)) + abs(f(r))) for l, r in zip(pts, pts[1:]))


# -------------------------------------------------------------------- trials

@dataclass(frozen=True)
class Trial:
    property: str
    scale: TimeScale
    a: float
    b: float
    alpha: float
    functions: tuple[FunctionSpec, ...]
    options: tuple = ()
    rhs_factor: float = 1.0
    quad: QuadratureConfig = field(default_factory=QuadratureConfig)

    def option(self, key, default=None):
        return dict(self.options).get(key, default)

    def digest(self) -> str:
        return hashlib.sha256(repr(self).encode()).hexdigest()[:16]


@dataclass(frozen=True)
class Violation:
    trial_index: int
    trial: Trial
    report: InequalityReport

    @property
    def digest(self) -> str:
        return self.trial.digest()


@dataclass
class FuzzOutcome:
    property: str
    trials_run: int
    violations: list[Violation]
    worst_slack: float
    elapsed: float
    digest: str

    @property
    def ok(self) -> bool:
        return not self.violations


def _pick_alpha(rng, cfg):
    return float(cfg.alpha_grid[int(rng.integers(len(cfg.alpha_grid)))])


def make_trial(prop: str, index: int, cfg: FuzzConfig) -> Trial:
    rng = trial_rng(cfg.seed, index)
    if prop == "oracle_equiv":
        cfg = dataclasses.replace(cfg, point_probability=1.0)
    ts = gen_scale(rng, cfg)
    a, b = gen_window(rng, ts)
    alpha = _pick_alpha(rng, cfg)
    options = []
    if prop == "jensen":
        h = ("square", "abs", "exp")[int(rng.integers(3))]
        amp = EXP_AMPLITUDE if h == "exp" else AMPLITUDE
        funcs = (gen_function_spec(rng, ts, cfg, amp),)
        options.append(("h", h))
    elif prop == "mean_square":
        funcs = (gen_function_spec(rng, ts, cfg),)
        options.append(("centered", bool(rng.random() < 0.5)))
    elif prop in ("gruss", "integral_props", "product_rule"):
        funcs = (gen_function_spec(rng, ts, cfg), gen_function_spec(rng, ts, cfg))
        if prop == "integral_props":
            inner = [p for p in _breakpoints(ts) if a <= p <= b] + [float(x) for x in rng.uniform(a, b, 2) if x in ts]
            options += [("c", float(rng.uniform(-3, 3))), ("split", float(inner[int(rng.integers(len(inner)))])),
                        ("zero_weight", bool(rng.random() < 0.5))]
        if prop == "product_rule":
            options.append(("c", float(rng.uniform(-3, 3))))
            dense = [(lo, hi) for lo, hi in ts.segments if lo < hi]
            if dense:
                lo, hi = dense[int(rng.integers(len(dense)))]
                options.append(("dense_t", float(rng.uniform(lo + 0.25 * (hi - lo), hi - 0.25 * (hi - lo)))))
    else:
        funcs = (gen_function_spec(rng, ts, cfg),)
    return Trial(prop, ts, a, b, alpha, funcs, tuple(options), cfg.rhs_factor, cfg.quad)


def _breakpoints(ts):
    return sorted({x for seg in ts.segments for x in seg})


def _property_report(name, alpha, deviation, allowed, window, **details):
    return InequalityReport(
        name=name, alpha=alpha, lhs=deviation, rhs=allowed, slack=allowed - deviation,
        satisfied=deviation <= allowed, error_budget=0.0, bounds_used=(), window=window, details=details,
    )


def evaluate_trial(trial: Trial) -> InequalityReport:
    prop, ts, a, b, alpha, q = trial.property, trial.scale, trial.a, trial.b, trial.alpha, trial.quad
    fs = [spec.build() for spec in trial.functions]
    if prop == "gruss":
        return check_gruss(fs[0], fs[1], ts, a, b, alpha, cfg=q, rhs_factor=trial.rhs_factor)
    if prop == "jensen":
        return check_jensen(fs[0], trial.option("h"), ts, a, b, alpha, cfg=q, rhs_factor=trial.rhs_factor)
    if prop == "mean_square":
        f = fs[0]
        if trial.option("centered"):
            f = f - diamond_integral(f, ts, a, b, alpha, q) / (b - a)
        return check_mean_square_bound(f, ts, a, b, alpha, cfg=q, rhs_factor=trial.rhs_factor)
    if prop == "blend_identity":
        return _blend_identity(fs[0], ts, a, b, q)
    if prop == "integral_props":
        return _integral_props(trial, fs[0], fs[1])
    if prop == "product_rule":
        return _product_rule(trial, fs[0], fs[1])
    if prop == "oracle_equiv":
        return _oracle_equiv(trial, fs[0])
    raise ValueError(f"unknown property {prop!r}")


def _blend_identity(f, ts, a, b, q):
    d, n = delta_integral(f, ts, a, b, q), nabla_integral(f, ts, a, b, q)
    worst = 0.0
    allowed = 0.0
    for k in range(11):
        alpha = k / 10
        blend = alpha * d + (1.0 - alpha) * n
        dia = diamond_integral(f, ts, a, b, alpha, q)
        worst = max(worst, abs(dia - blend))
        allowed = max(allowed, 2.0 * math.ulp(max(abs(dia), abs(blend))))
    return _property_report("blend_identity", None, worst, allowed, (a, b))


def _integral_props(trial, f, g):
    ts, a, b, alpha, q = trial.scale, trial.a, trial.b, trial.alpha, trial.quad
    c, split = trial.option("c"), trial.option("split")

    def I(fun, lo=a, hi=b):
        return diamond_integral(fun, ts, lo, hi, alpha, q)

    mag = (b - a) * AMPLITUDE * (1.0 + abs(c)) ** 2 + 1.0
    allowed = EXACT_REL * mag + (0.0 if ts.is_discrete else 4.0 * q.abs_tol * (1.0 + abs(c)))
    i_f, i_g = I(f), I(g)
    checks = {
        "additivity": abs(I(f + g) - (i_f + i_g)),
        "scaling": abs(I(c * f) - c * i_f),
        "splitting": abs(i_f - (I(f, a, split) + I(f, split, b))),
        "nonnegativity": max(0.0, -I(f.square())),
        "monotonicity": max(0.0, i_f - I(f + g.square())),
    }
    if ts.is_discrete:
        checks["definiteness"] = _definiteness(trial, f)
    worst = max(checks, key=checks.get)
    return _property_report("integral_props", alpha, checks[worst], allowed, (a, b), worst_check=worst)


def _definiteness(trial, f):
    # a nonnegative table that vanishes on the window with probability 1/2
    ts, a, b, q = trial.scale, trial.a, trial.b, trial.quad
    alpha = trial.alpha if 0.0 < trial.alpha < 1.0 else 0.5
    zero = trial.option("zero_weight")
    values = {p: (0.0 if zero and a <= p <= b else f(p) ** 2 + 1e-6) for p in ts.points()}
    w = TableFunction(values)
    integral = diamond_integral(w, ts, a, b, alpha, q)
    vanishes = all(values[p] == 0.0 for p in ts.points() if a <= p <= b)
    return 0.0 if (integral == 0.0) == vanishes else 1.0


def _product_rule(trial, f, g):
    ts, alpha, q = trial.scale, trial.alpha, trial.quad
    c = trial.option("c")
    fg, fpg, cf = f * g, f + g, c * f
    worst = 0.0
    pts = [p for p in ts.points() if ts.classify(p).isolated]
    for t in pts:
        s, r = ts.sigma(t), ts.rho(t)
        gap = min(s - t, t - r)
        mf = max(abs(f(r)), abs(f(t)), abs(f(s)), 1.0)
        mg = max(abs(g(r)), abs(g(t)), abs(g(s)), 1.0)
        mag = (mf * mg + mf + mg) * (1.0 + abs(c)) / gap
        worst = max(worst, _rule_deviation(f, g, fg, fpg, cf, c, ts, t, alpha, q) / (EXACT_REL * mag))
    dense_t = trial.option("dense_t")
    if dense_t is not None:
        dev = _rule_deviation(f, g, fg, fpg, cf, c, ts, dense_t, alpha, q)
        mag = abs(diamond_derivative(fg, ts, dense_t, alpha, q)) + abs(f(dense_t) * g(dense_t)) + 1.0
        worst = max(worst, dev / (1e-6 * mag))
    return _property_report("product_rule", alpha, worst, 1.0, (ts.min, ts.max), points=len(pts))


def _rule_deviation(f, g, fg, fpg, cf, c, ts, t, alpha, q):
    f_dia = diamond_derivative(f, ts, t, alpha, q)
    g_dia = diamond_derivative(g, ts, t, alpha, q)
    rhs = f_dia * g(t) + alpha * f(ts.sigma(t)) * delta_derivative(g, ts, t, q) \
        + (1.0 - alpha) * f(ts.rho(t)) * nabla_derivative(g, ts, t, q)
    return max(
        abs(diamond_derivative(fg, ts, t, alpha, q) - rhs),
        abs(diamond_derivative(fpg, ts, t, alpha, q) - (f_dia + g_dia)),
        abs(diamond_derivative(cf, ts, t, alpha, q) - c * f_dia),
    )


def _oracle_equiv(trial, f):
    ts, a, b, q = trial.scale, trial.a, trial.b, trial.quad
    parts = integral_parts(f, ts, a, b, q)
    mag = _oracle_magnitude(f, ts, a, b) or 1.0
    od = discrete_oracle_integral(f, ts, a, b, "delta")
    on = discrete_oracle_integral(f, ts, a, b, "nabla")
    worst = max(abs(parts.delta - od), abs(parts.nabla - on)) / mag
    for alpha in sorted({trial.alpha, 0.0, 0.25, 0.5, 0.75, 1.0}):
        dev = abs(parts.diamond(alpha) - discrete_oracle_integral(f, ts, a, b, "diamond", alpha))
        worst = max(worst, dev / mag)
    return _property_report("oracle_equiv", trial.alpha, worst, EXACT_REL, (a, b))


# -------------------------------------------------------------------- suites

def run_property_suite(prop: str, cfg: FuzzConfig, shrink_violations: bool = True,
                       max_violations: int | None = None) -> FuzzOutcome:
    """Run ``cfg.trials`` independent trials of ``prop``; violations are shrunk."""
    if prop not in PROPERTIES:
        raise ValueError(f"unknown property {prop!r}; choose from {PROPERTIES}")
    start = time.perf_counter()
    violations = []
    worst = math.inf
    h = hashlib.sha256(f"{prop}:{cfg.seed}:{cfg.trials}".encode())
    run = 0
    for index in range(cfg.trials):
        trial = make_trial(prop, index, cfg)
        report = evaluate_trial(trial)
        run += 1
        worst = min(worst, report.slack)
        h.update(f"{index}:{report.lhs!r}:{report.rhs!r}:{report.satisfied}".encode())
        if not report.satisfied:
            v = Violation(index, trial, report)
            violations.append(shrink(v) if shrink_violations else v)
            if max_violations is not None and len(violations) >= max_violations:
                break
    return FuzzOutcome(prop, run, violations, worst, time.perf_counter() - start, h.hexdigest()[:16])


# ------------------------------------------------------------------ shrinking

def _clamp_window(ts, a, b):
    pts = []
    for lo, hi in ts.segments:
        if hi >= a and lo <= b:
            pts.append((max(lo, a), min(hi, b)))
    if not pts:
        return None
    na, nb = pts[0][0], pts[-1][1]
    return (na, nb) if na < nb else None


def _candidates(trial: Trial):
    ts = trial.scale
    # drop a segment
    if len(ts) > 1:
        for i in range(len(ts)):
            smaller = TimeScale(ts.segments[:i] + ts.segments[i + 1:])
            win = _clamp_window(smaller, trial.a, trial.b)
            if win is None:
                continue
            opts = trial.options
            split = trial.option("split")
            if split is not None and split not in smaller:
                continue
            dense_t = trial.option("dense_t")
            if dense_t is not None and dense_t not in smaller:
                opts = tuple(kv for kv in opts if kv[0] != "dense_t")
            yield dataclasses.replace(trial, scale=smaller, a=win[0], b=win[1], options=opts)
    # simplify a function
    for k, spec in enumerate(trial.functions):
        for simpler in spec.simpler():
            funcs = trial.functions[:k] + (simpler,) + trial.functions[k + 1:]
            yield dataclasses.replace(trial, functions=funcs)
    # narrow the window
    bps = [p for p in _breakpoints(ts) if trial.a < p < trial.b]
    split = trial.option("split")
    if bps:
        for na, nb in ((bps[0], trial.b), (trial.a, bps[-1])):
            if na < nb and (split is None or na <= split <= nb):
                yield dataclasses.replace(trial, a=na, b=nb)
    mid = 0.5 * (trial.a + trial.b)
    if mid in ts and ts.snap(mid) == mid:
        for na, nb in ((mid, trial.b), (trial.a, mid)):
            if split is None or na <= split <= nb:
                yield dataclasses.replace(trial, a=na, b=nb)


def _still_violates(trial):
    try:
        return evaluate_trial(trial)
    except Exception:  # a candidate outside the trial's preconditions is simply rejected
        return None


def shrink(violation: Violation, max_steps: int = MAX_SHRINK_STEPS) -> Violation:
    """Greedy reduction of a failing trial: drop segments, lower degrees, narrow the window."""
    report = evaluate_trial(violation.trial)
    if report.satisfied:
        raise NotAViolation(f"trial {violation.trial_index} does not violate {violation.trial.property}")
    current, current_report = violation.trial, report
    for _ in range(max_steps):
        for cand in _candidates(current):
            rep = _still_violates(cand)
            if rep is not None and not rep.satisfied:
                current, current_report = cand, rep
                break
        else:
            break
    return Violation(violation.trial_index, current, current_report)
