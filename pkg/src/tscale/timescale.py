"""Bounded time scales stored as a canonical union of disjoint closed intervals.

A degenerate interval ``(p, p)`` is an isolated point. Query points are
snapped onto the scale within a relative tolerance of 1e-9 (absolute 1e-12
near zero), so values that went through decimal text still resolve.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .errors import EmptyScale, MalformedSegment, PointNotInScale, ReversedRange

REL_SNAP = 1e-9
ABS_SNAP = 1e-12

Segment = tuple[float, float]


def snap_tolerance(t: float) -> float:
    return max(REL_SNAP * abs(t), ABS_SNAP)


@dataclass(frozen=True)
class PointClass:
    right: str  # "dense" | "scattered"
    left: str

    @property
    def isolated(self) -> bool:
        return self.right == "scattered" and self.left == "scattered"

    @property
    def dense(self) -> bool:
        return self.right == "dense" and self.left == "dense"

    def label(self) -> str:
        if self.isolated:
            return "isolated"
        if self.dense:
            return "dense"
        return f"right-{self.right}/left-{self.left}"


def canonicalize(raw_segments: Iterable[Sequence[float]]) -> "TimeScale":
    """Sort, merge overlapping or touching intervals and return a TimeScale.

    Features finer than the snap tolerance are resolved as touching: such gaps
    close and such segments become points.
    """
    segs = []
    for seg in raw_segments:
        lo, hi = float(seg[0]), float(seg[1])
        if math.isnan(lo) or math.isnan(hi) or math.isinf(lo) or math.isinf(hi):
            raise MalformedSegment(f"non-finite segment {seg!r}")
        if lo > hi:
            raise MalformedSegment(f"segment {seg!r} has lower > upper")
        segs.append((lo, hi))
    if not segs:
        raise EmptyScale("a time scale needs at least one segment")
    segs.sort()
    runs = [[*segs[0], segs[0][0] < segs[0][1]]]  # lo, hi, contains a genuine interval
    for lo, hi in segs[1:]:
        run = runs[-1]
        if lo <= run[1] or lo - run[1] <= snap_tolerance(run[1]):
            # gaps narrower than the snap tolerance cannot be resolved by membership queries
            run[1] = max(run[1], hi)
            run[2] = run[2] or lo < hi
        else:
            runs.append([lo, hi, lo < hi])
    # a run of snapped-together points stays a point, as does a sub-tolerance segment
    merged = tuple((lo, lo) if not dense or hi - lo <= snap_tolerance(hi) else (lo, hi) for lo, hi, dense in runs)
    return TimeScale(merged)


@dataclass(frozen=True)
class TimeScale:
    """Immutable canonical time scale. Build with :func:`canonicalize`."""

    segments: tuple[Segment, ...]
    _los: tuple[float, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not self.segments:
            raise EmptyScale("a time scale needs at least one segment")
        for (lo, hi), nxt in zip(self.segments, self.segments[1:] + ((math.inf, math.inf),)):
            if lo > hi:
                raise MalformedSegment(f"segment {(lo, hi)!r} has lower > upper")
            if not hi < nxt[0]:
                raise MalformedSegment("segments must be sorted and disjoint; use canonicalize()")
        object.__setattr__(self, "_los", tuple(lo for lo, _ in self.segments))

    # construction helpers

    @classmethod
    def from_points(cls, points: Iterable[float]) -> "TimeScale":
        return canonicalize((p, p) for p in points)

    @classmethod
    def interval(cls, lo: float, hi: float) -> "TimeScale":
        return canonicalize([(lo, hi)])

    # basic shape

    @property
    def min(self) -> float:
        return self.segments[0][0]

    @property
    def max(self) -> float:
        return self.segments[-1][1]

    @property
    def is_discrete(self) -> bool:
        return all(lo == hi for lo, hi in self.segments)

    def points(self) -> list[float]:
        """Isolated points (degenerate segments), ascending."""
        return [lo for lo, hi in self.segments if lo == hi]

    def __len__(self):
        return len(self.segments)

    # membership

    def locate(self, t: float) -> tuple[float, int]:
        """Snap ``t`` onto the scale; return the snapped point and its segment index."""
        t = float(t)
        tol = snap_tolerance(t)
        i = bisect.bisect_right(self._los, t) - 1
        best = None
        if i >= 0:
            lo, hi = self.segments[i]
            if t <= hi:
                if t - lo <= tol:
                    return lo, i
                if hi - t <= tol:
                    return hi, i
                return t, i
            best = (t - hi, hi, i)
        if i + 1 < len(self.segments):
            d = self.segments[i + 1][0] - t
            if best is None or d < best[0]:
                best = (d, self.segments[i + 1][0], i + 1)
        if best is not None and best[0] <= tol:
            return best[1], best[2]
        raise PointNotInScale(t)

    def snap(self, t: float) -> float:
        return self.locate(t)[0]

    def __contains__(self, t) -> bool:
        try:
            self.locate(t)
        except PointNotInScale:
            return False
        return True

    # jump operators

    def sigma(self, t: float) -> float:
        t, i = self.locate(t)
        if t < self.segments[i][1] or i == len(self.segments) - 1:
            return t
        return self.segments[i + 1][0]

    def rho(self, t: float) -> float:
        t, i = self.locate(t)
        if t > self.segments[i][0] or i == 0:
            return t
        return self.segments[i - 1][1]

    def graininess(self, t: float) -> tuple[float, float]:
        t = self.snap(t)
        return self.sigma(t) - t, t - self.rho(t)

    def classify(self, t: float) -> PointClass:
        mu, nu = self.graininess(t)
        return PointClass(
            right="scattered" if mu > 0 else "dense",
            left="scattered" if nu > 0 else "dense",
        )

    # windows

    def window(self, a: float, b: float) -> tuple[float, float]:
        a, b = self.snap(a), self.snap(b)
        if a > b:
            raise ReversedRange(f"window start {a!r} exceeds end {b!r}")
        return a, b

    def scattered_points(self, a: float, b: float, side: str = "right") -> list[float]:
        """Right-scattered points of [a, b) or left-scattered points of (a, b]."""
        a, b = self.window(a, b)
        segs = self.segments
        if side == "right":
            return [hi for _, hi in segs[:-1] if a <= hi < b]
        if side == "left":
            return [lo for lo, _ in segs[1:] if a < lo <= b]
        raise ValueError(f"side must be 'right' or 'left', not {side!r}")

    def dense_segments(self, a: float, b: float) -> list[Segment]:
        """Maximal non-degenerate pieces of the scale inside [a, b]."""
        a, b = self.window(a, b)
        out = []
        for lo, hi in self.segments:
            if hi <= a or lo >= b or lo == hi:
                continue
            lo, hi = max(lo, a), min(hi, b)
            if lo < hi:
                out.append((lo, hi))
        return out

    def isolated_points(self, a: float, b: float) -> list[float]:
        """Points of [a, b] that lie in no dense piece of the window."""
        a, b = self.window(a, b)
        pts = [lo for lo, hi in self.segments if lo == hi and a <= lo <= b]
        # a window that only touches a dense segment at one endpoint
        for lo, hi in self.segments:
            if lo < hi:
                if hi == a and a not in pts:
                    pts.append(a)
                if lo == b and b not in pts:
                    pts.append(b)
        return sorted(pts)

    def restrict(self, a: float, b: float) -> "TimeScale":
        """The scale intersected with [a, b]."""
        a, b = self.window(a, b)
        pieces = [(max(lo, a), min(hi, b)) for lo, hi in self.segments if hi >= a and lo <= b]
        return canonicalize(pieces)

    # derivative domains

    def delta_domain(self) -> "TimeScale":
        """The scale with a left-scattered maximum removed."""
        if len(self.segments) == 1 and self.segments[0][0] == self.segments[0][1]:
            raise EmptyScale("a single-point scale has no delta domain")
        last = self.segments[-1]
        if last[0] == last[1] and len(self.segments) > 1:
            return TimeScale(self.segments[:-1])
        return self

    def nabla_domain(self) -> "TimeScale":
        """The scale with a right-scattered minimum removed."""
        if len(self.segments) == 1 and self.segments[0][0] == self.segments[0][1]:
            raise EmptyScale("a single-point scale has no nabla domain")
        first = self.segments[0]
        if first[0] == first[1] and len(self.segments) > 1:
            return TimeScale(self.segments[1:])
        return self

    # serialization

    def to_spec(self) -> dict:
        return {
            "intervals": [[lo, hi] for lo, hi in self.segments if lo < hi],
            "points": [lo for lo, hi in self.segments if lo == hi],
        }


sigma = TimeScale.sigma
rho = TimeScale.rho
graininess = TimeScale.graininess
classify = TimeScale.classify
scattered_points = TimeScale.scattered_points
dense_segments = TimeScale.dense_segments
delta_domain = TimeScale.delta_domain
nabla_domain = TimeScale.nabla_domain
