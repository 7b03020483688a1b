import pytest
from hypothesis import given, strategies as st

from tscale.errors import EmptyScale, MalformedSegment, PointNotInScale, ReversedRange
from tscale.timescale import TimeScale, canonicalize, snap_tolerance

MIXED = canonicalize([(0, 1), (2, 2)])
INTS = TimeScale.from_points(range(6))


@pytest.mark.parametrize("raw, segs", [
    ([(0, 1), (1, 2)], ((0, 2),)),
    ([(2, 2), (0, 1)], ((0, 1), (2, 2))),
    ([(0, 1), (0.5, 3), (5, 5)], ((0, 3), (5, 5))),
])
def test_canonicalize(raw, segs):
    assert canonicalize(raw).segments == segs


def test_canonicalize_errors():
    with pytest.raises(EmptyScale):
        canonicalize([])
    with pytest.raises(MalformedSegment):
        canonicalize([(1, 0)])
    with pytest.raises(MalformedSegment):
        TimeScale(((0, 2), (1, 3)))


def test_jumps_on_integers():
    assert INTS.sigma(3) == 4 and INTS.rho(3) == 2
    assert INTS.graininess(3) == (1, 1)
    assert INTS.classify(3).isolated


def test_jumps_on_mixed_scale():
    assert MIXED.sigma(1) == 2 and MIXED.sigma(0.5) == 0.5
    assert MIXED.sigma(2) == 2  # maximum is its own successor
    assert MIXED.rho(2) == 1 and MIXED.rho(0) == 0
    assert MIXED.graininess(1) == (1, 0)
    c = MIXED.classify(2)
    assert (c.left, c.right) == ("scattered", "dense")
    assert MIXED.classify(0.5).dense


def test_membership_and_snapping():
    assert 0.5 in MIXED and 1.5 not in MIXED
    assert MIXED.snap(1 + 1e-13) == 1.0
    assert MIXED.snap(2 - 1e-10) == 2.0
    with pytest.raises(PointNotInScale):
        MIXED.sigma(1.5)


def test_windows():
    ts = canonicalize([(0, 0), (1, 2), (3, 3), (4, 4)])
    assert ts.scattered_points(0, 4, "right") == [0.0, 2.0, 3.0]
    assert ts.scattered_points(0, 4, "left") == [1.0, 3.0, 4.0]
    assert ts.dense_segments(0, 4) == [(1, 2)]
    assert ts.dense_segments(1.5, 3) == [(1.5, 2)]
    with pytest.raises(ReversedRange):
        ts.window(3, 1)
    assert ts.restrict(1.5, 3).segments == ((1.5, 2), (3, 3))


def test_domains():
    assert INTS.delta_domain().max == 4
    assert INTS.nabla_domain().min == 1
    assert TimeScale.interval(0, 1).delta_domain() == TimeScale.interval(0, 1)
    with pytest.raises(EmptyScale):
        TimeScale.from_points([3]).delta_domain()


def test_to_spec_roundtrip():
    spec = MIXED.to_spec()
    assert spec == {"intervals": [[0, 1]], "points": [2]}
    rebuilt = canonicalize([tuple(s) for s in spec["intervals"]] + [(p, p) for p in spec["points"]])
    assert rebuilt == MIXED


segments = st.lists(
    st.tuples(st.floats(-100, 100), st.floats(0, 10)).map(lambda p: (p[0], p[0] + p[1])),
    min_size=1, max_size=8,
)


@given(segments)
def test_canonical_invariants(raw):
    ts = canonicalize(raw)
    for (lo, hi), (nlo, _) in zip(ts.segments, ts.segments[1:]):
        assert lo <= hi < nlo
    assert ts.min == min(a for a, _ in raw)
    assert abs(ts.max - max(b for _, b in raw)) <= snap_tolerance(ts.max)  # sub-tolerance tails collapse


@given(segments, st.data())
def test_jump_invariants(raw, data):
    ts = canonicalize(raw)
    lo, hi = ts.segments[data.draw(st.integers(0, len(ts) - 1))]
    t = ts.snap(data.draw(st.floats(lo, hi)))  # sub-tolerance offsets snap to the endpoint
    s, r = ts.sigma(t), ts.rho(t)
    assert r <= t <= s and s in ts and r in ts
    mu, nu = ts.graininess(t)
    c = ts.classify(t)
    assert (c.right == "scattered") == (mu > 0)
    assert (c.left == "scattered") == (nu > 0)
    # nothing of the scale lies strictly between rho(t) and sigma(t) except t
    for a, b in ts.segments:
        assert b <= r or a >= s or (a <= t <= b)


@given(segments)
def test_canonicalize_idempotent(raw):
    ts = canonicalize(raw)
    assert canonicalize(ts.segments) == ts


@given(segments)
def test_jumps_invert_and_are_monotone(raw):
    ts = canonicalize(raw)
    ends = sorted({x for seg in ts.segments for x in seg})
    for t in ends:
        if ts.sigma(t) > t:
            assert ts.rho(ts.sigma(t)) == t
        if ts.rho(t) < t:
            assert ts.sigma(ts.rho(t)) == t
    sig = [ts.sigma(t) for t in ends]
    rho = [ts.rho(t) for t in ends]
    assert sig == sorted(sig) and rho == sorted(rho)


@given(segments)
def test_measure_decomposition(raw):
    ts = canonicalize(raw)
    jumps = sum(ts.graininess(t)[0] for t in ts.scattered_points(ts.min, ts.max, "right"))
    dense = sum(hi - lo for lo, hi in ts.dense_segments(ts.min, ts.max))
    assert abs(jumps + dense - (ts.max - ts.min)) <= 1e-12 * max(1.0, ts.max - ts.min)


def test_sub_tolerance_features_resolve():
    assert canonicalize([(0, 0), (1e-13, 1e-13)]).segments == ((0, 0),)
    assert canonicalize([(5, 5 + 1e-12)]).segments == ((5, 5),)
    assert canonicalize([(0, 1), (1 + 1e-10, 2)]).segments == ((0, 2),)
    assert canonicalize([(0, 1), (1.001, 2)]).segments == ((0, 1), (1.001, 2))
