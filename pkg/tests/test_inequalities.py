import pytest
from hypothesis import assume, given, settings, strategies as st

from tscale import BoundsBox, TimeScale, check_gruss, check_jensen, check_mean_square_bound, discrete_gruss, quantum_gruss
from tscale.errors import BoundsViolated, InvalidBase, ShapeError
from tscale.inequalities import infer_bounds, quantum_points

UNIT = TimeScale.interval(0.0, 1.0)
INTS2 = TimeScale.from_points(range(3))


def test_gruss_on_reals():
    r = check_gruss("t", "t", UNIT, 0, 1, 0.5)
    assert abs(r.lhs - 1 / 12) <= 1e-9 and r.rhs == 0.25 and r.satisfied
    assert all(b.provenance == "inferred" for b in r.bounds_used)


def test_gruss_tight_on_two_points():
    r = check_gruss("t", "t", TimeScale.from_points([0, 1]), 0, 1, 1.0)
    assert r.lhs == 0.0  # delta window [0, 1) holds one point
    r = discrete_gruss([0, 1], [0, 1])
    assert r.lhs == r.rhs == 0.25 and r.slack == 0.0


def test_user_bounds():
    r = check_gruss("t", "t", UNIT, 0, 1, 1.0, BoundsBox(-1, 2), BoundsBox(0, 1))
    assert r.rhs == 0.25 * 3 * 1
    assert r.bounds_used[0].provenance == "user"
    with pytest.raises(BoundsViolated):
        check_gruss("t", "t", UNIT, 0, 1, 1.0, BoundsBox(0, 0.5), None)


def test_infer_bounds_interior_extremum():
    box = infer_bounds("t*(1 - t)", UNIT, 0, 1)
    assert box.lower == 0.0 and abs(box.upper - 0.25) <= 1e-15


def test_jensen_hand_instance():
    r = check_jensen("t", "square", INTS2, 0, 2, 0.5)
    assert (r.lhs, r.rhs) == (1.0, 1.5) and r.satisfied
    for h in ("abs", "exp"):
        assert check_jensen("t - 1", h, INTS2, 0, 2, 0.3).satisfied
    with pytest.raises(ValueError):
        check_jensen("t", "cube", INTS2, 0, 2, 0.5)


def test_mean_square_regimes():
    r = check_mean_square_bound("t - 1", INTS2, 0, 2, 0.5)
    assert (r.lhs, r.rhs) == (0.5, 1.0) and r.details["regime"] == "mean-zero"
    r = check_mean_square_bound("t", INTS2, 0, 2, 0.5)
    assert r.details["regime"] == "mean-nonzero" and r.satisfied


def test_discrete_gruss_shapes():
    with pytest.raises(ShapeError):
        discrete_gruss([1, 2], [1])
    with pytest.raises(ShapeError):
        discrete_gruss([], [])
    r = discrete_gruss([0, 1, 2], [0, 1, 2])
    assert abs(r.lhs - 2 / 3) <= 1e-15 and r.window == (0, 3)


def test_quantum():
    assert quantum_points(2, 0, 3) == [1, 2, 4, 8]
    r = quantum_gruss("t", "t", 2, 0, 2)
    assert abs(r.lhs - 8 / 9) <= 1e-15 and r.rhs == 2.25 and r.alpha == 0.0
    with pytest.raises(InvalidBase):
        quantum_gruss("t", "t", 1.0, 0, 2)


def test_rhs_factor_creates_violation():
    r = discrete_gruss([0, 1], [0, 1], rhs_factor=0.9)
    assert not r.satisfied and r.slack < 0


finite = st.floats(-1e3, 1e3, allow_nan=False)


@settings(max_examples=200)
@given(st.integers(1, 40).flatmap(lambda n: st.tuples(st.lists(finite, min_size=n, max_size=n),
                                                      st.lists(finite, min_size=n, max_size=n))))
def test_discrete_gruss_never_violated(xy):
    x, y = xy
    r = discrete_gruss(x, y)
    assert r.satisfied
    assert r.lhs <= r.rhs + r.error_budget + 1e-9


@settings(max_examples=100, deadline=None)
@given(st.lists(finite, min_size=2, max_size=12, unique=True), st.floats(0, 1), st.data())
def test_gruss_on_random_discrete_scales(points, alpha, data):
    ts = TimeScale.from_points(points)
    assume(len(ts) >= 2)  # points closer than the snap tolerance merge
    vals_f = data.draw(st.lists(finite, min_size=len(ts), max_size=len(ts)))
    vals_g = data.draw(st.lists(finite, min_size=len(ts), max_size=len(ts)))
    f = dict(zip(ts.points(), vals_f))
    g = dict(zip(ts.points(), vals_g))
    assert check_gruss(f, g, ts, ts.min, ts.max, alpha).satisfied
    assert check_jensen(f, "square", ts, ts.min, ts.max, alpha).satisfied
    assert check_mean_square_bound(f, ts, ts.min, ts.max, alpha).satisfied
