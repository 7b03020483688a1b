"""The eleven acceptance criteria, each printing one PASS/FAIL line."""

import math
import time

import numpy as np
import pytest

from conftest import SYNTAX_ERROR_CASES
from tscale import (
    TableFunction,
    TimeScale,
    check_gruss,
    discrete_gruss,
    ftc_defect,
    parse_expression,
    quantum_gruss,
    to_text,
)
from tscale.errors import ExprSyntaxError
from tscale.expr import tokenize
from tscale.fuzz import FuzzConfig, run_property_suite
from tscale.inequalities import check_jensen, check_mean_square_bound

SEED = 42
ALPHA_GRID_11 = [k / 10 for k in range(11)]


def test_c01_discrete_oracle_equivalence(record):
    cfg = FuzzConfig(seed=SEED, trials=1000, max_segments=50, function_families=("table",), point_probability=1.0)
    start = time.perf_counter()
    out = run_property_suite("oracle_equiv", cfg)
    elapsed = time.perf_counter() - start
    ok = out.ok and out.trials_run == 1000 and elapsed < 5.0
    record(1, ok, f"1000 discrete trials, {len(out.violations)} mismatches beyond 1e-12 rel, {elapsed:.2f}s (<5s)")
    assert ok


def test_c02_classical_reduction(record):
    ts = TimeScale.interval(0.0, 1.0)
    reports = [check_gruss("t", "t", ts, 0.0, 1.0, a) for a in ALPHA_GRID_11]
    lhs_ok = all(abs(r.lhs - 1 / 12) <= 1e-9 and abs(r.rhs - 0.25) <= 1e-9 for r in reports)
    spread = max(r.lhs for r in reports) - min(r.lhs for r in reports)
    inv_ok = spread <= 2 * max(r.error_budget for r in reports)
    ok = lhs_ok and inv_ok and all(r.satisfied for r in reports)
    record(2, ok, f"lhs=1/12, rhs=1/4 on 11 alphas; lhs spread {spread:.2e}")
    assert ok


def test_c03_gruss_suite(record):
    start = time.perf_counter()
    out = run_property_suite("gruss", FuzzConfig(seed=SEED, trials=10_000))
    elapsed = time.perf_counter() - start
    ok = out.ok and out.trials_run == 10_000 and elapsed < 60.0
    record(3, ok, f"10000 trials, {len(out.violations)} violations, {elapsed:.1f}s (<60s)")
    assert ok


def test_c04_tightness(record):
    r = discrete_gruss([0.0, 1.0], [0.0, 1.0])
    ok = r.lhs == 0.25 and r.rhs == 0.25 and abs(r.slack) <= 1e-15 and r.satisfied
    record(4, ok, f"lhs={r.lhs!r} rhs={r.rhs!r} slack={r.slack!r}")
    assert ok


def _quantum_instance(rng):
    q = float(rng.choice([2.0, 3.0]))
    m = int(rng.integers(-4, 5))
    n = m + int(rng.integers(1, 11))
    pts = [q ** i for i in range(m, n + 1)]
    f = TableFunction({p: float(rng.uniform(-5, 5)) for p in pts})
    g = TableFunction({p: float(rng.uniform(-5, 5)) for p in pts})
    return q, m, n, f, g, TimeScale.from_points(pts)


def _rel(x, y, scale):
    # relative to the operands of the subtraction, since lhs itself can cancel to zero
    return abs(x - y) / max(scale, abs(x), abs(y), 1e-300)


def test_c05_quantum_gruss(record):
    rng = np.random.default_rng(SEED)
    worst = 0.0
    all_sat = True
    for _ in range(500):
        q, m, n, f, g, ts = _quantum_instance(rng)
        qr = quantum_gruss(f, g, q, m, n)
        gr = check_gruss(f, g, ts, q ** m, q ** n, 0.0)
        scale = abs(qr.details["weighted_mean_fg"]) + abs(qr.details["product_of_means"])
        worst = max(worst, _rel(qr.lhs, gr.lhs, scale), _rel(qr.rhs, gr.rhs, 0.0))
        all_sat &= qr.satisfied and gr.satisfied
    w = quantum_gruss("t", "t", 2.0, 0, 2)
    worked = abs(w.lhs - 8 / 9) <= 1e-15 and w.rhs == 2.25
    ok = worst <= 1e-12 and all_sat and worked
    record(5, ok, f"500 instances, worst rel diff {worst:.1e}; q=2,m=0,n=2: lhs={w.lhs:.17g} rhs={w.rhs!r}")
    assert ok


def test_c06_jensen(record):
    out = run_property_suite("jensen", FuzzConfig(seed=SEED, trials=5000))
    ts = TimeScale.from_points(range(0, 3))
    r = check_jensen("t", "square", ts, 0.0, 2.0, 0.5)
    ok = out.ok and r.lhs == 1.0 and r.rhs == 1.5
    record(6, ok, f"5000 trials, {len(out.violations)} violations; hand instance lhs={r.lhs!r} rhs={r.rhs!r}")
    assert ok


def test_c07_mean_square(record):
    out = run_property_suite("mean_square", FuzzConfig(seed=SEED, trials=5000))
    ts = TimeScale.from_points(range(0, 3))
    r = check_mean_square_bound("t - 1", ts, 0.0, 2.0, 0.5)
    ok = out.ok and r.lhs == 0.5 and r.rhs == 1.0
    record(7, ok, f"5000 trials, {len(out.violations)} violations; hand instance lhs={r.lhs!r} rhs={r.rhs!r}")
    assert ok


def test_c08_ftc_failure(record):
    ints = TimeScale.from_points(range(0, 11))
    defects = [ftc_defect("t^2", ints, t, 0.5) for t in range(1, 10)]
    disc_ok = all(abs(d - 0.5) <= 1e-12 for d in defects)
    real = ftc_defect("t^2", TimeScale.interval(0.0, 1.0), 0.5, 0.5)
    ok = disc_ok and abs(real) <= 1e-6
    record(8, ok, f"integers: max |defect-0.5| = {max(abs(d - 0.5) for d in defects):.1e}; reals: {real:.1e}")
    assert ok


def test_c09_algebraic_identities(record):
    cfg = FuzzConfig(seed=SEED, trials=1000, point_probability=1.0)
    rules = run_property_suite("product_rule", cfg)
    blend = run_property_suite("blend_identity", cfg)
    ok = rules.ok and blend.ok
    record(9, ok, f"sum/constant/product rules {len(rules.violations)} violations, blend identity "
                  f"{len(blend.violations)} violations over 1000 discrete trials each")
    assert ok


@pytest.mark.parametrize("prop", ["gruss", "jensen", "mean_square"])
def test_c10_fault_injection(record, prop):
    cfg = FuzzConfig(seed=SEED, trials=10_000, rhs_factor=0.9)
    out = run_property_suite(prop, cfg, shrink_violations=False, max_violations=1)
    ok = not out.ok
    first = out.violations[0].trial_index if out.violations else None
    record(10, ok, f"{prop} with rhs x0.9: violation found at trial {first}")
    assert ok


def test_c11_parser(record, corpus):
    mismatches = 0
    for node in corpus:
        text = to_text(node)
        spaced = "  ".join(tok.text for tok in tokenize(text))
        try:
            same = to_text(parse_expression(text)) == text and to_text(parse_expression(spaced)) == text
        except ExprSyntaxError:
            same = False
        mismatches += not same
    offsets = []
    for text, expected in SYNTAX_ERROR_CASES:
        with pytest.raises(ExprSyntaxError) as info:
            parse_expression(text)
        offsets.append(info.value.offset == expected)
    ok = mismatches == 0 and len(corpus) == 200 and all(offsets)
    record(11, ok, f"{len(corpus) - mismatches}/200 round-trips, {sum(offsets)}/3 error offsets")
    assert ok


def test_discrete_gruss_matches_integer_embedding():
    rng = np.random.default_rng(SEED)
    for _ in range(200):
        n = int(rng.integers(1, 30))
        x, y = rng.uniform(-3, 3, n).tolist(), rng.uniform(-3, 3, n).tolist()
        ts = TimeScale.from_points(range(n + 1))
        f = TableFunction({**{i: x[i] for i in range(n)}, n: x[-1]})
        g = TableFunction({**{i: y[i] for i in range(n)}, n: y[-1]})
        d = discrete_gruss(x, y)
        c = check_gruss(f, g, ts, 0.0, float(n), 1.0)
        assert math.isclose(d.lhs, c.lhs, rel_tol=1e-12, abs_tol=1e-12)
        assert math.isclose(d.rhs, c.rhs, rel_tol=1e-12, abs_tol=1e-12)
