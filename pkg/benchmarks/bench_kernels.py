"""Compare the compiled and pure-Python kernels on the hot paths.

    python3 benchmarks/bench_kernels.py [--repeat N]
"""

import argparse
import time

from tscale import _pykernels
from tscale.expr import compile_expr, parse_expression
from tscale.fuzz import FuzzConfig, run_property_suite

try:
    from tscale import _ckernels
except ImportError:
    _ckernels = None

EXPRESSIONS = [
    "t^2",
    "3.5*sin(1.7*t + 0.4) - 2",
    "((((0.3*((t - 1)/4) - 0.2)*((t - 1)/4) + 0.9)*((t - 1)/4) - 0.5)*((t - 1)/4) + 0.1)",
    "2*(0.1 + 0.4*(t/5) + 0.7*abs(t/5 - 0.3) - 0.2*abs(t/5 + 0.6))",
]


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        start = time.perf_counter()
        fn()
        times.append(time.perf_counter() - start)
    return min(times)


def bench_programs(repeat):
    print(f"{'expression':<44} {'op':<8} {'python':>10} {'cython':>10} {'speedup':>8}")
    for text in EXPRESSIONS:
        ops, consts, depth = compile_expr(parse_expression(text))
        progs = {"python": _pykernels.Program(ops, consts, depth)}
        if _ckernels is not None:
            progs["cython"] = _ckernels.Program(ops, consts, depth)
        cases = {
            "simpson": lambda p: p.simpson(-5.0, 5.0, 1e-10, 50),
            "extrema": lambda p: p.extrema(-5.0, 5.0, 1024),
        }
        for name, case in cases.items():
            t = {k: best_of(lambda p=p: case(p), repeat) for k, p in progs.items()}
            cy = t.get("cython", float("nan"))
            label = text if len(text) <= 42 else text[:39] + "..."
            print(f"{label:<44} {name:<8} {t['python'] * 1e3:>8.2f}ms {cy * 1e3:>8.2f}ms {t['python'] / cy:>7.1f}x")


def bench_suite(trials):
    start = time.perf_counter()
    out = run_property_suite("gruss", FuzzConfig(seed=42, trials=trials))
    elapsed = time.perf_counter() - start
    print(f"\ngruss suite, {trials} trials with the active backend: {elapsed:.2f}s ({len(out.violations)} violations)")


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--trials", type=int, default=1000)
    args = parser.parse_args()
    if _ckernels is None:
        print("compiled kernels unavailable; showing the Python backend only")
    bench_programs(args.repeat)
    bench_suite(args.trials)


if __name__ == "__main__":
    main()
