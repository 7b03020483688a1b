import random

import pytest

from tscale.expr import CONSTANTS, FUNCTIONS, Bin, Call, Const, Neg, Num, T

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)


@pytest.fixture
def record():
    """Log one pass/fail line per acceptance criterion."""

    def _record(number, ok, detail):
        line = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return ok

    return _record


def random_expr(rng: random.Random, depth: int = 0):
    if depth >= 4 or rng.random() < 0.25 + 0.15 * depth:
        kind = rng.random()
        if kind < 0.45:
            return T
        if kind < 0.55:
            return Const(rng.choice(sorted(CONSTANTS)))
        return Num(rng.choice([float(rng.randint(0, 20)), round(rng.uniform(0, 10), rng.randint(1, 4)), 1e-3, 2.5e7]))
    kind = rng.random()
    if kind < 0.6:
        op = rng.choice("+-*/^")
        return Bin(op, random_expr(rng, depth + 1), random_expr(rng, depth + 1))
    if kind < 0.8:
        return Call(rng.choice(FUNCTIONS), random_expr(rng, depth + 1))
    return Neg(random_expr(rng, depth + 1))


def expression_corpus(n=200, seed=20240611):
    rng = random.Random(seed)
    return [random_expr(rng) for _ in range(n)]


@pytest.fixture(scope="session")
def corpus():
    return expression_corpus()


SYNTAX_ERROR_CASES = [
    ("t +* 2", 3),  # operator where an operand belongs
    ("sin(t", 5),  # unclosed call at end of input
    ("(t + 1))", 7),  # stray closing parenthesis
]
