import numpy as np
import pytest

from hyperinfo import BooleanFunction, RealFunction

SEED = 20240601

# (criterion, name, passed, detail) rows printed once at the end of the run
ACCEPTANCE_RESULTS = []


def random_boolean(n, rng):
    return BooleanFunction(n, rng.integers(0, 2, 1 << n, dtype=np.uint8))


def random_real(n, rng):
    return RealFunction(n, rng.standard_normal(1 << n))


@pytest.fixture
def rng():
    return np.random.default_rng(SEED)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for idx, name, ok, detail in sorted(ACCEPTANCE_RESULTS):
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] {idx:2d} {name}: {detail}")
