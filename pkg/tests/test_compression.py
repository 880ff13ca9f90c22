import json

import pytest

from conftest import random_boolean
from hyperinfo import BooleanFunction, NoiseParams, wht
from hyperinfo.compression import (
    PreconditionError,
    check_lemma_boolean_prop,
    check_lemma_fourier_prop,
    check_lemma_xi_pos,
    compress,
    is_monotone,
    is_monotone_all,
    monotonize,
    objective,
)
from hyperinfo.hypercube import dictator, majority, parity


def test_compress_small():
    # x_1 = -1 end holds the +1: compression moves it to the x_1 = +1 end
    b = BooleanFunction.from_string("01")
    assert compress(b, 1).to_string() == "10"
    assert compress(BooleanFunction.from_string("11"), 1).to_string() == "11"


def test_compress_parity_gives_dictator():
    assert compress(parity(2), 1) == dictator(2, 1)


def test_compress_is_idempotent(rng):
    for _ in range(50):
        n = int(rng.integers(1, 7))
        b = random_boolean(n, rng)
        j = int(rng.integers(1, n + 1))
        c = compress(b, j)
        assert compress(c, j) == c
        assert is_monotone(c, j)
        assert c.table.sum() == b.table.sum()


def test_fourier_prop(rng):
    for _ in range(100):
        n = int(rng.integers(1, 8))
        assert check_lemma_fourier_prop(random_boolean(n, rng), int(rng.integers(1, n + 1)))


def test_xi_pos_precondition():
    with pytest.raises(PreconditionError):
        check_lemma_xi_pos(parity(2))
    assert check_lemma_xi_pos(majority(3))


def test_boolean_prop(rng):
    for _ in range(100):
        assert check_lemma_boolean_prop(random_boolean(int(rng.integers(1, 8)), rng))


def test_monotonize_trace(rng):
    p = NoiseParams(0.3)
    for _ in range(30):
        n = int(rng.integers(1, 7))
        b = random_boolean(n, rng)
        trace = monotonize(b, p)
        assert is_monotone_all(trace.final)
        assert trace.is_nondecreasing()
        assert trace.steps[0][1] == pytest.approx(objective(b, p))
        assert trace.steps[-1][2] == pytest.approx(objective(trace.final, p))
        assert trace.final.table.sum() == b.table.sum()
        records = [json.loads(line) for line in trace.to_jsonl().splitlines()]
        assert len(records) == len(trace.steps)
        assert set(records[0]) == {"coord", "L_before", "L_after"}


def test_monotone_input_is_fixed():
    trace = monotonize(majority(5), NoiseParams(0.2))
    assert trace.final == majority(5) and trace.effective_steps == 0


def test_coordinate_range():
    with pytest.raises(ValueError):
        compress(majority(3), 4)
    with pytest.raises(ValueError):
        is_monotone(majority(3), 0)


def test_monotone_functions_have_nonnegative_level_one():
    for code in range(1 << 8):
        b = BooleanFunction.from_code(3, code)
        if is_monotone_all(b):
            s = wht(b)
            assert min(s[1], s[2], s[4]) >= 0.0
