import json
import math

import numpy as np
import pytest

from conftest import random_boolean
from hyperinfo import BooleanFunction, NoiseParams
from hyperinfo import search
from hyperinfo.hypercube import dictator, majority, parity
from hyperinfo.info import mutual_information, sum_coordinate_mi

ALPHAS = (0.1, 0.25, 0.4)


def test_group_size():
    for n in range(0, 5):
        assert search.group_size(n) == 2 * (1 << n) * math.factorial(n)
        assert len(search.group_pointmaps(n)) * 2 == search.group_size(n)


def test_canonical_is_orbit_minimum():
    b = BooleanFunction.from_string("0111")
    assert search.canonicalize(b).to_string() == "0001"
    assert search.canonicalize(dictator(3, 2, sign=-1)) == search.canonicalize(dictator(3, 1))


def test_canonical_invariance(rng):
    for _ in range(50):
        n = int(rng.integers(1, 5))
        b = random_boolean(n, rng)
        perm = tuple(rng.permutation(n))
        mask = int(rng.integers(0, 1 << n))
        img = search.apply_group_element(b, perm, mask, bool(rng.integers(0, 2)))
        assert search.canonicalize(img) == search.canonicalize(b)


def test_mi_invariant_under_group(rng):
    p = NoiseParams(0.2)
    worst = 0.0
    for _ in range(1000):
        n = int(rng.integers(1, 7))
        b = random_boolean(n, rng)
        perm = tuple(rng.permutation(n))
        mask = int(rng.integers(0, 1 << n))
        img = search.apply_group_element(b, perm, mask, bool(rng.integers(0, 2)))
        worst = max(worst, abs(mutual_information(b, p) - mutual_information(img, p)),
                    abs(sum_coordinate_mi(b, p).sum_coord_mi - sum_coordinate_mi(img, p).sum_coord_mi))
    assert worst < 1e-12


def test_class_counts_and_sizes():
    for n, count in zip(range(0, 5), (1, 2, 4, 14, 222)):
        classes = search.enumerate_canonical(n)
        assert len(classes) == count
        assert int(classes.sizes.sum()) == 1 << (1 << n)
        assert np.all(np.diff(classes.codes.astype(np.int64)) > 0)


def test_class_members_are_canonical():
    classes = search.enumerate_canonical(3)
    for cls in classes:
        assert search.canonicalize(cls.representative) == cls.representative
    assert classes.index_of(majority(3)) == classes.index_of(BooleanFunction.from_values(-majority(3).values))


def test_long_run_guard():
    with pytest.raises(search.ResourceGuardError):
        search.enumerate_canonical(5)
    with pytest.raises(ValueError):
        search.enumerate_canonical(6)
    with pytest.raises(search.ResourceGuardError):
        search.score_all_functions(5, ALPHAS)


def test_class_search_matches_brute_force():
    for n in (1, 2, 3, 4):
        _, total, coord, _ = search.score_all_functions(n, ALPHAS)
        rep_ck = search.verify_ck(n, ALPHAS)
        rep_t2 = search.verify_thm2(n, ALPHAS)
        assert np.allclose(total.max(axis=0), [e["max_total_mi"] for e in rep_ck.per_alpha], atol=1e-15)
        assert np.allclose(coord.max(axis=0), [e["max_sum_coord_mi"] for e in rep_t2.per_alpha], atol=1e-15)


def test_merge_is_associative_and_commutative():
    task = search.SearchTask("thm2", 3, ALPHAS)
    classes = search.enumerate_canonical(3)
    a, b, c = (search.score_range(task, classes, lo, hi) for lo, hi in ((0, 5), (5, 9), (9, 14)))
    left = search.merge_states(search.merge_states(a, b), c)
    right = search.merge_states(a, search.merge_states(b, c))
    assert left == right
    assert search.merge_states(a, b) == search.merge_states(b, a)
    assert search.merge_states(search.neutral_state(len(ALPHAS)), a) == a
    whole = search.score_range(task, classes, 0, 14)
    assert left == whole


def test_report_outputs():
    rep = search.verify_thm2(3, ALPHAS)
    d = json.loads(rep.to_json())
    assert d["n_classes"] == 14 and d["violation_count"] == 0
    assert "wall_time" not in d
    assert "wall_time" in json.loads(rep.to_json(include_timing=True))
    lines = rep.to_csv().splitlines()
    assert lines[0] == "alpha,max_mi,max_sum_coord_mi,capacity,margin"
    assert all(float(line.split(",")[4]) >= 0 for line in lines[1:])


def test_reports_deterministic():
    a = search.verify_ck(3, ALPHAS).to_json()
    b = search.verify_ck(3, ALPHAS, shards=3).to_json()
    assert a == b


def test_checkpoint_round_trip(tmp_path):
    path = tmp_path / "c.json"
    search.verify_ck(3, ALPHAS, checkpoint_path=str(path), checkpoint_every=4)
    ck = search.Checkpoint.read(str(path))
    assert ck.cursor == 14 and ck.matches(search.SearchTask("ck", 3, ALPHAS))
    assert not ck.matches(search.SearchTask("thm2", 3, ALPHAS))


def test_checkpoint_errors(tmp_path):
    path = tmp_path / "c.json"
    path.write_text("{not json")
    with pytest.raises(search.CheckpointError):
        search.verify_ck(3, ALPHAS, checkpoint_path=str(path))
    path.unlink()
    search.verify_ck(2, ALPHAS, checkpoint_path=str(path))
    with pytest.raises(search.CheckpointError):
        search.verify_ck(3, ALPHAS, checkpoint_path=str(path))
    raw = json.loads(path.read_text())
    raw["format_version"] = 99
    path.write_text(json.dumps(raw))
    with pytest.raises(search.CheckpointError):
        search.verify_ck(2, ALPHAS, checkpoint_path=str(path))


def test_checkpoint_write_is_atomic(tmp_path, monkeypatch):
    path = tmp_path / "c.json"
    search.verify_ck(2, ALPHAS, checkpoint_path=str(path))
    before = path.read_text()
    ck = search.Checkpoint.read(str(path))

    def boom(*args, **kwargs):
        raise OSError("disk full")

    monkeypatch.setattr(search.os, "replace", boom)
    with pytest.raises(OSError):
        ck.write(str(path))
    assert path.read_text() == before
    assert sorted(p.name for p in tmp_path.iterdir()) == ["c.json"]


def test_escalation_marks_violations():
    rep = search.verify_ck(2, ALPHAS)
    entry = rep.per_alpha[0]
    b = parity(2)
    entry["violations"] = [{"kind": "ck", "class_id": 0, "table": b.to_string(),
                            "value": 1.0, "capacity": entry["capacity"]}]
    search._escalate(rep, search.SearchTask("ck", 2, ALPHAS))
    v = entry["violations"][0]
    assert v["oracle_confirms"] is False
    assert v["oracle_value"] == pytest.approx(mutual_information(b, NoiseParams(ALPHAS[0])), abs=1e-14)


def test_task_validation():
    with pytest.raises(ValueError):
        search.SearchTask("other", 3)
    with pytest.raises(ValueError):
        search.SearchTask("ck", 3, (0.7,))
    with pytest.raises(ValueError):
        search.run_sharded(search.SearchTask("ck", 2, ALPHAS), shards=0)


def test_thread_cap(monkeypatch):
    from hyperinfo._accel import thread_cap

    monkeypatch.setenv("HYPERINFO_THREADS", "3")
    assert thread_cap() == 3
    monkeypatch.setenv("HYPERINFO_THREADS", "zero")
    assert thread_cap() >= 1
