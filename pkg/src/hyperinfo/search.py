"""Exhaustive verification over all Boolean functions of a few variables.

Mutual information through a memoryless BSC is unchanged by permuting inputs,
negating inputs, or negating the output, so every function is scored through
one representative of its orbit under that group (size ``2 * 2^n * n!``).
Representatives are the lexicographically smallest truth table in the orbit.

The class stream is scored in blocks.  Within a block, contiguous ranges go to
shard workers (threads; the numba kernels release the GIL) and are merged by
an associative, commutative reduction, so the final report does not depend on
the shard count.  After every block a checkpoint is written atomically; a
resumed run reproduces the uninterrupted report exactly.
"""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
import csv
import io
import itertools
import json
import logging
import math
import os
import tempfile
import time

import numpy as np

from . import kernels
from ._accel import HAVE_NUMBA, thread_cap
from .hypercube import BooleanFunction, NoiseParams, dictator
from .info import capacity, mutual_information_joint
from .oq1 import bias_K, extreme_point_bound, m_k

logger = logging.getLogger(__name__)

FORMAT_VERSION = 1
VIOLATION_TOL = 1e-10
DEFAULT_ALPHA_GRID = (0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.35, 0.4, 0.45, 0.49)
MAX_CANON_N = 5
MAX_IN_MEMORY_N = 4


class ResourceGuardError(RuntimeError):
    """The request would need a long run or a large allocation that was not allowed."""


class CheckpointError(RuntimeError):
    """Checkpoint file is unreadable or belongs to a different run."""


# --------------------------------------------------------------------------
# Symmetry group

@lru_cache(maxsize=None)
def group_pointmaps(n):
    """Point maps of all input permutations composed with input negations.

    Row ``g`` maps a target point index to its source, so the transformed table
    is ``t[pointmaps[g]]``.  Output negation is applied separately.
    """
    N = 1 << n
    idx = np.arange(N)
    bits = (idx[:, None] >> np.arange(n)[None, :]) & 1
    maps = []
    for perm in itertools.permutations(range(n)):
        permuted = (bits[:, list(perm)] << np.arange(n)[None, :]).sum(axis=1) if n else idx
        for mask in range(N):
            maps.append(permuted ^ mask)
    out = np.ascontiguousarray(np.array(maps, dtype=np.int64))
    out.flags.writeable = False
    return out


def group_size(n):
    return 2 * (1 << n) * math.factorial(n)


def apply_group_element(b, perm, mask, negate_output=False):
    """The function x -> (+-) b(sigma(x)) for one group element."""
    N = 1 << b.n
    idx = np.arange(N)
    bits = (idx[:, None] >> np.arange(b.n)[None, :]) & 1
    src = (bits[:, list(perm)] << np.arange(b.n)[None, :]).sum(axis=1) ^ mask
    table = b.table[src]
    return BooleanFunction(b.n, table ^ 1 if negate_output else table)


def canonicalize(b):
    """Lexicographically smallest truth table in the orbit of ``b``."""
    if b.n > MAX_CANON_N:
        raise ValueError(f"canonicalize supports n <= {MAX_CANON_N}, got n={b.n}")
    code = kernels.canonical_code(b.code, group_pointmaps(b.n))
    return BooleanFunction.from_code(b.n, code)


@dataclass(frozen=True)
class CanonicalClass:
    class_id: int
    representative: BooleanFunction
    orbit_size: int


@dataclass(frozen=True)
class CanonicalClasses:
    """All classes for one n, in increasing representative order."""

    n: int
    codes: np.ndarray
    sizes: np.ndarray

    def __len__(self):
        return len(self.codes)

    def __iter__(self):
        for i, (code, size) in enumerate(zip(self.codes, self.sizes)):
            yield CanonicalClass(i, BooleanFunction.from_code(self.n, int(code)), int(size))

    def index_of(self, b):
        code = canonicalize(b).code
        i = int(np.searchsorted(self.codes, np.uint64(code)))
        if i >= len(self.codes) or int(self.codes[i]) != code:
            raise KeyError("no class for this function")
        return i

    def tables(self, start=0, stop=None):
        return kernels.codes_to_bits(self.codes[start:stop], 1 << self.n)


@lru_cache(maxsize=None)
def _enumerate_cached(n):
    codes, sizes = kernels.enumerate_orbits(n, group_pointmaps(n))
    codes = np.asarray(codes, dtype=np.uint64)
    sizes = np.asarray(sizes, dtype=np.int64)
    codes.flags.writeable = False
    sizes.flags.writeable = False
    return CanonicalClasses(n, codes, sizes)


def enumerate_canonical(n, allow_long_run=False):
    """Every orbit of Boolean functions on n variables, in deterministic order."""
    if not 0 <= n <= MAX_CANON_N:
        raise ValueError(f"enumerate_canonical supports 0 <= n <= {MAX_CANON_N}")
    if n > MAX_IN_MEMORY_N:
        if not allow_long_run:
            raise ResourceGuardError("n = 5 scans 2^32 functions; pass allow_long_run to proceed")
        if not HAVE_NUMBA:
            raise ResourceGuardError("n = 5 enumeration needs the numba backend")
    return _enumerate_cached(n)


def dictator_class_id(classes):
    return classes.index_of(dictator(classes.n, 1))


# --------------------------------------------------------------------------
# Partial results and their merge

def _empty_alpha_state():
    return {
        "max_total": None, "total_cands": [],
        "max_coord": None, "coord_cands": [],
        "eq_total": [], "eq_coord": [],
        "violations": [], "bias_violations": 0, "chain_violations": 0,
    }


def neutral_state(n_alpha):
    return [_empty_alpha_state() for _ in range(n_alpha)]


def _max_none(a, b):
    if a is None:
        return b
    if b is None:
        return a
    return max(a, b)


def _prune(cands, best, tol):
    if best is None:
        return []
    return [c for c in cands if c[1] >= best - tol]


def merge_states(a, b, tol=VIOLATION_TOL):
    """Associative, commutative combination of two partial states."""
    out = []
    for sa, sb in zip(a, b):
        mt = _max_none(sa["max_total"], sb["max_total"])
        mc = _max_none(sa["max_coord"], sb["max_coord"])
        out.append({
            "max_total": mt,
            "total_cands": _prune(sorted(sa["total_cands"] + sb["total_cands"]), mt, tol),
            "max_coord": mc,
            "coord_cands": _prune(sorted(sa["coord_cands"] + sb["coord_cands"]), mc, tol),
            "eq_total": sorted(sa["eq_total"] + sb["eq_total"]),
            "eq_coord": sorted(sa["eq_coord"] + sb["eq_coord"]),
            "violations": sorted(sa["violations"] + sb["violations"], key=lambda v: (v["class_id"], v["kind"])),
            "bias_violations": sa["bias_violations"] + sb["bias_violations"],
            "chain_violations": sa["chain_violations"] + sb["chain_violations"],
        })
    return out


@dataclass(frozen=True)
class SearchTask:
    kind: str  # "ck" (whole-output MI) or "thm2" (sum of coordinate MI)
    n: int
    alpha_grid: tuple = DEFAULT_ALPHA_GRID

    def __post_init__(self):
        if self.kind not in ("ck", "thm2"):
            raise ValueError(f"unknown task kind {self.kind!r}")
        object.__setattr__(self, "alpha_grid", tuple(float(a) for a in self.alpha_grid))
        for a in self.alpha_grid:
            NoiseParams(a)


def _bias_bounds(n, mu_values, alpha_grid):
    """Per-class extreme_point_bound and M_K arrays, shape (classes, alphas)."""
    uniq, inverse = np.unique(mu_values, return_inverse=True)
    epb = np.zeros((len(uniq), len(alpha_grid)))
    mk = np.zeros_like(epb)
    for u, mu in enumerate(uniq):
        if abs(mu) >= 1.0:
            continue
        for a, alpha in enumerate(alpha_grid):
            p = NoiseParams(alpha)
            epb[u, a] = extreme_point_bound(n, mu, p)
            mk[u, a] = m_k(bias_K(mu), p)
    return epb[inverse], mk[inverse]


def score_range(task, classes, start, stop, tol=VIOLATION_TOL):
    """Partial state for classes ``start:stop``."""
    state = neutral_state(len(task.alpha_grid))
    if stop <= start:
        return state
    tables = classes.tables(start, stop)
    rhos = np.array([NoiseParams(a).rho for a in task.alpha_grid])
    total, coord, mu = kernels.batch_scores(tables, rhos)
    epb, mk = _bias_bounds(task.n, mu, task.alpha_grid)
    ids = np.arange(start, stop)
    for a, alpha in enumerate(task.alpha_grid):
        cap = capacity(NoiseParams(alpha))
        st = state[a]
        t, c = total[:, a], coord[:, a]
        st["max_total"] = float(t.max())
        st["max_coord"] = float(c.max())
        st["total_cands"] = [(int(i), float(v)) for i, v in zip(ids, t) if v >= st["max_total"] - tol]
        st["coord_cands"] = [(int(i), float(v)) for i, v in zip(ids, c) if v >= st["max_coord"] - tol]
        st["eq_total"] = [int(i) for i in ids[t >= cap - tol]]
        st["eq_coord"] = [int(i) for i in ids[c >= cap - tol]]
        quantity = t if task.kind == "ck" else c
        for k in np.nonzero(quantity > cap + tol)[0]:
            st["violations"].append({
                "kind": task.kind, "class_id": int(ids[k]),
                "table": "".join(map(str, tables[k])), "value": float(quantity[k]), "capacity": cap,
            })
        st["bias_violations"] = int(np.sum(c > epb[:, a] + tol))
        st["chain_violations"] = int(np.sum((epb[:, a] > mk[:, a] + tol) | (mk[:, a] > cap + tol)))
    return state


# --------------------------------------------------------------------------
# Reports and checkpoints

@dataclass
class SearchReport:
    task: str
    n: int
    alpha_grid: tuple
    n_classes: int
    dictator_class: int
    per_alpha: list
    wall_time: float = field(default=0.0, compare=False)

    @property
    def violation_count(self):
        return sum(entry["violation_count"] for entry in self.per_alpha)

    @property
    def bias_violation_count(self):
        return sum(entry["bias_violation_count"] for entry in self.per_alpha)

    @property
    def chain_violation_count(self):
        return sum(entry["chain_violation_count"] for entry in self.per_alpha)

    @property
    def passed(self):
        return self.violation_count == 0

    def to_dict(self, include_timing=False):
        out = {
            "task": self.task,
            "n": self.n,
            "alpha_grid": list(self.alpha_grid),
            "n_classes": self.n_classes,
            "n_functions": 1 << (1 << self.n),
            "dictator_class": self.dictator_class,
            "violation_count": self.violation_count,
            "per_alpha": self.per_alpha,
        }
        if include_timing:
            out["wall_time"] = self.wall_time
        return out

    def to_json(self, include_timing=False):
        return json.dumps(self.to_dict(include_timing), indent=2, sort_keys=True) + "\n"

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["alpha", "max_mi", "max_sum_coord_mi", "capacity", "margin"])
        for e in self.per_alpha:
            worst = e["max_total_mi"] if self.task == "ck" else e["max_sum_coord_mi"]
            margin = e["capacity"] - worst
            if abs(margin) <= VIOLATION_TOL:
                margin = 0.0  # equality up to the comparison tolerance; the residue is rounding
            w.writerow([format(v, ".17g") for v in
                        (e["alpha"], e["max_total_mi"], e["max_sum_coord_mi"], e["capacity"], margin)])
        return buf.getvalue()


def _finalize(task, classes, state, tol=VIOLATION_TOL):
    dict_id = dictator_class_id(classes)
    per_alpha = []
    for alpha, st in zip(task.alpha_grid, state):
        eq = st["eq_total"] if task.kind == "ck" else st["eq_coord"]
        per_alpha.append({
            "alpha": alpha,
            "capacity": capacity(NoiseParams(alpha)),
            "max_total_mi": st["max_total"],
            "argmax_total_mi": [i for i, _ in st["total_cands"]],
            "max_sum_coord_mi": st["max_coord"],
            "argmax_sum_coord_mi": [i for i, _ in st["coord_cands"]],
            "equality_total_mi": st["eq_total"],
            "equality_sum_coord_mi": st["eq_coord"],
            "equality_is_dictator_only": eq == [dict_id],
            "violation_count": len(st["violations"]),
            "violations": st["violations"],
            "bias_violation_count": st["bias_violations"],
            "chain_violation_count": st["chain_violations"],
        })
    return SearchReport(task.kind, task.n, task.alpha_grid, len(classes), dict_id, per_alpha)


def _state_to_json(state):
    return [{**st, "total_cands": [list(c) for c in st["total_cands"]],
             "coord_cands": [list(c) for c in st["coord_cands"]]} for st in state]


def _state_from_json(raw):
    return [{**st, "total_cands": [tuple(c) for c in st["total_cands"]],
             "coord_cands": [tuple(c) for c in st["coord_cands"]]} for st in raw]


@dataclass
class Checkpoint:
    task: str
    n: int
    alpha_grid: tuple
    cursor: int
    partial_maxima: list
    format_version: int = FORMAT_VERSION
    timestamp: float = 0.0

    def to_json(self):
        return json.dumps({
            "format_version": self.format_version,
            "task": self.task,
            "n": self.n,
            "alpha_grid": list(self.alpha_grid),
            "cursor": self.cursor,
            "partial_maxima": _state_to_json(self.partial_maxima),
            "timestamp": self.timestamp,
        })

    def write(self, path):
        directory = os.path.dirname(os.path.abspath(path))
        fd, tmp = tempfile.mkstemp(dir=directory, prefix=".ckpt-")
        try:
            with os.fdopen(fd, "w") as fh:
                fh.write(self.to_json())
            os.replace(tmp, path)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise

    @classmethod
    def read(cls, path):
        try:
            with open(path) as fh:
                raw = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise CheckpointError(f"cannot read checkpoint {path}: {exc}") from exc
        if raw.get("format_version") != FORMAT_VERSION:
            raise CheckpointError(f"checkpoint format {raw.get('format_version')!r} != {FORMAT_VERSION}")
        try:
            return cls(raw["task"], int(raw["n"]), tuple(raw["alpha_grid"]), int(raw["cursor"]),
                       _state_from_json(raw["partial_maxima"]), raw["format_version"], raw.get("timestamp", 0.0))
        except (KeyError, TypeError, ValueError) as exc:
            raise CheckpointError(f"malformed checkpoint {path}: {exc}") from exc

    def matches(self, task):
        return (self.task, self.n, tuple(self.alpha_grid)) == (task.kind, task.n, task.alpha_grid)


def _split(start, stop, shards):
    bounds = np.linspace(start, stop, shards + 1).round().astype(int)
    return list(zip(bounds[:-1], bounds[1:]))


def run_sharded(task, shards=1, checkpoint_path=None, checkpoint_every=None,
                allow_long_run=False, on_checkpoint=None):
    """Score every class for ``task`` and return the merged :class:`SearchReport`.

    ``on_checkpoint(cursor)`` is called after each checkpoint write; raising
    from it interrupts the run the way a kill would.
    """
    if shards < 1:
        raise ValueError("shards must be >= 1")
    t0 = time.perf_counter()
    classes = enumerate_canonical(task.n, allow_long_run=allow_long_run)
    C = len(classes)
    state, cursor = neutral_state(len(task.alpha_grid)), 0
    if checkpoint_path and os.path.exists(checkpoint_path):
        ck = Checkpoint.read(checkpoint_path)
        if not ck.matches(task):
            raise CheckpointError("checkpoint belongs to a different task, n or alpha grid")
        if not 0 <= ck.cursor <= C:
            raise CheckpointError(f"checkpoint cursor {ck.cursor} outside [0, {C}]")
        state, cursor = ck.partial_maxima, ck.cursor
        logger.info("resuming %s n=%d at class %d/%d", task.kind, task.n, cursor, C)
    block = checkpoint_every or max(C, 1)
    workers = max(1, min(shards, thread_cap()))
    with ThreadPoolExecutor(max_workers=workers) as pool:
        while cursor < C:
            stop = min(cursor + block, C)
            parts = list(pool.map(lambda r: score_range(task, classes, r[0], r[1]), _split(cursor, stop, shards)))
            for part in parts:
                state = merge_states(state, part)
            cursor = stop
            if checkpoint_path:
                Checkpoint(task.kind, task.n, task.alpha_grid, cursor, state, timestamp=time.time()).write(checkpoint_path)
                if on_checkpoint is not None:
                    on_checkpoint(cursor)
    report = _finalize(task, classes, state)
    report.wall_time = time.perf_counter() - t0
    if task.kind == "ck":
        _escalate(report, task)
    return report


def _escalate(report, task):
    """Re-check whole-output MI violations with the joint-table oracle."""
    for entry in report.per_alpha:
        for v in entry["violations"]:
            b = BooleanFunction.from_string(v["table"])
            v["oracle_value"] = mutual_information_joint(b, NoiseParams(entry["alpha"]))
            v["oracle_confirms"] = v["oracle_value"] > v["capacity"] + VIOLATION_TOL
            logger.error("probable bug: I(b;Y) above capacity for class %d at alpha=%g (oracle %s); "
                         "audit before treating as a counterexample",
                         v["class_id"], entry["alpha"], "agrees" if v["oracle_confirms"] else "disagrees")


def verify_ck(n, alpha_grid=DEFAULT_ALPHA_GRID, **kwargs):
    """max_b I(b(X); Y) against the capacity, over every Boolean function on n variables."""
    return run_sharded(SearchTask("ck", n, tuple(alpha_grid)), **kwargs)


def verify_thm2(n, alpha_grid=DEFAULT_ALPHA_GRID, **kwargs):
    """max_b sum_i I(b(X); Y_i) against the capacity and the per-bias vertex bound."""
    return run_sharded(SearchTask("thm2", n, tuple(alpha_grid)), **kwargs)


def score_all_functions(n, alpha_grid):
    """Scores of every truth table (no symmetry reduction); for cross-checks, n <= 4."""
    if n > MAX_IN_MEMORY_N:
        raise ResourceGuardError("brute force over all functions is limited to n <= 4")
    N = 1 << n
    tables = kernels.codes_to_bits(np.arange(1 << N, dtype=np.uint64), N)
    rhos = np.array([NoiseParams(a).rho for a in alpha_grid])
    total, coord, mu = kernels.batch_scores(tables, rhos)
    return tables, total, coord, mu
