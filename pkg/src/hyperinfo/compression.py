"""One-dimensional compression and the level-one facts it rests on.

Compression along coordinate ``j`` looks at each fiber ``{x with x_j = -1,
x with x_j = +1}`` and moves a lone +1 to the ``x_j = +1`` end, leaving fibers
with two equal values alone.  It keeps the number of +1 entries, makes the
function nondecreasing in ``x_j`` and never lowers ``sum_i I(b; Y_i)``.
"""
from dataclasses import dataclass, field
import json

import numpy as np

from .hypercube import BooleanFunction, wht
from .info import sum_coordinate_mi

TOL = 1e-12


class PreconditionError(ValueError):
    """Input does not meet a check's hypothesis (distinct from the check failing)."""


def _check_coord(b, j):
    if not 1 <= j <= b.n:
        raise ValueError(f"coordinate {j} out of range for n={b.n}")


def _fibers(b, j):
    """Index arrays of the x_j = +1 and x_j = -1 ends of every fiber."""
    idx = np.arange(1 << b.n)
    bit = 1 << (j - 1)
    hi = idx[(idx & bit) == 0]
    return hi, hi | bit


def compress(b, j):
    """The compression of ``b`` along coordinate ``j`` (1-based)."""
    _check_coord(b, j)
    hi, lo = _fibers(b, j)
    t = b.table
    # in 0/1 form: the x_j = +1 end gets OR, the x_j = -1 end gets AND
    out = np.empty_like(t)
    out[hi] = t[hi] | t[lo]
    out[lo] = t[hi] & t[lo]
    return BooleanFunction(b.n, out)


def is_monotone(b, i):
    """True iff b(x, x_i = -1) <= b(x, x_i = +1) on every fiber."""
    _check_coord(b, i)
    hi, lo = _fibers(b, i)
    return bool(np.all(b.table[lo] <= b.table[hi]))


def is_monotone_all(b):
    return all(is_monotone(b, i) for i in range(1, b.n + 1))


def objective(b, p):
    """L(b) = sum_i I(b(X); Y_i)."""
    return sum_coordinate_mi(b, p).sum_coord_mi


@dataclass
class CompressionTrace:
    steps: list = field(default_factory=list)
    final: BooleanFunction = None

    @property
    def effective_steps(self):
        return sum(1 for s in self.steps if s[3])

    def is_nondecreasing(self, tol=TOL):
        return all(after >= before - tol for _, before, after, _ in self.steps)

    def to_jsonl(self):
        return "".join(
            json.dumps({"coord": c, "L_before": lb, "L_after": la}) + "\n"
            for c, lb, la, _ in self.steps
        )


def monotonize(b, p):
    """Compress along 1..n cyclically until a whole pass changes nothing.

    Each step records ``(coord, L_before, L_after, changed)``.
    """
    trace = CompressionTrace()
    current = b
    L = objective(current, p)
    for _ in range(max(1, 1 << b.n)):
        changed_in_pass = False
        for j in range(1, b.n + 1):
            nxt = compress(current, j)
            changed = nxt != current
            L_next = objective(nxt, p) if changed else L
            trace.steps.append((j, L, L_next, changed))
            current, L = nxt, L_next
            changed_in_pass |= changed
        if not changed_in_pass:
            break
    else:  # pragma: no cover - compressions reach a fixpoint in two passes
        raise RuntimeError("monotonize did not reach a fixpoint")
    trace.final = current
    return trace


def _level_one(b):
    s = wht(b)
    return s.coeffs[0], np.array([s.coeffs[1 << i] for i in range(b.n)])


def check_lemma_fourier_prop(b, j):
    """Compression along j fixes z_i for i != j and does not shrink |z_j|."""
    _check_coord(b, j)
    _, z = _level_one(b)
    _, zt = _level_one(compress(b, j))
    others = [i for i in range(b.n) if i != j - 1]
    same = bool(np.array_equal(z[others], zt[others]))
    grows = abs(zt[j - 1]) >= abs(z[j - 1]) - TOL
    return same and grows and zt[j - 1] >= -TOL


def check_lemma_xi_pos(b):
    """A function nondecreasing in every coordinate has all z_i >= 0."""
    if not is_monotone_all(b):
        raise PreconditionError("check_lemma_xi_pos needs a function nondecreasing in every coordinate")
    _, z = _level_one(b)
    return bool(z.min(initial=0.0) >= -TOL)


def check_lemma_boolean_prop(b):
    """Every level-one coefficient satisfies z_i <= 1 - |mu|."""
    mu, z = _level_one(b)
    return bool(z.max(initial=-np.inf) <= 1.0 - abs(mu) + TOL)
