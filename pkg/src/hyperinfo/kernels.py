"""Hot inner loops, each in a numba and a pure-numpy flavour.

The public names (``fwht``, ``noise_direct``, ``enumerate_orbits``,
``canonical_code``, ``batch_scores``) dispatch on :data:`BACKEND`.  The
``*_numpy`` and ``*_numba`` variants stay importable so tests and the
benchmark can compare them side by side.

Truth tables here are ``uint8`` arrays of 0/1 (1 means value +1).  A table
code is its big-endian integer: point 0 is the most significant bit, so the
numerically smallest code is the lexicographically smallest table string.
"""
import numpy as np

from ._accel import BACKEND, HAVE_NUMBA, njit

_LN2 = np.log(2.0)


def popcounts(N):
    """Number of set bits of every integer in ``range(N)``."""
    idx = np.arange(N, dtype=np.int64)
    out = np.zeros(N, dtype=np.int64)
    while idx.any():
        out += idx & 1
        idx >>= 1
    return out


def h2_numpy(p):
    """Binary entropy in bits, vectorized, with 0 log 0 = 0."""
    p = np.asarray(p, dtype=np.float64)
    inner = (p > 0.0) & (p < 1.0)
    safe = np.where(inner, p, 0.5)
    val = -(safe * np.log2(safe) + (1.0 - safe) * np.log2(1.0 - safe))
    return np.where(inner, val, 0.0)


# --------------------------------------------------------------------------
# Walsh-Hadamard butterfly (unnormalized, in place, last axis)

def fwht_numpy(a):
    B = 1 if a.ndim == 1 else a.shape[0]
    N = a.shape[-1]
    v = a.reshape(B, N)
    h = 1
    while h < N:
        w = v.reshape(B, N // (2 * h), 2, h)
        x = w[:, :, 0, :].copy()
        y = w[:, :, 1, :]
        w[:, :, 0, :] += y
        w[:, :, 1, :] = x - y
        h *= 2
    return a


@njit(cache=True, nogil=True)
def _fwht_rows(v):
    B, N = v.shape
    for r in range(B):
        h = 1
        while h < N:
            for start in range(0, N, 2 * h):
                for m in range(start, start + h):
                    x = v[r, m]
                    y = v[r, m + h]
                    v[r, m] = x + y
                    v[r, m + h] = x - y
            h *= 2


def fwht_numba(a):
    N = a.shape[-1]
    _fwht_rows(a.reshape(-1, N))
    return a


# --------------------------------------------------------------------------
# Noise operator by its defining O(4^n) sum

def _noise_weights(n, alpha):
    d = np.arange(n + 1)
    return alpha ** d * (1.0 - alpha) ** (n - d)


def noise_direct_numpy(values, alpha):
    N = values.shape[0]
    n = N.bit_length() - 1
    weights = _noise_weights(n, alpha)
    pc = popcounts(N)
    idx = np.arange(N)
    out = np.empty(N)
    chunk = max(1, (1 << 22) // N)
    for lo in range(0, N, chunk):
        rows = idx[lo:lo + chunk, None] ^ idx[None, :]
        out[lo:lo + chunk] = weights[pc[rows]] @ values
    return out


@njit(cache=True, nogil=True)
def _noise_direct_loop(values, weights, pc):
    N = values.shape[0]
    out = np.zeros(N)
    for x in range(N):
        acc = 0.0
        for y in range(N):
            acc += weights[pc[x ^ y]] * values[y]
        out[x] = acc
    return out


def noise_direct_numba(values, alpha):
    N = values.shape[0]
    n = N.bit_length() - 1
    return _noise_direct_loop(np.ascontiguousarray(values, dtype=np.float64),
                              _noise_weights(n, alpha), popcounts(N))


# --------------------------------------------------------------------------
# Orbits of truth tables under a group given by point maps.
# pointmaps[g, m] = source point, i.e. image table t'[m] = t[pointmaps[g, m]].

def _code_weights(N):
    return (np.uint64(1) << np.arange(N - 1, -1, -1, dtype=np.uint64)).astype(np.uint64)


def code_to_bits(code, N):
    """Unpack a big-endian table code into a 0/1 array of length ``N``."""
    code = int(code)
    return np.array([(code >> (N - 1 - m)) & 1 for m in range(N)], dtype=np.uint8)


def codes_to_bits(codes, N):
    codes = np.asarray(codes, dtype=np.uint64)
    shifts = np.arange(N - 1, -1, -1, dtype=np.uint64)
    return ((codes[:, None] >> shifts[None, :]) & np.uint64(1)).astype(np.uint8)


def bits_to_code(bits):
    bits = np.asarray(bits, dtype=np.uint64)
    return int((bits * _code_weights(bits.shape[-1])).sum())


def _orbit_codes_numpy(bits, pointmaps):
    N = bits.shape[0]
    images = bits[pointmaps].astype(np.uint64)
    codes = images @ _code_weights(N)
    full = np.uint64((1 << N) - 1)
    return np.concatenate([codes, codes ^ full])


def canonical_code_numpy(code, pointmaps):
    N = pointmaps.shape[1]
    return int(_orbit_codes_numpy(code_to_bits(code, N), pointmaps).min())


def enumerate_orbits_numpy(n, pointmaps):
    N = 1 << n
    total = 1 << N
    seen = np.zeros(total, dtype=bool)
    reps, sizes = [], []
    for code in range(total):
        if seen[code]:
            continue
        orbit = np.unique(_orbit_codes_numpy(code_to_bits(code, N), pointmaps))
        seen[orbit] = True
        reps.append(code)
        sizes.append(orbit.shape[0])
    return np.array(reps, dtype=np.uint64), np.array(sizes, dtype=np.int64)


@njit(cache=True, nogil=True)
def _image_code(code, pm, N):
    out = np.uint64(0)
    one = np.uint64(1)
    for m in range(N):
        bit = (code >> np.uint64(N - 1 - pm[m])) & one
        out |= bit << np.uint64(N - 1 - m)
    return out


@njit(cache=True, nogil=True)
def _canonical_loop(code, pointmaps):
    G, N = pointmaps.shape
    full = np.uint64((1 << N) - 1) if N < 64 else np.uint64(0xFFFFFFFFFFFFFFFF)
    best = code
    for g in range(G):
        c = _image_code(code, pointmaps[g], N)
        if c < best:
            best = c
        c ^= full
        if c < best:
            best = c
    return best


def canonical_code_numba(code, pointmaps):
    return int(_canonical_loop(np.uint64(code), pointmaps))


@njit(cache=True, nogil=True)
def _enumerate_loop(N, pointmaps, max_classes):
    G = pointmaps.shape[0]
    total = np.uint64(1) << np.uint64(N)
    full = total - np.uint64(1)
    seen = np.zeros(np.int64((total + np.uint64(7)) // np.uint64(8)), dtype=np.uint8)
    reps = np.empty(max_classes, dtype=np.uint64)
    sizes = np.empty(max_classes, dtype=np.int64)
    count = 0
    code = np.uint64(0)
    one = np.uint64(1)
    seven = np.uint64(7)
    three = np.uint64(3)
    while code < total:
        if (seen[np.int64(code >> three)] >> np.uint8(code & seven)) & 1:
            code += one
            continue
        size = 0
        for g in range(G):
            c = _image_code(code, pointmaps[g], N)
            for _ in range(2):
                byte = np.int64(c >> three)
                mask = np.uint8(1) << np.uint8(c & seven)
                if not (seen[byte] & mask):
                    seen[byte] |= mask
                    size += 1
                c ^= full
        reps[count] = code
        sizes[count] = size
        count += 1
        code += one
    return reps[:count], sizes[:count]


# Known class counts under the full symmetry group, used only to size buffers.
_CLASS_BOUND = {0: 1, 1: 2, 2: 4, 3: 14, 4: 222, 5: 616126}


def enumerate_orbits_numba(n, pointmaps):
    bound = _CLASS_BOUND.get(n, 1 << (1 << n))
    return _enumerate_loop(1 << n, pointmaps, bound)


# --------------------------------------------------------------------------
# Per-table information scores for a batch of truth tables and noise levels.
# total[c, a]  = I(b(X); Y)            (conditional-entropy route)
# coord[c, a]  = sum_i I(b(X); Y_i)
# mu[c]        = E[b]

def batch_scores_numpy(tables, rhos):
    tables = np.asarray(tables, dtype=np.uint8)
    C, N = tables.shape
    n = N.bit_length() - 1
    rhos = np.asarray(rhos, dtype=np.float64)
    spec = 2.0 * tables.astype(np.float64) - 1.0
    fwht_numpy(spec)
    spec /= N
    mu = spec[:, 0].copy()
    z = spec[:, [1 << i for i in range(n)]]
    hb = h2_numpy((1.0 + mu) / 2.0)
    lvl = popcounts(N)
    total = np.empty((C, rhos.shape[0]))
    coord = np.empty((C, rhos.shape[0]))
    for a, rho in enumerate(rhos):
        noisy = spec * rho ** lvl
        fwht_numpy(noisy)
        q = np.clip((1.0 + noisy) / 2.0, 0.0, 1.0)
        total[:, a] = hb - h2_numpy(q).mean(axis=1)
        hp = h2_numpy((1.0 + mu[:, None] + rho * z) / 2.0)
        hm = h2_numpy((1.0 + mu[:, None] - rho * z) / 2.0)
        coord[:, a] = (hb[:, None] - 0.5 * hp - 0.5 * hm).sum(axis=1)
    return total, coord, mu


@njit(cache=True, nogil=True)
def _h2(p):
    if p <= 0.0 or p >= 1.0:
        return 0.0
    return -(p * np.log2(p) + (1.0 - p) * np.log2(1.0 - p))


@njit(cache=True, nogil=True)
def _scores_loop(tables, rhos, lvl, n):
    C, N = tables.shape
    A = rhos.shape[0]
    total = np.empty((C, A))
    coord = np.empty((C, A))
    mu = np.empty(C)
    spec = np.empty((1, N))
    buf = np.empty((1, N))
    powers = np.empty(n + 1)
    for c in range(C):
        for m in range(N):
            spec[0, m] = 2.0 * tables[c, m] - 1.0
        _fwht_rows(spec)
        for m in range(N):
            spec[0, m] /= N
        mu_c = spec[0, 0]
        mu[c] = mu_c
        hb = _h2((1.0 + mu_c) / 2.0)
        for a in range(A):
            rho = rhos[a]
            powers[0] = 1.0
            for k in range(1, n + 1):
                powers[k] = powers[k - 1] * rho
            for m in range(N):
                buf[0, m] = spec[0, m] * powers[lvl[m]]
            _fwht_rows(buf)
            acc = 0.0
            for m in range(N):
                q = (1.0 + buf[0, m]) / 2.0
                q = min(max(q, 0.0), 1.0)
                acc += _h2(q)
            total[c, a] = hb - acc / N
            s = 0.0
            for i in range(n):
                zi = spec[0, 1 << i]
                s += hb - 0.5 * _h2((1.0 + mu_c + rho * zi) / 2.0) - 0.5 * _h2((1.0 + mu_c - rho * zi) / 2.0)
            coord[c, a] = s
    return total, coord, mu


def batch_scores_numba(tables, rhos):
    tables = np.ascontiguousarray(tables, dtype=np.uint8)
    N = tables.shape[1]
    n = N.bit_length() - 1
    return _scores_loop(tables, np.asarray(rhos, dtype=np.float64), popcounts(N), n)


if HAVE_NUMBA:
    fwht = fwht_numba
    noise_direct = noise_direct_numba
    canonical_code = canonical_code_numba
    enumerate_orbits = enumerate_orbits_numba
    batch_scores = batch_scores_numba
else:
    fwht = fwht_numpy
    noise_direct = noise_direct_numpy
    canonical_code = canonical_code_numpy
    enumerate_orbits = enumerate_orbits_numpy
    batch_scores = batch_scores_numpy

__all__ = [
    "BACKEND", "HAVE_NUMBA", "popcounts", "h2_numpy",
    "fwht", "fwht_numpy", "fwht_numba",
    "noise_direct", "noise_direct_numpy", "noise_direct_numba",
    "canonical_code", "canonical_code_numpy", "canonical_code_numba",
    "enumerate_orbits", "enumerate_orbits_numpy", "enumerate_orbits_numba",
    "batch_scores", "batch_scores_numpy", "batch_scores_numba",
    "code_to_bits", "codes_to_bits", "bits_to_code",
]
