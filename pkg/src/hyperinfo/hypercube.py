"""Functions on the Boolean cube {-1, 1}^n and the two core transforms.

Point index convention: bit ``i`` of a point index ``m`` is ``b`` exactly when
coordinate ``x_{i+1} = (-1)**b``.  Index 0 is therefore the all-(+1) point and
Fourier masks coincide with subsets (bit ``i`` set means ``i+1`` in ``S``).
"""
from dataclasses import dataclass
import math

import numpy as np

from . import kernels

MAX_N = 20


def _check_n(n):
    if not isinstance(n, (int, np.integer)) or not 0 <= n <= MAX_N:
        raise ValueError(f"dimension n must be an integer in [0, {MAX_N}], got {n!r}")
    return int(n)


def _dim_from_length(length):
    n = int(length).bit_length() - 1
    if length < 1 or (1 << n) != length:
        raise ValueError(f"length {length} is not a power of two")
    return n


@dataclass(frozen=True, eq=False)
class BooleanFunction:
    """A +-1 valued function stored as a 0/1 truth table (1 means +1)."""

    n: int
    table: np.ndarray

    def __post_init__(self):
        n = _check_n(self.n)
        table = np.ascontiguousarray(self.table, dtype=np.uint8)
        if table.shape != (1 << n,):
            raise ValueError(f"table must have length 2**{n}, got shape {table.shape}")
        if table.max(initial=0) > 1:
            raise ValueError("table entries must be 0 or 1")
        table.flags.writeable = False
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "table", table)

    @classmethod
    def from_values(cls, values):
        values = np.asarray(values)
        if not np.all(np.isin(values, (-1, 1))):
            raise ValueError("values must be +-1")
        return cls(_dim_from_length(values.shape[0]), (values > 0).astype(np.uint8))

    @classmethod
    def from_string(cls, bits):
        bits = bits.strip()
        if not bits or set(bits) - {"0", "1"}:
            raise ValueError("truth table must be a non-empty string of '0'/'1'")
        return cls(_dim_from_length(len(bits)), np.frombuffer(bits.encode(), dtype=np.uint8) - ord("0"))

    @classmethod
    def from_code(cls, n, code):
        return cls(n, kernels.code_to_bits(code, 1 << n))

    @property
    def values(self):
        """Values as a float array of +-1."""
        return 2.0 * self.table - 1.0

    @property
    def indicator(self):
        """The 0/1 function 1{b = +1} = (1 + b) / 2."""
        return self.table.astype(np.float64)

    @property
    def code(self):
        """Big-endian integer of the truth table (point 0 is the top bit)."""
        return kernels.bits_to_code(self.table)

    def to_string(self):
        return "".join("1" if t else "0" for t in self.table)

    def to_real(self):
        return RealFunction(self.n, self.values)

    def __eq__(self, other):
        if not isinstance(other, BooleanFunction):
            return NotImplemented
        return self.n == other.n and np.array_equal(self.table, other.table)

    def __hash__(self):
        return hash((self.n, self.table.tobytes()))

    def __repr__(self):
        body = self.to_string() if self.n <= 6 else f"<{1 << self.n} entries>"
        return f"BooleanFunction(n={self.n}, table={body})"


@dataclass(frozen=True, eq=False)
class RealFunction:
    """Dense real-valued function on the cube, same index convention."""

    n: int
    values: np.ndarray

    def __post_init__(self):
        n = _check_n(self.n)
        values = np.array(self.values, dtype=np.float64)
        if values.shape != (1 << n,):
            raise ValueError(f"values must have length 2**{n}, got shape {values.shape}")
        if not np.all(np.isfinite(values)):
            raise ValueError("values must be finite")
        values.flags.writeable = False
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "values", values)

    @classmethod
    def from_array(cls, values):
        values = np.asarray(values, dtype=np.float64)
        return cls(_dim_from_length(values.shape[0]), values)

    def mean(self):
        return float(self.values.mean())

    def __add__(self, other):
        other = other.values if isinstance(other, RealFunction) else other
        return RealFunction(self.n, self.values + other)

    def __sub__(self, other):
        other = other.values if isinstance(other, RealFunction) else other
        return RealFunction(self.n, self.values - other)

    def __mul__(self, c):
        return RealFunction(self.n, self.values * c)

    __rmul__ = __mul__


@dataclass(frozen=True, eq=False)
class FourierSpectrum:
    """Walsh-Hadamard coefficients indexed by subset mask; ``coeffs[0]`` is the mean."""

    n: int
    coeffs: np.ndarray

    def __post_init__(self):
        n = _check_n(self.n)
        coeffs = np.array(self.coeffs, dtype=np.float64)
        if coeffs.shape != (1 << n,):
            raise ValueError(f"coeffs must have length 2**{n}, got shape {coeffs.shape}")
        coeffs.flags.writeable = False
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "coeffs", coeffs)

    def __getitem__(self, mask):
        return float(self.coeffs[mask])

    def levels(self):
        return subset_sizes(self.n)


@dataclass(frozen=True)
class NoiseParams:
    """BSC crossover probability with its derived correlations."""

    alpha: float

    def __post_init__(self):
        alpha = float(self.alpha)
        if not 0.0 <= alpha <= 0.5:
            raise ValueError(f"alpha must lie in [0, 1/2], got {alpha}")
        object.__setattr__(self, "alpha", alpha)

    @classmethod
    def from_rho(cls, rho):
        return cls((1.0 - rho) / 2.0)

    @classmethod
    def from_lambda(cls, lam):
        return cls.from_rho(math.sqrt(lam))

    @property
    def rho(self):
        return 1.0 - 2.0 * self.alpha

    @property
    def lam(self):
        return self.rho ** 2


def subset_sizes(n):
    """|S| for every mask S of an n-dimensional cube."""
    return kernels.popcounts(1 << n)


def point_vector(index, n):
    """The point of {-1,1}^n with the given index."""
    n = _check_n(n)
    if not 0 <= index < (1 << n):
        raise ValueError(f"index {index} out of range for n={n}")
    return np.array([-1 if (index >> i) & 1 else 1 for i in range(n)], dtype=np.int8)


def point_index(x):
    """Inverse of :func:`point_vector`."""
    x = np.asarray(x)
    if not np.all(np.isin(x, (-1, 1))):
        raise ValueError("point coordinates must be +-1")
    return int(sum(1 << i for i, xi in enumerate(x) if xi == -1))


def cube_points(n):
    """All points as an int8 array of shape (2**n, n), row m = point_vector(m)."""
    idx = np.arange(1 << n)[:, None]
    return (1 - 2 * ((idx >> np.arange(n)[None, :]) & 1)).astype(np.int8)


def character(S, n):
    """The parity character Pi_S evaluated at every point."""
    idx = np.arange(1 << n)
    return 1.0 - 2.0 * (kernels.popcounts(1 << n)[idx & S] & 1)


def _values(f):
    return f.n, f.values


def wht(f):
    """Fourier coefficients E[f(X) Pi_S(X)] of a real or Boolean function."""
    n, vals = _values(f)
    a = np.array(vals, dtype=np.float64)
    kernels.fwht(a)
    a /= a.shape[0]
    return FourierSpectrum(n, a)


def inverse_wht(s):
    """The function sum_S coeffs[S] Pi_S(x)."""
    a = np.array(s.coeffs, dtype=np.float64)
    kernels.fwht(a)
    return RealFunction(s.n, a)


def level_weight(s, k):
    """Sum of squared coefficients over |S| = k."""
    if not 0 <= k <= s.n:
        raise ValueError(f"level {k} out of range for n={s.n}")
    c = s.coeffs[subset_sizes(s.n) == k]
    return float(np.dot(c, c))


def level_weights(s):
    """Vector of level weights W_0 .. W_n."""
    return np.bincount(subset_sizes(s.n), weights=s.coeffs ** 2, minlength=s.n + 1)


def _clamp_if_nonneg(out, source):
    if source.min(initial=0.0) >= 0.0:
        tiny = (out < 0.0) & (out >= -1e-15)
        out[tiny] = 0.0
    return out


def apply_noise_spectrum(s, p):
    return FourierSpectrum(s.n, s.coeffs * p.rho ** subset_sizes(s.n))


def apply_noise(f, p):
    """T_alpha f via the Fourier multiplier rho^|S|."""
    n, vals = _values(f)
    a = np.array(vals, dtype=np.float64)
    kernels.fwht(a)
    a *= p.rho ** subset_sizes(n) / a.shape[0]
    kernels.fwht(a)
    return RealFunction(n, _clamp_if_nonneg(a, vals))


def apply_noise_direct(f, p):
    """T_alpha f from the Hamming-distance sum; O(4^n), meant as an oracle."""
    n, vals = _values(f)
    if n > 12:
        raise ValueError("apply_noise_direct is limited to n <= 12")
    return RealFunction(n, kernels.noise_direct(np.asarray(vals, dtype=np.float64), p.alpha))


# --------------------------------------------------------------------------
# Standard functions

def constant(n, value=1):
    return BooleanFunction(n, np.full(1 << n, 1 if value > 0 else 0, dtype=np.uint8))


def dictator(n, i=1, sign=1):
    """b(x) = sign * x_i (coordinates are 1-based)."""
    if not 1 <= i <= n:
        raise ValueError(f"coordinate {i} out of range for n={n}")
    x = cube_points(n)[:, i - 1] * sign
    return BooleanFunction(n, (x > 0).astype(np.uint8))


def parity(n, subset=None):
    S = (1 << n) - 1 if subset is None else sum(1 << (i - 1) for i in subset)
    return BooleanFunction(n, (character(S, n) > 0).astype(np.uint8))


def majority(n):
    if n % 2 == 0:
        raise ValueError("majority needs an odd number of inputs")
    return BooleanFunction(n, (cube_points(n).sum(axis=1) > 0).astype(np.uint8))


def tribes(width, count):
    """OR of ``count`` disjoint ANDs of ``width`` variables (+1 is true)."""
    n = width * count
    x = cube_points(n).reshape(-1, count, width) > 0
    return BooleanFunction(n, x.all(axis=2).any(axis=1).astype(np.uint8))


# --------------------------------------------------------------------------
# File formats

def read_truth_table(path):
    """Parse ``n=<int>`` followed by 2^n '0'/'1' characters."""
    with open(path) as fh:
        text = fh.read()
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if not lines or not lines[0].startswith("n="):
        raise ValueError(f"{path}: first line must be 'n=<int>'")
    try:
        n = int(lines[0][2:])
    except ValueError:
        raise ValueError(f"{path}: bad dimension line {lines[0]!r}") from None
    if not 0 <= n <= MAX_N:
        raise ValueError(f"{path}: n={n} outside [0, {MAX_N}]")
    bits = "".join(lines[1:])
    if len(bits) != 1 << n:
        raise ValueError(f"{path}: expected {1 << n} table characters, got {len(bits)}")
    return BooleanFunction.from_string(bits)


def format_truth_table(b):
    return f"n={b.n}\n{b.to_string()}\n"


def write_truth_table(path, b):
    with open(path, "w") as fh:
        fh.write(format_truth_table(b))


def format_spectrum_csv(s):
    lines = ["mask,coeff"]
    lines.extend(f"{mask},{format(float(c) + 0.0, '.17g')}" for mask, c in enumerate(s.coeffs))
    return "\n".join(lines) + "\n"


def parse_spectrum_csv(text):
    rows = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if not rows or rows[0].replace(" ", "") != "mask,coeff":
        raise ValueError("spectrum CSV must start with header 'mask,coeff'")
    pairs = [(int(m), float(c)) for m, c in (r.split(",") for r in rows[1:])]
    n = max(m for m, _ in pairs).bit_length() if pairs else 0
    coeffs = np.zeros(1 << n)
    for m, c in pairs:
        coeffs[m] = c
    return FourierSpectrum(n, coeffs)
