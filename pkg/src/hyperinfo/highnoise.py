"""High-noise analysis of Ent(T_alpha f) for densities on the cube.

A density ``f >= 0`` with ``E f = 1`` splits into even and odd parts
``f0``, ``f1``; their noisy images are ``F = T f0`` (with ``V = F - 1``) and
``Z = T f1``, so ``T f = F + Z``.  Everything here is an exact finite
computation on the cube: moments of ``V`` and ``Z``, the entropy
decomposition gap, the first-order residual of Ent(T f), log-log slope fits
over a lambda grid, hypercontractive norm checks, capacity expansion, the
exhaustive Fourier-tail table for near-optimal Boolean functions, and the
two noise-range threshold curves.
"""
from dataclasses import dataclass, field
import math

import numpy as np

from .hypercube import (
    NoiseParams,
    RealFunction,
    apply_noise,
    inverse_wht,
    level_weight,
    level_weights,
    majority,
    subset_sizes,
    tribes,
    wht,
)
from .info import capacity, ent_functional

_LN2 = math.log(2.0)
F_FLOOR = 1e-14


# --------------------------------------------------------------------------
# Decomposition

@dataclass(frozen=True)
class EvenOddSplit:
    f0: RealFunction
    f1: RealFunction


def split_even_odd(f):
    """f0(x) = (f(x) + f(-x))/2 and f1(x) = (f(x) - f(-x))/2."""
    v = f.values
    mirrored = v[::-1]  # index of -x is the bitwise complement of the index of x
    return EvenOddSplit(RealFunction(f.n, (v + mirrored) / 2.0),
                        RealFunction(f.n, (v - mirrored) / 2.0))


@dataclass(frozen=True)
class NoisyTriple:
    F: RealFunction
    V: RealFunction
    Z: RealFunction
    params: NoiseParams
    l1: float = 0.0


def _check_density(f, tol=1e-12):
    if f.values.min() < 0.0:
        raise ValueError("f must be nonnegative")
    if abs(f.mean() - 1.0) > tol:
        raise ValueError(f"f must have mean 1 (got {f.mean()!r}); normalize first")


def normalize(f):
    """Scale a nonnegative, nonzero function to mean 1."""
    m = f.mean()
    if f.values.min() < 0.0 or m <= 0.0:
        raise ValueError("need a nonnegative nonzero function")
    return RealFunction(f.n, f.values / m)


def noisy_triple(f, p):
    _check_density(f)
    parts = split_even_odd(f)
    F = apply_noise(parts.f0, p)
    Z = apply_noise(parts.f1, p)
    return NoisyTriple(F, F - 1.0, Z, p, l1=level_weight(wht(f), 1) if f.n >= 1 else 0.0)


# --------------------------------------------------------------------------
# Moments

@dataclass
class MomentReport:
    ev2: float
    ev3abs: float
    ez2: float
    ez4: float
    ez2v: float
    ez2_over_f: float
    ez4_over_f3: float
    l1: float

    def as_dict(self):
        return dict(self.__dict__)


def _ratio(num, den):
    out = np.zeros_like(num)
    ok = den > F_FLOOR
    out[ok] = num[ok] / den[ok]
    return out


def moments(t):
    """Expectations under the uniform measure; Z^2/F, Z^4/F^3 count 0 where F <= 1e-14."""
    F, V, Z = t.F.values, t.V.values, t.Z.values
    Z2 = Z * Z
    return MomentReport(
        ev2=float(np.mean(V * V)),
        ev3abs=float(np.mean(np.abs(V) ** 3)),
        ez2=float(np.mean(Z2)),
        ez4=float(np.mean(Z2 * Z2)),
        ez2v=float(np.mean(Z2 * V)),
        ez2_over_f=float(np.mean(_ratio(Z2, F))),
        ez4_over_f3=float(np.mean(_ratio(Z2 * Z2, F ** 3))),
        l1=t.l1,
    )


def spectral_moments(f, p):
    """E[Z^2] and E[V^2] from level weights: sums of lambda^k W_k over odd / even k >= 2."""
    parts = split_even_odd(f)
    lam = p.lam
    k = np.arange(f.n + 1)
    w1 = level_weights(wht(parts.f1))
    w0 = level_weights(wht(parts.f0))
    odd = k % 2 == 1
    even = (k % 2 == 0) & (k >= 2)
    return float(np.sum(lam ** k[odd] * w1[odd])), float(np.sum(lam ** k[even] * w0[even]))


def taylor_terms(t):
    """Split E[Z^2/F] with 1/(1+V) = 1 - V + V^2/(1+V) on {F > 0}.

    Returns ``(expansion, remainder)`` = (E[Z^2 (1 - V)], E[Z^2 V^2 / F]).
    """
    F, V, Z = t.F.values, t.V.values, t.Z.values
    pos = F > F_FLOOR
    Z2 = np.where(pos, Z * Z, 0.0)
    expansion = float(np.mean(Z2 * (1.0 - V)))
    remainder = float(np.mean(_ratio(Z2 * V * V, F)))
    return expansion, remainder


def entropy_decomposition_gap(f, p):
    """gap = Ent(T f) - Ent(F) - E[Z^2/F]/(2 ln 2), paired with E[Z^4/F^3]."""
    t = noisy_triple(f, p)
    m = moments(t)
    gap = ent_functional(t.F + t.Z) - ent_functional(t.F) - m.ez2_over_f / (2.0 * _LN2)
    return gap, m.ez4_over_f3


def theorem3_residual(f, p):
    """Ent(T f) - lambda L1(f) / (2 ln 2) for a density f."""
    _check_density(f)
    l1 = level_weight(wht(f), 1) if f.n >= 1 else 0.0
    return ent_functional(apply_noise(f, p)) - p.lam * l1 / (2.0 * _LN2)


# --------------------------------------------------------------------------
# Log-log fits

@dataclass
class ScalingFit:
    lambda_grid: np.ndarray
    values: np.ndarray
    slope: float
    intercept: float
    r2: float
    n_points: int
    n_excluded: int = 0
    window: tuple = None

    def to_dict(self, quantity=None):
        out = {
            "slope": self.slope,
            "intercept": self.intercept,
            "r2": self.r2,
            "n_points": self.n_points,
            "window": list(self.window) if self.window else None,
        }
        if quantity is not None:
            out = {"quantity": quantity, **out}
        return out


def scaling_fit(lams, values, window=None, floor=1e-300):
    """Least-squares line through (log lambda, log value) for the positive values."""
    lams = np.asarray(lams, dtype=np.float64)
    values = np.asarray(values, dtype=np.float64)
    if lams.shape != values.shape:
        raise ValueError("lambda grid and values differ in length")
    if np.any(np.diff(lams) <= 0):
        raise ValueError("lambda grid must be strictly increasing")
    sel = np.ones(lams.shape, dtype=bool)
    if window is not None:
        sel &= (lams >= window[0]) & (lams <= window[1])
    usable = sel & (values > floor)
    if usable.sum() < 4:
        raise ValueError(f"need at least 4 positive points for a fit, got {int(usable.sum())}")
    x, y = np.log(lams[usable]), np.log(values[usable])
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = np.sum((y - y.mean()) ** 2)
    r2 = 1.0 - np.sum(resid ** 2) / ss_tot if ss_tot > 0 else 1.0
    return ScalingFit(lams[usable], values[usable], float(slope), float(intercept), float(r2),
                      int(usable.sum()), int((sel & ~usable).sum()),
                      tuple(window) if window is not None else None)


def lambda_grid(lo=1e-3, hi=1e-1, points=12):
    return np.geomspace(lo, hi, points)


QUANTITIES = ("ev2", "ev3abs", "ez2", "ez4", "ez2v", "ez2_over_f", "ez4_over_f3",
              "ent_F", "ez2_minus_lambda_l1", "residual", "gap")


def scan(f, lams):
    """Every tracked quantity of density ``f`` at each lambda; dict of arrays."""
    out = {q: np.empty(len(lams)) for q in QUANTITIES}
    for i, lam in enumerate(lams):
        p = NoiseParams.from_lambda(lam)
        t = noisy_triple(f, p)
        m = moments(t)
        ent_F = ent_functional(t.F)
        ent_T = ent_functional(t.F + t.Z)
        for q in QUANTITIES[:7]:
            out[q][i] = getattr(m, q)
        out["ent_F"][i] = ent_F
        out["ez2_minus_lambda_l1"][i] = m.ez2 - p.lam * m.l1
        out["residual"][i] = ent_T - p.lam * m.l1 / (2.0 * _LN2)
        out["gap"][i] = ent_T - ent_F - m.ez2_over_f / (2.0 * _LN2)
    return out


# --------------------------------------------------------------------------
# Test densities

def indicator_density(b):
    """2 * 1{b = +1} normalized to mean 1."""
    return normalize(RealFunction(b.n, b.indicator))


def dictator_lift():
    """f = 1 + x_1 on one variable."""
    return RealFunction(1, np.array([2.0, 0.0]))


def even_pair():
    """f = 1 + x_1 x_2 / 2."""
    return RealFunction(2, np.array([1.5, 0.5, 0.5, 1.5]))


def random_density(n, rng, bound=4.0, power=2.0):
    """Random nonnegative density with sup norm at most ``bound``."""
    while True:
        u = rng.random(1 << n) ** power
        f = u / u.mean()
        if f.max() <= bound:
            return RealFunction(n, f)


def density_family(seed=0):
    """The standard test densities, keyed by name."""
    rng = np.random.default_rng(seed)
    return {
        "dictator": dictator_lift(),
        "even_pair": even_pair(),
        "maj3": indicator_density(majority(3)),
        "maj5": indicator_density(majority(5)),
        "tribes6": indicator_density(tribes(3, 2)),
        "random5": random_density(5, rng),
    }


# --------------------------------------------------------------------------
# Hypercontractivity

def lq_norm(f, q):
    """(E|f|^q)^(1/q)."""
    if q < 1:
        raise ValueError("q must be >= 1")
    v = np.abs(f.values)
    return float(np.mean(v ** q) ** (1.0 / q))


def fourier_level_part(f, k):
    """The degree-k homogeneous part of f."""
    s = wht(f)
    keep = subset_sizes(f.n) == k
    coeffs = np.where(keep, s.coeffs, 0.0)
    return inverse_wht(type(s)(s.n, coeffs))


def hypercontractive_margin(h, k, q):
    """(sqrt(q-1))^k ||h||_2 - ||h||_q; nonnegative for homogeneous degree-k h."""
    return math.sqrt(q - 1.0) ** k * lq_norm(h, 2.0) - lq_norm(h, q)


# --------------------------------------------------------------------------
# Capacity expansion

def capacity_expansion_residual(p):
    lam = p.lam
    return abs(capacity(p) - lam / (2.0 * _LN2) - lam ** 2 / (12.0 * _LN2))


def capacity_expansion_check(alpha_grid=None):
    """Fit |1 - H(alpha) - lambda/(2 ln 2) - lambda^2/(12 ln 2)| against lambda."""
    if alpha_grid is None:
        alphas = (1.0 - np.sqrt(lambda_grid(1e-3, 0.2, 12))) / 2.0
    else:
        alphas = np.asarray(alpha_grid, dtype=np.float64)
    params = [NoiseParams(a) for a in alphas]
    lams = np.array([p.lam for p in params])
    if np.any(lams > 0.2 + 1e-12):
        raise ValueError("capacity expansion check needs lambda <= 0.2")
    order = np.argsort(lams)
    lams = lams[order]
    vals = np.array([capacity_expansion_residual(params[i]) for i in order])
    keep = lams > 0.0
    return scaling_fit(lams[keep], vals[keep])


# --------------------------------------------------------------------------
# Fourier tail of near-optimal Boolean functions (exhaustive, n <= 4)

@dataclass
class ConcentrationRow:
    class_id: int
    table: str
    orbit_size: int
    mu: float
    mi: float
    xi: float
    xi_over_lambda: float


def concentration_report(n, p, tau=1.0, tol=1e-10):
    """Every class with I(b; Y) >= tau * capacity, with its tail weight xi."""
    from .kernels import batch_scores, codes_to_bits
    from .search import enumerate_canonical

    if n > 4:
        raise ValueError("concentration_report enumerates exhaustively and needs n <= 4")
    if not 0.0 < tau <= 1.0:
        raise ValueError("tau must lie in (0, 1]")
    classes = enumerate_canonical(n)
    N = 1 << n
    tables = codes_to_bits(classes.codes, N)
    total, _, mu = batch_scores(tables, np.array([p.rho]))
    spec = (2.0 * tables - 1.0).astype(np.float64)
    from .kernels import fwht
    fwht(spec)
    spec /= N
    lvl = subset_sizes(n)
    xi = (spec[:, lvl >= 2] ** 2).sum(axis=1)
    cap = capacity(p)
    rows = []
    for c in range(len(classes)):
        if total[c, 0] >= tau * cap - tol:
            rows.append(ConcentrationRow(
                class_id=c,
                table="".join(map(str, tables[c])),
                orbit_size=int(classes.sizes[c]),
                mu=float(mu[c]),
                mi=float(total[c, 0]),
                xi=float(xi[c]),
                xi_over_lambda=float(xi[c] / p.lam) if p.lam > 0 else float("nan"),
            ))
    return rows


# --------------------------------------------------------------------------
# Noise-range threshold curves

@dataclass
class ThresholdTable:
    lambdas: np.ndarray
    t_new: np.ndarray
    t_old: np.ndarray
    slope_new: float = field(default=float("nan"))
    slope_old: float = field(default=float("nan"))

    @property
    def ratio(self):
        return self.t_new / self.t_old

    @property
    def ratio_shrinks_toward_zero(self):
        """The ratio strictly decreases as lambda decreases along the grid."""
        return bool(np.all(np.diff(self.ratio) > 0))

    @property
    def ratio_below_one(self):
        return bool(np.all(self.ratio < 1.0))

    @property
    def slope_gap(self):
        return self.slope_new - self.slope_old

    @property
    def slope_gap_leading(self):
        """Slope gap of lam ln(1/lam)^1.5 over lam^(1/3) ln(1/lam)^1.5 (no additive lam)."""
        L = np.log(1.0 / self.lambdas) ** 1.5
        return scaling_fit(self.lambdas, self.lambdas * L).slope - scaling_fit(self.lambdas, self.t_old).slope

    def rows(self):
        return list(zip(self.lambdas.tolist(), self.t_new.tolist(), self.t_old.tolist(),
                        self.ratio.tolist()))


def t_new(lam):
    L = np.log(1.0 / np.asarray(lam, dtype=np.float64))
    return lam + lam * L ** 1.5


def t_old(lam):
    L = np.log(1.0 / np.asarray(lam, dtype=np.float64))
    return lam ** (1.0 / 3.0) * L ** 1.5


def threshold_curves(lambdas=None):
    """t_new = lam + lam ln(1/lam)^1.5 against t_old = lam^(1/3) ln(1/lam)^1.5."""
    lams = lambda_grid(1e-6, 1e-1, 26) if lambdas is None else np.asarray(lambdas, dtype=np.float64)
    if np.any((lams <= 0.0) | (lams >= 1.0)):
        raise ValueError("lambda grid must lie in (0, 1)")
    lams = np.sort(lams)
    tn, to = t_new(lams), t_old(lams)
    table = ThresholdTable(lams, tn, to)
    if len(lams) >= 4:
        table.slope_new = scaling_fit(lams, tn).slope
        table.slope_old = scaling_fit(lams, to).slope
    return table
