"""Entropies and exact mutual information through the binary symmetric channel.

All quantities are in bits.  ``0 log 0`` is taken as 0, and probabilities within
1e-15 of [0, 1] are clamped onto it.
"""
from dataclasses import dataclass, field
import json
import math

import numpy as np

from .hypercube import RealFunction, apply_noise, wht
from .kernels import h2_numpy, popcounts

_LN2 = math.log(2.0)
_EDGE = 1e-15


def _as_probability(p):
    p = np.asarray(p, dtype=np.float64)
    if np.any(p < -_EDGE) or np.any(p > 1.0 + _EDGE) or np.any(np.isnan(p)):
        raise ValueError("probability outside [0, 1]")
    return np.clip(p, 0.0, 1.0)


def binary_entropy(p):
    """H(p) = -p log2 p - (1-p) log2(1-p); scalar in, float out, arrays vectorize."""
    q = _as_probability(p)
    out = h2_numpy(q)
    return float(out) if out.ndim == 0 else out


def capacity(p):
    """BSC capacity 1 - H(alpha).

    Evaluated as Ent(1 + rho x_1) so small capacities keep full relative precision.
    """
    rho = p.rho
    if rho == 0.0:
        return 0.0
    if rho == 1.0:
        return 1.0
    return 0.5 * ((1 + rho) * math.log1p(rho) + (1 - rho) * math.log1p(-rho)) / _LN2


def ent_functional(g):
    """Ent(g) = E[g log2 g] - E[g] log2 E[g] for a nonnegative function.

    Accepts a :class:`RealFunction` or an array of point values.
    """
    vals = np.asarray(g.values if isinstance(g, RealFunction) else g, dtype=np.float64)
    if np.any(vals < -_EDGE):
        raise ValueError("Ent needs a nonnegative function")
    vals = np.where(vals < 0.0, 0.0, vals)
    m = vals.mean()
    if m <= 0.0:
        raise ValueError("Ent is undefined for the zero function")
    # m * E[phi(g/m)], phi(t) = t ln t - t + 1 >= 0, written around t = 1
    u = vals / m - 1.0
    with np.errstate(divide="ignore", invalid="ignore"):
        phi = np.where(u > -1.0, (1.0 + u) * np.log1p(u) - u, 1.0)
    return float(m * phi.mean() / _LN2)


def posterior(b, p):
    """P(b(X) = 1 | Y = y) for every y, i.e. T_alpha applied to 1{b = 1}."""
    q = apply_noise(RealFunction(b.n, b.indicator), p).values
    return np.clip(q, 0.0, 1.0)


def mutual_information_ent(b, p):
    """I(b(X); Y) = Ent(T f) + Ent(T(1 - f)) with f = 1{b = 1}."""
    q = posterior(b, p)
    total = 0.0
    for g in (q, 1.0 - q):
        if g.mean() > 0.0:
            total += ent_functional(g)
    return total


def mutual_information_cond(b, p):
    """I(b(X); Y) = H(b) - E_Y H(P(b = 1 | Y))."""
    q = posterior(b, p)
    return float(h2_numpy(b.indicator.mean()) - h2_numpy(q).mean())


def mutual_information(b, p):
    """Exact I(b(X); Y) in bits (conditional-entropy route)."""
    return mutual_information_cond(b, p)


def _mi_from_joint(joint):
    joint = np.asarray(joint, dtype=np.float64)
    pv = joint.sum(axis=1, keepdims=True)
    py = joint.sum(axis=0, keepdims=True)
    denom = pv * py
    mask = joint > 0
    return float(np.sum(joint[mask] * np.log2(joint[mask] / denom[mask])))


def _transition(n, alpha):
    N = 1 << n
    idx = np.arange(N)
    d = popcounts(N)[idx[:, None] ^ idx[None, :]]
    return alpha ** d * (1.0 - alpha) ** (n - d)


def mutual_information_joint(b, p):
    """I(b(X); Y) from the explicit 2 x 2^n joint table; O(4^n) oracle."""
    if b.n > 12:
        raise ValueError("joint-table oracle is limited to n <= 12")
    N = 1 << b.n
    P = _transition(b.n, p.alpha) / N
    joint = np.stack([P[b.table == 0].sum(axis=0), P[b.table == 1].sum(axis=0)])
    return _mi_from_joint(joint)


def coordinate_mi_joint(b, i, p):
    """I(b(X); Y_i) from the explicit 2 x 2 joint table."""
    if not 1 <= i <= b.n:
        raise ValueError(f"coordinate {i} out of range for n={b.n}")
    N = 1 << b.n
    xi_bit = (np.arange(N) >> (i - 1)) & 1
    joint = np.zeros((2, 2))
    for v in (0, 1):
        for ybit in (0, 1):
            flip = xi_bit != ybit
            w = np.where(flip, p.alpha, 1.0 - p.alpha) / N
            joint[v, ybit] = w[b.table == v].sum()
    return _mi_from_joint(joint)


def conditional_entropy_coord(mu, z, rho):
    """h_mu(z) = H(b | Y_i) given bias mu and level-one coefficient z (vectorized)."""
    mu = np.asarray(mu, dtype=np.float64)
    z = np.asarray(z, dtype=np.float64)
    hp = h2_numpy(np.clip((1.0 + mu + rho * z) / 2.0, 0.0, 1.0))
    hm = h2_numpy(np.clip((1.0 + mu - rho * z) / 2.0, 0.0, 1.0))
    return 0.5 * hp + 0.5 * hm


def _mu_and_z(b):
    s = wht(b)
    return s.coeffs[0], np.array([s.coeffs[1 << i] for i in range(b.n)])


def coordinate_mi(b, i, p):
    """I(b(X); Y_i) = H(b) - h_mu(z_i)."""
    if not 1 <= i <= b.n:
        raise ValueError(f"coordinate {i} out of range for n={b.n}")
    mu, z = _mu_and_z(b)
    hb = h2_numpy((1.0 + mu) / 2.0)
    return float(hb - conditional_entropy_coord(mu, z[i - 1], p.rho))


@dataclass
class MIReport:
    n: int
    alpha: float
    total_mi: float
    coord_mi: np.ndarray
    mu: float
    level1: np.ndarray = field(repr=False)

    @property
    def sum_coord_mi(self):
        return float(np.sum(self.coord_mi))

    def to_dict(self):
        return {
            "n": self.n,
            "alpha": self.alpha,
            "mu": float(self.mu),
            "total_mi": float(self.total_mi),
            "sum_coord_mi": self.sum_coord_mi,
            "coord_mi": [float(v) for v in self.coord_mi],
            "z": [float(v) for v in self.level1],
        }

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2)


def sum_coordinate_mi(b, p):
    """Coordinate-wise MI of every input bit plus the total I(b(X); Y)."""
    mu, z = _mu_and_z(b)
    hb = h2_numpy((1.0 + mu) / 2.0)
    coord = hb - conditional_entropy_coord(mu, z, p.rho)
    return MIReport(n=b.n, alpha=p.alpha, total_mi=mutual_information(b, p),
                    coord_mi=coord, mu=float(mu), level1=z)
