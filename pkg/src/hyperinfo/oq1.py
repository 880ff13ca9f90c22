"""Bound machinery for the sum of coordinate-wise mutual informations.

For a Boolean function with bias ``mu`` and level-one coefficients ``z_i``,
``I(b; Y_i) = H(b) - h_mu(z_i)``.  With ``w_i = z_i**2`` the objective is a sum
of convex terms ``psi_mu(w_i)`` over the polytope

    w_i >= 0,   sum w_i <= R^2 = 1 - mu^2,   w_i <= C^2 = (1 - |mu|)^2,

so its maximum sits at a vertex.  ``M_K(rho) = K psi_mu(C^2)`` with
``K = R^2 / C^2`` dominates every vertex value and never exceeds the BSC
capacity ``M_1(rho) = 1 - H(alpha)``.
"""
from dataclasses import dataclass
import csv
import io
import math

import numpy as np

from .hypercube import NoiseParams
from .info import binary_entropy
from .kernels import h2_numpy

_LN2 = math.log(2.0)
_FEAS = 1e-15
_SNAP = 1e-12


@dataclass(frozen=True)
class BiasedParams:
    mu: float
    rho: float

    def __post_init__(self):
        if not -1.0 < self.mu < 1.0:
            raise ValueError("mu must lie in (-1, 1)")
        if not 0.0 < self.rho <= 1.0:
            raise ValueError("rho must lie in (0, 1]")

    @property
    def C(self):
        return 1.0 - abs(self.mu)

    @property
    def R2(self):
        return 1.0 - self.mu ** 2

    @property
    def K(self):
        return (1.0 + abs(self.mu)) / (1.0 - abs(self.mu))


@dataclass(frozen=True)
class PolytopePoint:
    """Squared level-one coefficients ``w_i = z_i**2``."""

    w: tuple

    def is_feasible(self, mu, tol=1e-12):
        w = np.asarray(self.w, dtype=np.float64)
        C2 = (1.0 - abs(mu)) ** 2
        return bool(np.all(w >= -tol) and w.sum() <= 1.0 - mu ** 2 + tol and np.all(w <= C2 + tol))

    def objective(self, mu, p):
        return float(sum(psi_mu(wi, mu, p) for wi in self.w))


def _rho(p):
    return p.rho if isinstance(p, NoiseParams) else float(p)


def h_mu(z, mu, p):
    """Average entropy of (1 + mu +- rho z)/2; equals H(b | Y_i) at z = z_i."""
    rho = _rho(p)
    z = np.asarray(z, dtype=np.float64)
    if np.any(abs(mu) + rho * np.abs(z) > 1.0 + _FEAS):
        raise ValueError("entropy argument outside [0, 1]: need |mu| + rho |z| <= 1")
    hp = h2_numpy(np.clip((1.0 + mu + rho * z) / 2.0, 0.0, 1.0))
    hm = h2_numpy(np.clip((1.0 + mu - rho * z) / 2.0, 0.0, 1.0))
    out = 0.5 * hp + 0.5 * hm
    return float(out) if out.ndim == 0 else out


def g_mu(z, mu, p):
    """H(b) - h_mu(z): the information one coordinate with coefficient z carries."""
    return binary_entropy((1.0 + mu) / 2.0) - h_mu(z, mu, p)


def psi_mu(w, mu, p):
    """g_mu(sqrt(w)), the per-coordinate objective in the squared coefficient."""
    w = np.asarray(w, dtype=np.float64)
    if np.any(w < 0.0):
        raise ValueError("psi_mu needs w >= 0")
    out = g_mu(np.sqrt(w), mu, p)
    return float(out) if np.ndim(out) == 0 else out


def _m_k(K, rho):
    if K < 1.0:
        raise ValueError("K must be >= 1")
    if rho == 0.0:
        return 0.0
    s = K + 1.0
    return K * (binary_entropy(K / s) - 0.5 * binary_entropy((K + rho) / s)
                - 0.5 * binary_entropy((K - rho) / s))


def m_k(K, p):
    """M_K(rho) = K H(K/(K+1)) - K/2 H((K+rho)/(K+1)) - K/2 H((K-rho)/(K+1))."""
    return _m_k(float(K), _rho(p))


def _m_k_prime(K, rho):
    if K < 1.0:
        raise ValueError("K must be >= 1")
    if not 0.0 < rho < 1.0:
        raise ValueError("derivative is only evaluated for 0 < rho < 1")
    return K / (2.0 * (K + 1.0) * _LN2) * math.log((1.0 + rho) * (K + rho) / ((1.0 - rho) * (K - rho)))


def m_k_prime(K, p):
    """d M_K / d rho, in bits per unit rho."""
    return _m_k_prime(float(K), _rho(p))


def series_f(x):
    """(1/x) ln((1+x)/(1-x)) = 2 sum_j x^(2j)/(2j+1), with f(0) = 2."""
    if not 0.0 <= x < 1.0:
        raise ValueError("series_f needs 0 <= x < 1")
    if x == 0.0:
        return 2.0
    return 2.0 * math.atanh(x) / x


def series_f_truncated(x, terms=200):
    j = np.arange(terms)
    return float(2.0 * np.sum(x ** (2 * j) / (2 * j + 1)))


def split_k(K):
    """floor(K) and the fractional part, snapping near-integers to theta = 0."""
    r = round(K)
    if abs(K - r) <= _SNAP:
        return int(r), 0.0
    k = math.floor(K)
    return k, K - k


def extreme_point_bound(n, mu, p):
    """Largest vertex value of sum_i psi_mu(w_i) over the feasible polytope."""
    rho = _rho(p)
    mu = abs(float(mu))
    if mu >= 1.0 or rho == 0.0:
        return 0.0
    C2 = (1.0 - mu) ** 2
    K = (1.0 + mu) / (1.0 - mu)
    top = psi_mu(C2, mu, rho)
    if n >= K:
        k, theta = split_k(K)
        return k * top + (psi_mu(theta * C2, mu, rho) if theta > 0.0 else 0.0)
    return n * top


def bias_K(mu):
    mu = abs(mu)
    return (1.0 + mu) / (1.0 - mu)


@dataclass
class ChainReport:
    """Outcome of checking M_K' <= M_1' and M_K <= M_1 over a (K, rho) grid."""

    K_grid: np.ndarray
    rho_grid: np.ndarray
    deriv_margin: np.ndarray
    value_margin: np.ndarray
    tol: float = 1e-12

    @property
    def worst_deriv_margin(self):
        return float(self.deriv_margin.min())

    @property
    def worst_value_margin(self):
        return float(self.value_margin.min())

    def worst_location(self, which="value"):
        arr = self.value_margin if which == "value" else self.deriv_margin
        i, j = np.unravel_index(np.argmin(arr), arr.shape)
        return float(self.K_grid[i]), float(self.rho_grid[j])

    @property
    def passed(self):
        return self.worst_deriv_margin >= -self.tol and self.worst_value_margin >= -self.tol

    def to_dict(self):
        return {
            "passed": self.passed,
            "tol": self.tol,
            "worst_deriv_margin": self.worst_deriv_margin,
            "worst_deriv_location": self.worst_location("deriv"),
            "worst_value_margin": self.worst_value_margin,
            "worst_value_location": self.worst_location("value"),
            "n_K": int(len(self.K_grid)),
            "n_rho": int(len(self.rho_grid)),
        }


def default_K_grid(points=40, K_max=100.0):
    return np.geomspace(1.0, K_max, points)


def default_rho_grid():
    return np.round(np.arange(1, 100) / 100.0, 2)


def verify_thm2_bound_chain(K_grid=None, rho_grid=None, tol=1e-12):
    K_grid = default_K_grid() if K_grid is None else np.asarray(K_grid, dtype=np.float64)
    rho_grid = default_rho_grid() if rho_grid is None else np.asarray(rho_grid, dtype=np.float64)
    if np.any(K_grid < 1.0) or np.any((rho_grid <= 0.0) | (rho_grid >= 1.0)):
        raise ValueError("need K >= 1 and 0 < rho < 1")
    dm = np.empty((len(K_grid), len(rho_grid)))
    vm = np.empty_like(dm)
    for j, rho in enumerate(rho_grid):
        d1, v1 = _m_k_prime(1.0, rho), _m_k(1.0, rho)
        for i, K in enumerate(K_grid):
            dm[i, j] = d1 - _m_k_prime(K, rho)
            vm[i, j] = v1 - _m_k(K, rho)
    return ChainReport(K_grid, rho_grid, dm, vm, tol)


def curve_rows(K_grid=None, rho_grid=None):
    """Rows (K, rho, M_K, M_K', M_1 - M_K) for the curve CSV."""
    K_grid = default_K_grid() if K_grid is None else K_grid
    rho_grid = default_rho_grid() if rho_grid is None else rho_grid
    rows = []
    for K in K_grid:
        for rho in rho_grid:
            mk = _m_k(float(K), float(rho))
            rows.append((float(K), float(rho), mk, _m_k_prime(float(K), float(rho)),
                         _m_k(1.0, float(rho)) - mk))
    return rows


def format_curve_csv(rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["K", "rho", "M_K", "M_K_prime", "margin_vs_M1"])
    for row in rows:
        w.writerow([format(v, ".17g") for v in row])
    return buf.getvalue()
