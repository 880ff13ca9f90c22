import math

import numpy as np
import pytest

from conftest import random_boolean
from hyperinfo import NoiseParams, wht
from hyperinfo.info import binary_entropy, capacity, sum_coordinate_mi
from hyperinfo.oq1 import (
    BiasedParams,
    PolytopePoint,
    bias_K,
    curve_rows,
    default_K_grid,
    extreme_point_bound,
    format_curve_csv,
    g_mu,
    h_mu,
    m_k,
    m_k_prime,
    psi_mu,
    series_f,
    series_f_truncated,
    split_k,
    verify_thm2_bound_chain,
)


def test_h_mu_value():
    # mu = -1/2, z = 1/2, rho = 1/2: entropy arguments (1 + mu +- rho z)/2 = 0.375, 0.125
    expected = 0.5 * binary_entropy(0.375) + 0.5 * binary_entropy(0.125)
    assert abs(h_mu(0.5, -0.5, NoiseParams(0.25)) - expected) < 1e-15


def test_h_mu_feasibility():
    with pytest.raises(ValueError):
        h_mu(1.0, 0.5, 1.0)
    assert h_mu(0.5, 0.5, 1.0) == pytest.approx(0.5)


def test_g_mu_at_zero_and_dictator():
    assert abs(g_mu(0.0, 0.3, 0.7)) < 1e-15
    assert math.isclose(g_mu(1.0, 0.0, 0.5), capacity(NoiseParams(0.25)), rel_tol=1e-14)


def test_psi_convexity():
    for mu in (0.0, 0.3, -0.3, 0.7, -0.7):
        C2 = (1 - abs(mu)) ** 2
        w = np.linspace(0, C2, 201)
        for a in (0.1, 0.25, 0.4):
            v = psi_mu(w, mu, NoiseParams(a))
            assert np.diff(v, 2).min() >= -1e-12
    with pytest.raises(ValueError):
        psi_mu(-0.1, 0.0, 0.5)


def test_biased_params():
    bp = BiasedParams(0.5, 0.5)
    assert bp.C == 0.5 and bp.R2 == 0.75 and bp.K == 3.0
    with pytest.raises(ValueError):
        BiasedParams(1.0, 0.5)


def test_polytope_point():
    pt = PolytopePoint((0.25, 0.25, 0.25))
    assert pt.is_feasible(0.5)
    assert not PolytopePoint((0.3,)).is_feasible(0.5)
    assert pt.objective(0.5, 0.5) == pytest.approx(3 * psi_mu(0.25, 0.5, 0.5))


def test_m_k():
    for a in (0.05, 0.25, 0.45):
        p = NoiseParams(a)
        assert math.isclose(m_k(1.0, p), capacity(p), rel_tol=1e-12)
    assert m_k(3.0, 0.5) == pytest.approx(3 * g_mu(0.5, 0.5, 0.5), abs=1e-15)
    assert m_k(3.0, 0.0) == 0.0
    with pytest.raises(ValueError):
        m_k(0.5, 0.5)


def test_m_k_prime_errors():
    for rho in (0.0, 1.0):
        with pytest.raises(ValueError):
            m_k_prime(2.0, rho)


def test_series_f():
    assert series_f(0.0) == 2.0
    for x in (0.1, 0.5, 0.9):
        assert math.isclose(series_f(x), math.log((1 + x) / (1 - x)) / x, rel_tol=1e-14)
        assert math.isclose(series_f(x), series_f_truncated(x, 400), rel_tol=1e-12)
    with pytest.raises(ValueError):
        series_f(1.0)


def test_split_k():
    assert split_k(3.0) == (3, 0.0)
    assert split_k(3.0 + 1e-14) == (3, 0.0)
    k, theta = split_k(2.5)
    assert k == 2 and theta == 0.5


def test_extreme_point_bound():
    p = NoiseParams(0.25)
    assert extreme_point_bound(1, 0.5, p) == pytest.approx(psi_mu(0.25, 0.5, p), abs=1e-15)
    assert extreme_point_bound(4, 1.0, p) == 0.0
    assert extreme_point_bound(4, 0.3, NoiseParams(0.5)) == 0.0
    # K = 3 reachable with n = 4: three full vertices
    assert extreme_point_bound(4, 0.5, p) == pytest.approx(m_k(3.0, p), abs=1e-15)
    # symmetric in mu
    assert extreme_point_bound(3, -0.4, p) == extreme_point_bound(3, 0.4, p)


def test_functions_below_vertex_bound(rng):
    for _ in range(200):
        n = int(rng.integers(1, 7))
        b = random_boolean(n, rng)
        mu = wht(b)[0]
        if abs(mu) >= 1.0:
            continue
        p = NoiseParams(float(rng.uniform(0.01, 0.49)))
        s = sum_coordinate_mi(b, p).sum_coord_mi
        epb = extreme_point_bound(n, mu, p)
        assert s <= epb + 1e-12
        assert epb <= m_k(bias_K(mu), p) + 1e-12 <= capacity(p) + 2e-12


def test_chain_report():
    rep = verify_thm2_bound_chain(default_K_grid(10, 50), [0.1, 0.5, 0.9])
    assert rep.passed
    d = rep.to_dict()
    assert d["n_K"] == 10 and d["n_rho"] == 3
    with pytest.raises(ValueError):
        verify_thm2_bound_chain([0.5], [0.5])


def test_curve_csv():
    rows = curve_rows([1.0, 2.0], [0.5])
    text = format_curve_csv(rows)
    lines = text.splitlines()
    assert lines[0] == "K,rho,M_K,M_K_prime,margin_vs_M1"
    assert len(lines) == 3
    assert float(lines[1].split(",")[4]) == 0.0
