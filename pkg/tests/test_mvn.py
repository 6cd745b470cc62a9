from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.stats import multivariate_normal, norm

from binmcp.mvn import (MvnAccuracy, MvnError, max_quantile, max_tail_at_most, max_tail_many,
                        mvn_max_tail)


def equicorrelated(m, rho):
    return np.full((m, m), rho) + (1 - rho) * np.eye(m)


@pytest.mark.parametrize("m", [1, 2, 3, 5, 8])
@pytest.mark.parametrize("t", [-0.5, 1.0, 1.6449, 2.5, 4.0])
def test_independent_closed_form(m, t):
    assert mvn_max_tail(t, np.eye(m)) == pytest.approx(1 - norm.cdf(t) ** m, abs=1e-12)


def test_perfect_correlation_is_univariate():
    assert mvn_max_tail(2.0, np.ones((4, 4))) == pytest.approx(norm.sf(2.0), abs=1e-12)


def test_bivariate_against_scipy():
    R = np.array([[1.0, 0.6], [0.6, 1.0]])
    ref = 1 - multivariate_normal(cov=R).cdf([1.8, 1.8])
    assert mvn_max_tail(1.8, R) == pytest.approx(ref, abs=2e-4)


def test_equicorrelated_against_one_dimensional_integral():
    # Z_j = sqrt(rho) W + sqrt(1 - rho) E_j gives P(max <= t) as one integral
    m, rho, t = 5, 0.5, 2.0
    w = np.linspace(-9, 9, 20001)
    inner = norm.cdf((t - np.sqrt(rho) * w) / np.sqrt(1 - rho)) ** m * norm.pdf(w)
    ref = 1 - np.trapezoid(inner, w)
    assert mvn_max_tail(t, equicorrelated(m, rho)) == pytest.approx(ref, abs=1e-4)


def test_singular_zero_sum_structure():
    # correlation of 5 zero-sum contrasts over 5 arms has rank 4
    rng = np.random.default_rng(11)
    C = rng.normal(size=(5, 5))
    C -= C.mean(axis=1, keepdims=True)
    v = rng.uniform(0.1, 2, 5)
    S = (C * v) @ C.T
    R = S / np.sqrt(np.outer(np.diag(S), np.diag(S)))
    z = rng.multivariate_normal(np.zeros(5), R, size=400_000, method="eigh")
    emp = np.mean(z.max(axis=1) >= 1.7)
    se = np.sqrt(emp * (1 - emp) / z.shape[0])
    assert abs(mvn_max_tail(1.7, R) - emp) < 3 * se + 1e-4


def test_error_control_and_reproducibility():
    R = equicorrelated(4, 0.3)
    assert mvn_max_tail(1.9, R) == mvn_max_tail(1.9, R)
    a = mvn_max_tail(1.9, R, MvnAccuracy(seed=1))
    b = mvn_max_tail(1.9, R, MvnAccuracy(seed=2))
    assert abs(a - b) < 2e-4


@given(t1=st.floats(-1, 3), dt=st.floats(0.01, 1), rho=st.floats(0.0, 0.9))
def test_monotone_in_t(t1, dt, rho):
    R = equicorrelated(3, rho)
    assert mvn_max_tail(t1 + dt, R) <= mvn_max_tail(t1, R) + 2e-4


def test_bonferroni_and_sidak_bounds():
    R = equicorrelated(5, 0.4)
    p = mvn_max_tail(2.2, R)
    assert norm.sf(2.2) - 1e-4 <= p <= 5 * norm.sf(2.2) + 1e-4


def test_many_and_decision():
    R = equicorrelated(3, 0.5)
    t = np.array([1.0, 2.0, 3.0])
    many = max_tail_many(t, R)
    assert np.all(np.diff(many) < 0)
    assert max_tail_at_most(2.5, R, 0.05) and not max_tail_at_most(1.5, R, 0.05)


def test_quantile_inverts_tail():
    R = equicorrelated(4, 0.5)
    q = max_quantile(R, 0.05)
    assert mvn_max_tail(q, R) == pytest.approx(0.05, abs=2e-4)
    assert max_quantile(np.eye(2), 0.05) == pytest.approx(norm.ppf(np.sqrt(0.95)), abs=1e-4)
    assert max_quantile(np.eye(1), 0.05) == pytest.approx(norm.ppf(0.95), abs=1e-12)


@pytest.mark.parametrize("R", [
    np.array([[1.0, 0.2], [0.3, 1.0]]),
    np.array([[2.0, 0.0], [0.0, 1.0]]),
    np.array([[1.0, 0.9, -0.9], [0.9, 1.0, 0.9], [-0.9, 0.9, 1.0]]),
    np.ones(3),
])
def test_invalid_correlation(R):
    with pytest.raises(MvnError):
        mvn_max_tail(1.0, R)


def test_invalid_settings():
    with pytest.raises(MvnError):
        MvnAccuracy(abs_tol=0)
    with pytest.raises(MvnError):
        MvnAccuracy(n_shifts=1)
    with pytest.raises(MvnError):
        mvn_max_tail(float("inf"), np.eye(2))
    with pytest.raises(MvnError):
        max_quantile(np.eye(2), 1.5)


def test_threads_share_point_sets_safely():
    import binmcp.mvn as mvn

    mvn._POINT_CACHE.clear()
    R = np.full((4, 4), 0.3) + 0.7 * np.eye(4)
    ts = np.linspace(0.5, 3.0, 16)
    serial = [mvn_max_tail(t, R, MvnAccuracy(seed=7)) for t in ts]
    mvn._POINT_CACHE.clear()
    with ThreadPoolExecutor(8) as pool:
        threaded = list(pool.map(lambda t: mvn_max_tail(t, R, MvnAccuracy(seed=7)), ts))
    assert threaded == serial
