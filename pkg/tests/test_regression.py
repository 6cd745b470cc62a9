from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from binmcp.design import DoseDesign, logit
from binmcp.regression import (AllZero, BinomialCounts, FitMethod, choose_fit, firth_closed_form,
                               firth_newton, fit_firth, fit_logistic)


def counts(x, n=30):
    return BinomialCounts(tuple(x), DoseDesign.balanced((0, 0.125, 0.25, 0.5, 1), n))


def test_counts_validation(design):
    with pytest.raises(ValueError):
        BinomialCounts((0, 1), design)
    with pytest.raises(ValueError):
        BinomialCounts((0, 1, 2, 3, 31), design)
    with pytest.raises(ValueError):
        BinomialCounts((0, 1, 2, 3, 1.5), design)


def test_boundary_flags():
    assert counts((0, 3, 30, 4, 5)).boundary.tolist() == [True, False, True, False, False]


def test_ordinary_ml_interior():
    fit = fit_logistic(counts((3, 6, 9, 12, 15)))
    p = np.array([3, 6, 9, 12, 15]) / 30
    np.testing.assert_allclose(fit.eta, np.log(p / (1 - p)))
    np.testing.assert_allclose(fit.var, 1 / (30 * p * (1 - p)))
    assert fit.converged and fit.method is FitMethod.ORDINARY_ML


def test_ordinary_ml_separation_is_flagged():
    fit = fit_logistic(counts((0, 13, 14, 15, 15)))
    assert not fit.converged
    assert np.isneginf(fit.eta[0]) and np.isinf(fit.var[0])


@given(n=st.integers(1, 40), data=st.data())
def test_newton_matches_closed_form(n, data):
    x = data.draw(st.integers(0, n))
    eta, _ = firth_newton([x], [n])
    assert abs(eta[0] - firth_closed_form([x], [n])[0]) < 1e-8


def test_newton_full_sweep():
    for n in range(1, 41):
        x = np.arange(n + 1)
        eta, _ = firth_newton(x, np.full(x.shape, n))
        assert np.max(np.abs(eta - logit((x + 0.5) / (n + 1)))) < 1e-8


def test_case_study_placebo():
    fit = choose_fit(counts((0, 13, 14, 15, 15)))
    assert fit.method is FitMethod.FIRTH
    assert fit.eta[0] == pytest.approx(-4.11, abs=0.01)
    assert fit.var[0] == pytest.approx(2.101, abs=0.005)


def test_case_study_reconstructed_fit():
    # estimates and standard errors of the reported penalized fit, in the
    # intercept plus treatment-effect coding
    fit = choose_fit(counts((0, 11, 10, 12, 12)))
    est = fit.treatment_effects()
    se = np.sqrt(np.r_[fit.var[0], fit.var[1:] + fit.var[0]])
    np.testing.assert_allclose(est, [-4.11, 3.58, 3.44, 3.72, 3.72], atol=0.006)
    np.testing.assert_allclose(se, [1.45, 1.50, 1.50, 1.50, 1.50], atol=0.006)
    np.testing.assert_allclose(fit.var, [2.101, 0.143, 0.149, 0.139, 0.139], atol=5e-4)


def test_choose_fit_rules():
    assert choose_fit(counts((2, 3, 4, 5, 6))).method is FitMethod.ORDINARY_ML
    assert choose_fit(counts((2, 3, 4, 5, 30))).method is FitMethod.FIRTH
    with pytest.raises(AllZero):
        choose_fit(counts((0, 0, 0, 0, 0)))


def test_all_responders_is_fittable():
    fit = choose_fit(counts((30,) * 5))
    np.testing.assert_allclose(fit.eta, logit(30.5 / 31))


@given(st.lists(st.integers(0, 12), min_size=5, max_size=5))
def test_firth_finite_and_shrunk(x):
    fit = fit_firth(counts(x, 12))
    assert np.all(np.isfinite(fit.eta)) and np.all(fit.var > 0)
    # estimates are pulled towards 0.5 relative to the raw proportions
    p = 1 / (1 + np.exp(-fit.eta))
    raw = np.array(x) / 12
    assert np.all(np.abs(p - 0.5) <= np.abs(raw - 0.5) + 1e-12)
