from __future__ import annotations

import math

import numpy as np
import pytest

from binmcp.design import any_arm_zero_probability, case_study_design, default_candidates
from binmcp.simulation import (METHODS, MethodStats, Scenario, ScenarioError, _chunks, run_rng,
                               run_scenario, simulate_trial)


def scenario(true_p, **kw):
    kw.setdefault("candidates", default_candidates(0.1))
    kw.setdefault("design", case_study_design())
    return Scenario(label=kw.pop("label", "s"), true_p=true_p, **kw)


class TestScenario:
    def test_validation(self):
        with pytest.raises(ScenarioError):
            scenario((0.1,) * 4)
        with pytest.raises(ScenarioError):
            scenario((0.1, 0.1, 0.1, 0.1, 1.2))
        with pytest.raises(ScenarioError):
            scenario((0.1,) * 5, methods=())
        with pytest.raises(ScenarioError):
            scenario((0.1,) * 5, methods=("bayes",))
        with pytest.raises(ScenarioError):
            scenario((0.1,) * 5, methods=("trend", "trend"))
        with pytest.raises(ScenarioError):
            scenario((0.1,) * 5, n_sims=0)

    def test_defaults(self):
        s = scenario((0.1,) * 5)
        assert s.methods == METHODS and s.alpha == 0.05


class TestTrials:
    def test_degenerate_rates(self):
        rng = run_rng(0, 0)
        assert simulate_trial(rng, scenario((0.0,) * 5)).x == (0,) * 5
        assert simulate_trial(rng, scenario((1.0,) * 5)).x == (30,) * 5

    def test_mean_rate(self):
        s = scenario((0.1,) * 5)
        x = np.array([simulate_trial(run_rng(3, i), s).x for i in range(10_000)])
        se = math.sqrt(0.1 * 0.9 / (x.size * 30))
        assert abs(x.mean() / 30 - 0.1) < 3 * se

    def test_streams_are_addressed_by_run(self):
        a = run_rng(5, 17).integers(0, 2**32, 4)
        b = run_rng(5, 17).integers(0, 2**32, 4)
        c = run_rng(5, 18).integers(0, 2**32, 4)
        assert np.array_equal(a, b) and not np.array_equal(a, c)


def test_chunks_cover_runs():
    for n, k in [(1, 4), (10, 3), (1000, 32)]:
        chunks = _chunks(n, k)
        assert chunks[0][0] == 0 and chunks[-1][1] == n
        assert all(a < b for a, b in chunks)
        assert all(b == c for (_, b), (c, _) in zip(chunks, chunks[1:]))


def test_worker_count_does_not_change_results():
    s = scenario((0.1, 0.12, 0.15, 0.2, 0.3), n_sims=120, seed=9)
    assert run_scenario(s, workers=1) == run_scenario(s, workers=3)


def test_single_run_reproducible():
    s = scenario((0.1, 0.12, 0.15, 0.2, 0.3), n_sims=1, seed=123)
    assert run_scenario(s) == run_scenario(s, workers=2)


def test_bookkeeping_invariants():
    s = scenario((0.02,) * 5, n_sims=400, seed=1, methods=("allocation", "trend", "exact_catt"))
    r = run_scenario(s)
    assert r.effective_runs + r.excluded_all_zero == r.n_sims
    for st in r.methods.values():
        assert st.runs == r.effective_runs
        assert 0 <= st.rate <= 1
        assert st.rejections + st.failures + st.degenerate <= st.runs
    assert r.zero_any_runs >= r.excluded_all_zero


def test_zero_frequency_matches_formula():
    true_p = (0.05, 0.08, 0.1, 0.15, 0.2)
    r = run_scenario(scenario(true_p, n_sims=4000, seed=2, methods=("trend",)))
    assert r.p_zero_analytic == any_arm_zero_probability(true_p, (30,) * 5)
    assert abs(r.p_zero_empirical - r.p_zero_analytic) < 3 * r.p_zero_se


def test_no_zero_null_controls_type_one_error():
    r = run_scenario(scenario((0.5,) * 5, n_sims=1500, seed=4,
                              methods=("observed", "candidate", "allocation", "trend")))
    for st in r.methods.values():
        assert st.rate <= 0.05 + 3 * math.sqrt(0.05 * 0.95 / st.runs)


def test_power_monotone_in_top_dose_effect():
    rates = []
    for top in (0.2, 0.3, 0.45):
        r = run_scenario(scenario((0.1, 0.1, 0.12, 0.15, top), n_sims=2000, seed=6,
                                  methods=("allocation",)))
        rates.append(r.rate("allocation"))
    assert rates[0] <= rates[1] <= rates[2]


def test_method_stats():
    st = MethodStats(rejections=5, runs=100)
    assert st.rate == 0.05 and st.mc_se == pytest.approx(math.sqrt(0.05 * 0.95 / 100))
    assert math.isnan(MethodStats(0, 0).rate)
