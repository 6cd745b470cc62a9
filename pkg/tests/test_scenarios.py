from __future__ import annotations

import numpy as np
import pytest

from binmcp.design import candidate_means, case_study_design
from binmcp.scenarios import (NULL_RATES, PLACEBO_RATES, build_scenarios, null_rows, power_rows,
                              study_candidates)


@pytest.mark.parametrize("placebo", PLACEBO_RATES)
def test_correct_rows_are_the_candidate_curves(placebo):
    # the first five power rows are the anchored candidate curves, printed to
    # two or three decimals; matching them pins down the candidate shapes
    design = case_study_design()
    rows = power_rows(placebo)[:5]
    for row, (_, model) in zip(rows, study_candidates(placebo)):
        p, _ = candidate_means(model, design)
        np.testing.assert_allclose(p, row.true_p, atol=0.006)


def test_family_layout():
    for placebo in PLACEBO_RATES:
        rows = power_rows(placebo)
        assert len(rows) == 19 and [r.number for r in rows] == list(range(1, 20))
        assert all(len(r.true_p) == 5 for r in rows)
    assert [r.true_p[0] for r in null_rows()] == list(NULL_RATES)
    with pytest.raises(KeyError):
        power_rows(0.2)


def test_build_scenarios():
    scen = build_scenarios(power_rows(0.1)[:2], study_candidates(0.1), n_sims=5, seed=3)
    assert [s.label for s in scen] == ["correct #1", "correct #2"]
    assert all(s.n_sims == 5 and s.seed == 3 for s in scen)
