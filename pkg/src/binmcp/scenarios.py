"""The operating-characteristics study grid: null rows and three power families.

Each power family fixes the placebo rate the candidates are anchored at
(``pmax = p0 + 0.4``). Rows 1-5 are the candidate curves themselves, 6-8
are moderate or plateau effects, 9-13 shift the true curves away from the
anchored placebo rate, and 14-19 come from shapes outside the candidate set.
Rates are given to the printed two or three decimals.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from binmcp.design import CandidateSet, DoseDesign, case_study_design, default_candidates
from binmcp.simulation import METHODS, Scenario


@dataclass(frozen=True)
class StudyRow:
    family: str
    number: int
    true_p: tuple[float, ...]

    @property
    def label(self) -> str:
        return f"{self.family} #{self.number}" if self.number else self.family


NULL_RATES = (0.01, 0.1, 0.3, 0.5, 0.7)

# candidates for the null rows; the observed and allocation schemes do not
# depend on the anchoring at all
NULL_ANCHOR = 0.3

_FAMILIES = ("correct", "correct", "correct", "correct", "correct",
             "moderate linear", "moderate plateau", "strong plateau",
             "shifted", "shifted", "shifted", "shifted", "shifted",
             "misspecified", "misspecified", "misspecified",
             "misspecified shifted", "misspecified shifted", "misspecified shifted")

_POWER_ROWS: dict[float, tuple[tuple[float, ...], ...]] = {
    0.1: (
        (0.1, 0.13, 0.16, 0.25, 0.5),
        (0.1, 0.17, 0.24, 0.36, 0.5),
        (0.1, 0.31, 0.4, 0.47, 0.5),
        (0.1, 0.1, 0.11, 0.14, 0.5),
        (0.1, 0.11, 0.16, 0.39, 0.5),
        (0.1, 0.1, 0.15, 0.2, 0.25),
        (0.1, 0.3, 0.3, 0.3, 0.3),
        (0.1, 0.5, 0.5, 0.5, 0.5),
        (0.35, 0.38, 0.41, 0.5, 0.75),
        (0.35, 0.42, 0.49, 0.61, 0.75),
        (0.35, 0.56, 0.65, 0.72, 0.75),
        (0.35, 0.35, 0.36, 0.39, 0.75),
        (0.35, 0.36, 0.41, 0.64, 0.75),
        (0.1, 0.25, 0.37, 0.5, 0.26),
        (0.1, 0.45, 0.48, 0.49, 0.5),
        (0.1, 0.11, 0.14, 0.42, 0.5),
        (0.35, 0.5, 0.62, 0.75, 0.51),
        (0.35, 0.7, 0.73, 0.74, 0.75),
        (0.35, 0.36, 0.39, 0.67, 0.75),
    ),
    0.3: (
        (0.3, 0.35, 0.4, 0.5, 0.7),
        (0.3, 0.41, 0.49, 0.6, 0.7),
        (0.3, 0.56, 0.63, 0.68, 0.7),
        (0.3, 0.31, 0.32, 0.36, 0.7),
        (0.3, 0.33, 0.39, 0.62, 0.7),
        (0.3, 0.3, 0.35, 0.4, 0.45),
        (0.3, 0.5, 0.5, 0.5, 0.5),
        (0.3, 0.7, 0.7, 0.7, 0.7),
        (0.1, 0.15, 0.2, 0.3, 0.5),
        (0.1, 0.21, 0.29, 0.4, 0.5),
        (0.1, 0.36, 0.43, 0.48, 0.5),
        (0.1, 0.11, 0.12, 0.16, 0.5),
        (0.1, 0.13, 0.19, 0.42, 0.5),
        (0.3, 0.5, 0.61, 0.7, 0.51),
        (0.3, 0.67, 0.68, 0.69, 0.7),
        (0.3, 0.31, 0.37, 0.64, 0.7),
        (0.1, 0.3, 0.41, 0.5, 0.31),
        (0.1, 0.47, 0.48, 0.49, 0.5),
        (0.1, 0.11, 0.17, 0.44, 0.5),
    ),
    0.01: (
        (0.01, 0.017, 0.028, 0.077, 0.41),
        (0.01, 0.032, 0.07, 0.18, 0.41),
        (0.01, 0.13, 0.24, 0.35, 0.41),
        (0.01, 0.011, 0.012, 0.02, 0.41),
        (0.01, 0.013, 0.028, 0.23, 0.41),
        (0.01, 0.01, 0.06, 0.11, 0.16),
        (0.01, 0.21, 0.21, 0.21, 0.21),
        (0.01, 0.41, 0.41, 0.41, 0.41),
        (0.26, 0.27, 0.28, 0.33, 0.66),
        (0.26, 0.28, 0.32, 0.43, 0.66),
        (0.26, 0.38, 0.49, 0.6, 0.66),
        (0.26, 0.26, 0.26, 0.27, 0.66),
        (0.26, 0.26, 0.28, 0.48, 0.66),
        (0.01, 0.075, 0.2, 0.4, 0.082),
        (0.01, 0.32, 0.37, 0.39, 0.41),
        (0.01, 0.012, 0.022, 0.27, 0.41),
        (0.26, 0.32, 0.45, 0.65, 0.33),
        (0.26, 0.57, 0.62, 0.64, 0.66),
        (0.26, 0.26, 0.27, 0.52, 0.66),
    ),
}

PLACEBO_RATES = tuple(_POWER_ROWS)


def null_rows() -> list[StudyRow]:
    return [StudyRow(f"flat {p:g}", 0, (p,) * 5) for p in NULL_RATES]


def power_rows(placebo: float) -> list[StudyRow]:
    try:
        rows = _POWER_ROWS[placebo]
    except KeyError:
        raise KeyError(f"no power family for placebo rate {placebo}; "
                       f"choose from {PLACEBO_RATES}") from None
    return [StudyRow(f, i, p) for i, (f, p) in enumerate(zip(_FAMILIES, rows), start=1)]


def study_candidates(placebo: float) -> CandidateSet:
    return default_candidates(placebo)


def build_scenarios(rows: Sequence[StudyRow], candidates: CandidateSet,
                    design: DoseDesign | None = None, methods: Sequence[str] = METHODS,
                    n_sims: int = 10_000, seed: int = 0) -> list[Scenario]:
    design = design or case_study_design()
    return [Scenario(label=r.label, true_p=r.true_p, design=design, candidates=candidates,
                     methods=tuple(methods), n_sims=n_sims, seed=seed) for r in rows]
