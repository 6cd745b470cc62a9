"""Recover candidate shape parameters from a reported contrast vector.

Given a target contrast for one candidate, search the shape's parameters so
the optimal contrast under the chosen weighting scheme matches it in least
squares. Parameters are searched on the log scale, which keeps them positive.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from numpy.typing import ArrayLike
from scipy.optimize import least_squares

from binmcp.contrasts import WeightingScheme, optimal_contrast, scheme_weights
from binmcp.design import (CandidateModel, CandidateShape, DesignError, DoseDesign,
                           candidate_means, make_shape)

# starting points for each family, in the shape's own parameter order
_STARTS: dict[str, dict[str, float]] = {
    "emax": {"ed50": 0.25},
    "sigemax": {"ed50": 0.25, "h": 2.0},
    "exponential": {"delta": 0.5},
    "logistic": {"ed50": 0.3, "delta": 0.1},
    "betamod": {"delta1": 1.0, "delta2": 1.0, "scal": 1.2},
}


@dataclass(frozen=True)
class ShapeFit:
    shape: CandidateShape
    contrast: np.ndarray
    max_abs_error: float


def _contrast_for(shape: CandidateShape, design: DoseDesign, p0: float, pmax: float,
                  scale: str, scheme: WeightingScheme) -> np.ndarray:
    model = CandidateModel(shape, p0, pmax, scale)
    p, mu0 = candidate_means(model, design)
    return optimal_contrast(mu0, scheme_weights(scheme, p, design, None))


def fit_shape(name: str, target: ArrayLike, design: DoseDesign, *, p0: float = 0.05,
              pmax: float = 0.45, scale: str = "logit",
              scheme: WeightingScheme | str = WeightingScheme.ALLOCATION,
              start: dict[str, float] | None = None) -> ShapeFit:
    """Least-squares shape parameters whose contrast best matches `target`."""
    scheme = WeightingScheme.parse(scheme)
    if scheme is WeightingScheme.OBSERVED:
        raise DesignError("calibration needs a design-stage scheme (candidate or allocation)")
    name = name.lower()
    if name not in _STARTS:
        raise DesignError(f"no free parameters to calibrate for shape {name!r}")
    target = np.asarray(target, dtype=float)
    if target.shape != (design.k,):
        raise DesignError(f"target has {target.size} entries for {design.k} arms")
    init = dict(_STARTS[name], **(start or {}))
    keys = list(init)

    def build(theta: Sequence[float]) -> CandidateShape:
        return make_shape(name, **{k: float(v) for k, v in zip(keys, np.exp(theta))})

    def resid(theta: np.ndarray) -> np.ndarray:
        try:
            return _contrast_for(build(theta), design, p0, pmax, scale, scheme) - target
        except DesignError:
            return np.full(design.k, 10.0)

    sol = least_squares(resid, np.log([init[k] for k in keys]), xtol=1e-12, ftol=1e-12)
    shape = build(sol.x)
    c = _contrast_for(shape, design, p0, pmax, scale, scheme)
    return ShapeFit(shape=shape, contrast=c, max_abs_error=float(np.max(np.abs(c - target))))
