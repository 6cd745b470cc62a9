"""Optimal contrasts under the three covariance weighting schemes."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np
from numpy.typing import ArrayLike, NDArray

from binmcp.design import CandidateSet, DegenerateCandidate, DoseDesign, candidate_means


class ContrastError(ValueError):
    pass


class WeightingScheme(str, Enum):
    """How the per-arm weights (diagonal of the inverse covariance) are chosen.

    OBSERVED uses the fitted covariance of the data, CANDIDATE uses the
    binomial variance implied by each candidate model (method A), and
    ALLOCATION uses the arm sizes alone (method B).
    """

    OBSERVED = "observed"
    CANDIDATE = "candidate"
    ALLOCATION = "allocation"

    @classmethod
    def parse(cls, value: "str | WeightingScheme") -> "WeightingScheme":
        if isinstance(value, cls):
            return value
        aliases = {"orig": "observed", "a": "candidate", "b": "allocation"}
        key = str(value).strip().lower()
        try:
            return cls(aliases.get(key, key))
        except ValueError:
            raise ContrastError(f"unknown weighting scheme {value!r}") from None


@dataclass(frozen=True)
class ContrastMatrix:
    labels: tuple[str, ...]
    vectors: NDArray  # shape (n_models, n_arms)

    def __post_init__(self) -> None:
        vectors = np.atleast_2d(np.asarray(self.vectors, dtype=float))
        if vectors.shape[0] != len(self.labels):
            raise ContrastError("one contrast vector per label required")
        if np.any(np.abs(vectors.sum(axis=1)) > 1e-10):
            raise ContrastError("contrast vectors must sum to zero")
        if np.any(np.abs(np.linalg.norm(vectors, axis=1) - 1.0) > 1e-10):
            raise ContrastError("contrast vectors must have unit norm")
        vectors.setflags(write=False)
        object.__setattr__(self, "labels", tuple(self.labels))
        object.__setattr__(self, "vectors", vectors)

    def __getitem__(self, label: str) -> NDArray:
        return self.vectors[self.labels.index(label)]


def optimal_contrast(mu0: ArrayLike, weights: ArrayLike) -> NDArray:
    """Unit-norm optimal contrast for candidate logits `mu0`.

    ``weights`` is the diagonal of the inverse covariance. The contrast is
    ``W (mu0 - weighted_mean(mu0))`` scaled to unit length, with the sign
    chosen so that it correlates positively with ``mu0``.
    """
    mu = np.asarray(mu0, dtype=float)
    w = np.asarray(weights, dtype=float)
    if mu.ndim != 1 or mu.size < 2:
        raise ContrastError("mu0 must be a vector with at least 2 entries")
    if w.shape != mu.shape:
        raise ContrastError(f"weights shape {w.shape} does not match mu0 shape {mu.shape}")
    if np.any(~np.isfinite(w)) or np.any(w <= 0):
        raise ContrastError("weights must be strictly positive and finite")
    if np.ptp(mu - mu.mean()) < 1e-12:
        raise DegenerateCandidate("constant candidate mean; contrast direction undefined")
    c = w * (mu - (mu @ w) / w.sum())
    # exact zero-sum before normalizing; removes rounding drift
    c = c - c.mean()
    c /= np.linalg.norm(c)
    if c @ mu < 0:
        c = -c
    return c


def scheme_weights(scheme: WeightingScheme, p: NDArray, design: DoseDesign,
                   observed_var: NDArray | None) -> NDArray:
    if scheme is WeightingScheme.OBSERVED:
        return 1.0 / observed_var
    if scheme is WeightingScheme.CANDIDATE:
        return design.n_array * p * (1.0 - p)
    return design.n_array.copy()


def contrast_set(candidates: CandidateSet, design: DoseDesign,
                 scheme: WeightingScheme | str,
                 observed_cov: ArrayLike | None = None) -> ContrastMatrix:
    """Contrast matrix for every candidate under `scheme`.

    ``observed_cov`` is the diagonal of the fitted covariance (a vector, or a
    diagonal matrix) and must be given exactly when the scheme is OBSERVED.
    """
    scheme = WeightingScheme.parse(scheme)
    var = None
    if scheme is WeightingScheme.OBSERVED:
        if observed_cov is None:
            raise ContrastError("the observed scheme needs the fitted covariance")
        var = _as_diagonal(observed_cov, design.k)
    elif observed_cov is not None:
        raise ContrastError(f"observed_cov must not be given for scheme {scheme.value!r}")

    rows = []
    for _, model in candidates:
        p, mu0 = candidate_means(model, design)
        rows.append(optimal_contrast(mu0, scheme_weights(scheme, p, design, var)))
    return ContrastMatrix(tuple(candidates.labels), np.vstack(rows))


def _as_diagonal(cov: ArrayLike, k: int) -> NDArray:
    arr = np.asarray(cov, dtype=float)
    if arr.ndim == 2:
        if arr.shape != (k, k):
            raise ContrastError(f"covariance must be {k}x{k}, got {arr.shape}")
        if np.any(arr - np.diag(np.diag(arr))):
            raise ContrastError("only diagonal covariances are supported")
        arr = np.diag(arr)
    if arr.shape != (k,):
        raise ContrastError(f"covariance diagonal must have {k} entries, got {arr.shape}")
    if np.any(~np.isfinite(arr)) or np.any(arr <= 0):
        raise ContrastError("covariance diagonal must be strictly positive and finite")
    return arr


def contrast_correlation(contrasts: ContrastMatrix | NDArray, cov: ArrayLike) -> NDArray:
    """Correlation of the contrast statistics under diagonal covariance `cov`."""
    C = contrasts.vectors if isinstance(contrasts, ContrastMatrix) else np.atleast_2d(contrasts)
    var = _as_diagonal(cov, C.shape[1])
    G = (C * var) @ C.T
    sd = np.sqrt(np.diag(G))
    R = G / np.outer(sd, sd)
    R = 0.5 * (R + R.T)
    np.fill_diagonal(R, 1.0)
    return np.clip(R, -1.0, 1.0)
