"""The multiple contrast test: statistics, adjusted p-values and the full analysis."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray

from binmcp.contrasts import (ContrastMatrix, WeightingScheme, contrast_correlation,
                              contrast_set)
from binmcp.design import CandidateSet
from binmcp.mvn import MvnAccuracy, max_quantile, max_tail_at_most, max_tail_many
from binmcp.regression import BinomialCounts, FitResult, choose_fit


class MCPError(ValueError):
    pass


@dataclass(frozen=True)
class MCPResult:
    labels: tuple[str, ...]
    t: NDArray
    p_adj: NDArray
    min_p: float
    reject: bool
    alpha: float
    contrasts: ContrastMatrix
    correlation: NDArray
    fit: FitResult
    scheme: WeightingScheme
    accuracy: MvnAccuracy

    def ranked(self) -> list[tuple[str, float, float]]:
        """``(label, t, p_adj)`` rows ordered by decreasing t."""
        order = np.argsort(-self.t, kind="stable")
        return [(self.labels[i], float(self.t[i]), float(self.p_adj[i])) for i in order]


def t_statistics(fit: FitResult, contrasts: ContrastMatrix | NDArray) -> NDArray:
    """Standardized contrast statistics ``c'eta / sqrt(c' V c)``."""
    if not fit.converged:
        raise MCPError("cannot form contrast statistics from a non-converged fit")
    C = contrasts.vectors if isinstance(contrasts, ContrastMatrix) else np.atleast_2d(contrasts)
    if C.shape[1] != fit.eta.size:
        raise MCPError(f"contrasts have {C.shape[1]} arms but the fit has {fit.eta.size}")
    se = np.sqrt((C**2) @ fit.var)
    if np.any(se <= 0):
        raise MCPError("zero standard error for a contrast")
    return (C @ fit.eta) / se


def adjusted_pvalues(t: ArrayLike, R: ArrayLike, acc: MvnAccuracy | None = None) -> NDArray:
    """One-sided p-values adjusted for the maximum over all contrasts."""
    return max_tail_many(t, R, acc)


def critical_value(R: ArrayLike, alpha: float = 0.05, acc: MvnAccuracy | None = None) -> float:
    return max_quantile(R, alpha, acc)


def mcp_analyze(data: BinomialCounts, candidates: CandidateSet,
                scheme: WeightingScheme | str = WeightingScheme.ALLOCATION,
                alpha: float = 0.05, acc: MvnAccuracy | None = None,
                fit: FitResult | None = None) -> MCPResult:
    """Fit, build contrasts for `scheme`, and run the one-sided max-contrast test.

    The fitted covariance always supplies the statistic's denominator and the
    correlation of the reference distribution; the scheme only decides the
    contrast weights.
    """
    if not 0 < alpha < 1:
        raise MCPError("alpha must lie in (0, 1)")
    scheme = WeightingScheme.parse(scheme)
    acc = acc or MvnAccuracy()
    fit = fit if fit is not None else choose_fit(data)
    observed = fit.var if scheme is WeightingScheme.OBSERVED else None
    contrasts = contrast_set(candidates, data.design, scheme, observed)
    t = t_statistics(fit, contrasts)
    R = contrast_correlation(contrasts, fit.var)
    p_adj = adjusted_pvalues(t, R, acc)
    min_p = float(p_adj.min())
    return MCPResult(labels=contrasts.labels, t=t, p_adj=p_adj, min_p=min_p,
                     reject=min_p <= alpha, alpha=alpha, contrasts=contrasts,
                     correlation=R, fit=fit, scheme=scheme, accuracy=acc)


def mcp_reject(fit: FitResult, contrasts: ContrastMatrix, alpha: float,
               acc: MvnAccuracy | None = None) -> bool:
    """Whether the smallest adjusted p-value is at most `alpha`.

    Only the largest statistic matters for the decision, and the integration
    stops as soon as its error band clears `alpha`.
    """
    t = t_statistics(fit, contrasts)
    R = contrast_correlation(contrasts, fit.var)
    return max_tail_at_most(float(t.max()), R, alpha, acc)
