"""Trend and two-sample tests used as benchmarks for the contrast test.

Defaults follow the conventions that reproduce the published case-study
p-values: rank scores 1..k for both trend tests, a two-sided chi-square for
the asymptotic trend test and a one-sided (increasing) exact test.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from typing import Sequence

import numpy as np
from numpy.typing import NDArray
from scipy import stats
from scipy.special import gammaln

from binmcp.regression import BinomialCounts

SIDES = ("two-sided", "greater", "less")

# cells per DP row before falling back to the sparse exact-rational DP
_LATTICE_LIMIT = 2_000_000


class ComparatorError(ValueError):
    pass


class DegenerateTable(ComparatorError):
    """No responders at all, or all subjects responded."""


@dataclass(frozen=True)
class TrendScores:
    scores: tuple[float, ...]
    convention: str = "custom"

    def __post_init__(self) -> None:
        s = tuple(float(v) for v in self.scores)
        if len(s) < 2:
            raise ComparatorError("need at least two scores")
        if any(b <= a for a, b in zip(s, s[1:])):
            raise ComparatorError("scores must be strictly increasing")
        object.__setattr__(self, "scores", s)

    @classmethod
    def ranks(cls, k: int) -> "TrendScores":
        return cls(tuple(range(1, k + 1)), "ranks")

    @classmethod
    def dose_values(cls, doses: Sequence[float]) -> "TrendScores":
        return cls(tuple(doses), "doses")

    @classmethod
    def resolve(cls, scores: "TrendScores | str | Sequence[float] | None",
                data: BinomialCounts) -> "TrendScores":
        if scores is None or scores == "ranks":
            out = cls.ranks(data.design.k)
        elif scores == "doses":
            out = cls.dose_values(data.design.doses)
        elif isinstance(scores, TrendScores):
            out = scores
        else:
            out = cls(tuple(scores))
        if len(out.scores) != data.design.k:
            raise ComparatorError(f"{len(out.scores)} scores for {data.design.k} arms")
        return out


def _check_side(side: str) -> str:
    if side not in SIDES:
        raise ComparatorError(f"sidedness must be one of {SIDES}, got {side!r}")
    return side


def trend_statistic(data: BinomialCounts, scores: TrendScores | str | None = None) -> float:
    """Cochran-Armitage score statistic Z."""
    s = np.asarray(TrendScores.resolve(scores, data).scores)
    x, n = data.x_array, data.n_array
    N, T = n.sum(), x.sum()
    if T == 0 or T == N:
        raise DegenerateTable("trend test undefined with no responders or no non-responders")
    pbar = T / N
    num = np.sum(s * (x - n * pbar))
    den = math.sqrt(pbar * (1 - pbar) * (np.sum(n * s * s) - np.sum(n * s) ** 2 / N))
    return float(num / den)


def chisq_trend_test(data: BinomialCounts, scores: TrendScores | str | None = None,
                     sidedness: str = "two-sided") -> float:
    """Asymptotic chi-square test for trend in proportions."""
    z = trend_statistic(data, scores)
    side = _check_side(sidedness)
    if side == "two-sided":
        return float(stats.chi2.sf(z * z, 1))
    if side == "greater":
        return float(stats.norm.sf(z))
    return float(stats.norm.cdf(z))


# --- exact conditional Cochran-Armitage --------------------------------------


def _log_binom(n: int) -> NDArray:
    k = np.arange(n + 1)
    return gammaln(n + 1) - gammaln(k + 1) - gammaln(n - k + 1)


def _integer_lattice(scores: Sequence[float]) -> list[int] | None:
    """Map scores to the smallest integer lattice preserving the ordering of sums."""
    fr = [Fraction(v) for v in scores]
    lo = min(fr)
    shifted = [f - lo for f in fr]
    denom = reduce(math.lcm, (f.denominator for f in shifted), 1)
    ints = [int(f * denom) for f in shifted]
    g = reduce(math.gcd, ints, 0)
    if g == 0:
        return None
    ints = [v // g for v in ints]
    return ints


def _lattice_distribution(x_total: int, n: Sequence[int], ints: Sequence[int]) -> NDArray:
    """Log-weights of each achievable integer score sum given ``x_total`` responders."""
    T = x_total
    S = sum(si * min(ni, T) for si, ni in zip(ints, n))
    dp = np.full((T + 1, S + 1), -np.inf)
    dp[0, 0] = 0.0
    for ni, si in zip(n, ints):
        lc = _log_binom(ni)
        new = np.full_like(dp, -np.inf)
        for j in range(min(ni, T) + 1):
            shift = si * j
            src = dp[: T + 1 - j, : S + 1 - shift]
            dst = new[j:, shift:]
            np.logaddexp(dst, src + lc[j], out=dst)
        dp = new
    return dp[T]


def _sparse_distribution(x_total: int, n: Sequence[int], scores: Sequence[Fraction]) -> dict:
    states: dict[tuple[int, Fraction], float] = {(0, Fraction(0)): 0.0}
    for ni, si in zip(n, scores):
        lc = _log_binom(ni)
        nxt: dict[tuple[int, Fraction], float] = {}
        for (k, v), lw in states.items():
            for j in range(min(ni, x_total - k) + 1):
                key = (k + j, v + si * j)
                w = lw + lc[j]
                old = nxt.get(key)
                nxt[key] = w if old is None else float(np.logaddexp(old, w))
        states = nxt
    return {v: lw for (k, v), lw in states.items() if k == x_total}


def catt_null_distribution(data: BinomialCounts,
                           scores: TrendScores | str | None = None) -> tuple[list[Fraction], NDArray]:
    """Conditional null distribution of the score sum ``sum_i s_i X_i``.

    Returns the achievable values (as exact rationals in the original score
    units) and their probabilities.
    """
    sc = TrendScores.resolve(scores, data)
    T = int(sum(data.x))
    n = list(data.design.n)
    ints = _integer_lattice(sc.scores)
    fr = [Fraction(v) for v in sc.scores]
    if ints is not None and max(ints) * T <= _LATTICE_LIMIT:
        logw = _lattice_distribution(T, n, ints)
        unit = (fr[1] - fr[0]) / (ints[1] - ints[0])
        idx = np.flatnonzero(np.isfinite(logw))
        values = [fr[0] * T + unit * int(i) for i in idx]
        logw = logw[idx]
    else:
        dist = _sparse_distribution(T, n, fr)
        values = sorted(dist)
        logw = np.array([dist[v] for v in values])
    w = np.exp(logw - logw.max())
    total = math.fsum(w)
    return values, w / total


def exact_catt(data: BinomialCounts, scores: TrendScores | str | None = None,
               sidedness: str = "greater") -> float:
    """Exact conditional Cochran-Armitage test.

    Conditions on the total number of responders; allocations are weighted by
    ``prod_i C(n_i, x_i)`` and summed by dynamic programming over
    (responders used, score sum).
    """
    side = _check_side(sidedness)
    T = sum(data.x)
    if T == 0 or T == sum(data.design.n):
        raise DegenerateTable("exact trend test undefined with no responders or no non-responders")
    sc = TrendScores.resolve(scores, data)
    ints = _integer_lattice(sc.scores)
    if ints is not None and max(ints) * T <= _LATTICE_LIMIT:
        logw = _lattice_distribution(T, list(data.design.n), ints)
        w = np.exp(logw - logw.max())
        obs = sum(si * xi for si, xi in zip(ints, data.x))
        total = math.fsum(w)
        ge = math.fsum(w[obs:]) / total
        le = math.fsum(w[: obs + 1]) / total
    else:
        values, probs = catt_null_distribution(data, sc)
        observed = sum(Fraction(s) * xi for s, xi in zip(sc.scores, data.x))
        ge = math.fsum(p for v, p in zip(values, probs) if v >= observed)
        le = math.fsum(p for v, p in zip(values, probs) if v <= observed)
    if side == "greater":
        return min(1.0, ge)
    if side == "less":
        return min(1.0, le)
    return min(1.0, 2.0 * min(ge, le))


# --- Fisher exact -------------------------------------------------------------


def fisher_exact(x1: int, n1: int, x2: int, n2: int, sidedness: str = "greater") -> float:
    """Fisher's exact test for arm 2 (treatment) against arm 1 (control).

    ``greater`` is P(X2 >= x2) given the margins; ``two-sided`` sums every
    table no more likely than the observed one.
    """
    side = _check_side(sidedness)
    if not (0 <= x1 <= n1 and 0 <= x2 <= n2):
        raise ComparatorError("counts must lie within arm sizes")
    K = x1 + x2
    lo, hi = max(0, K - n1), min(K, n2)
    support = np.arange(lo, hi + 1)
    logp = (_log_binom(n2)[support] + _log_binom(n1)[K - support]
            - (gammaln(n1 + n2 + 1) - gammaln(K + 1) - gammaln(n1 + n2 - K + 1)))
    p = np.exp(logp)
    if side == "greater":
        return min(1.0, math.fsum(p[support >= x2]))
    if side == "less":
        return min(1.0, math.fsum(p[support <= x2]))
    p_obs = p[support == x2][0]
    return min(1.0, math.fsum(p[p <= p_obs * (1 + 1e-7)]))
