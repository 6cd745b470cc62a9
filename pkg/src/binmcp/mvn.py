"""Tail probabilities of the maximum of a correlated standard normal vector.

``P(max_j Z_j >= t)`` for ``Z ~ N(0, R)`` is ``1 - P(Z <= t 1)``. The orthant
probability is computed with Genz's separation-of-variables transform over
independently scrambled Sobol' sequences (randomized quasi-Monte Carlo).
``R`` may be singular: contrasts that all sum to zero span at most k - 1 dimensions, so a set of k or more candidate
contrasts always has a rank-deficient correlation matrix. Rows beyond the
numerical rank are linear in the integration variables; together with the
last pivot row they cut an interval out of the final variable, which is
integrated exactly.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.optimize import brentq
from scipy.special import ndtr, ndtri
from scipy.stats import qmc

_TINY = 1e-300


class MvnError(ValueError):
    pass


@dataclass(frozen=True)
class MvnAccuracy:
    abs_tol: float = 1e-4
    seed: int = 0
    n_shifts: int = 12  # independent scrambles, for the error estimate
    min_points: int = 256  # per scramble; powers of two
    max_points: int = 1 << 16

    def __post_init__(self) -> None:
        if not self.abs_tol > 0:
            raise MvnError("abs_tol must be positive")
        if self.n_shifts < 2:
            raise MvnError("need at least 2 random shifts for an error estimate")


@dataclass(frozen=True)
class _Factor:
    L: NDArray  # permuted lower-triangular factor, shape (M, rank)
    rank: int


def _check_correlation(R: ArrayLike) -> NDArray:
    R = np.asarray(R, dtype=float)
    if R.ndim != 2 or R.shape[0] != R.shape[1]:
        raise MvnError("correlation matrix must be square")
    if not np.allclose(R, R.T, atol=1e-10):
        raise MvnError("correlation matrix must be symmetric")
    if not np.allclose(np.diag(R), 1.0, atol=1e-10):
        raise MvnError("correlation matrix must have unit diagonal")
    if np.linalg.eigvalsh(R).min() < -1e-8:
        raise MvnError("correlation matrix is not positive semidefinite")
    return R


def _factor(R: NDArray, t: float, rank_tol: float = 1e-10) -> _Factor:
    """Pivoted Cholesky factor with Genz-Bretz variable prioritization.

    At each step the remaining variable with the smallest conditional
    probability of staying below ``t`` is integrated next, with earlier
    variables fixed at their truncated-normal means. Variables whose
    conditional variance vanishes end the factorization and become rows
    past the rank.
    """
    m = R.shape[0]
    A = R.copy()
    L = np.zeros((m, m))
    y = np.zeros(m)
    rank = m
    for k in range(m):
        resid = np.diag(A)[k:] - np.sum(L[k:, :k] ** 2, axis=1)
        sd = np.sqrt(np.clip(resid, 0.0, None))
        live = resid > rank_tol
        if not live.any():
            rank = k
            break
        mean = L[k:, :k] @ y[:k]
        with np.errstate(divide="ignore", invalid="ignore"):
            prob = np.where(live, ndtr((t - mean) / np.where(live, sd, 1.0)), np.inf)
        j = k + int(np.argmin(prob))
        if j != k:
            A[[k, j]] = A[[j, k]]
            A[:, [k, j]] = A[:, [j, k]]
            L[[k, j], :k] = L[[j, k], :k]
        L[k, k] = np.sqrt(A[k, k] - L[k, :k] @ L[k, :k])
        L[k + 1:, k] = (A[k + 1:, k] - L[k + 1:, :k] @ L[k, :k]) / L[k, k]
        b = (t - L[k, :k] @ y[:k]) / L[k, k]
        y[k] = -np.exp(-0.5 * b * b) / np.sqrt(2 * np.pi) / max(ndtr(b), 1e-300)
    # all limits are equal, so the row permutation itself is not needed
    return _Factor(L=L[:, :rank], rank=rank)


def _bound(t: float, row: NDArray, ys: list[NDArray], n_pts: int) -> NDArray:
    """``t - row . y`` for the sampled ``y`` columns."""
    out = np.full(n_pts, t)
    for c, y in zip(row, ys):
        out -= c * y
    return out


def _orthant_samples(t: float, fac: _Factor, w: NDArray) -> NDArray:
    """Integrand of P(Z <= t) at transformed lattice points ``w`` (n, rank - 1)."""
    L, r = fac.L, fac.rank
    n_pts = w.shape[0]
    ys: list[NDArray] = []
    f = np.ones(n_pts)
    for i in range(r - 1):
        if i:
            z = _bound(t, L[i, :i], ys, n_pts)
            z /= L[i, i]
            e = ndtr(z)
        else:
            # the first bound does not depend on the point
            e = ndtr(t / L[0, 0])
        f *= e
        u = w[:, i] * e
        ys.append(ndtri(np.clip(u, _TINY, 1.0, out=u)))
    # The last variable is bounded by its own row and by every row past the
    # rank; those bounds form an interval that is integrated in closed form.
    lo = np.full(n_pts, -np.inf)
    hi = np.full(n_pts, np.inf)
    for row in L[r - 1:]:
        rhs = _bound(t, row[:r - 1], ys, n_pts)
        c = row[r - 1]
        if c > 1e-12:
            np.minimum(hi, rhs / c, out=hi)
        elif c < -1e-12:
            np.maximum(lo, rhs / c, out=lo)
        else:
            f *= rhs >= -1e-12
    # intervals above zero are measured from the upper tail, which keeps
    # their mass accurate
    upper_side = lo > 0
    a = np.where(upper_side, -hi, lo)
    b = np.where(upper_side, -lo, hi)
    mass = ndtr(b)
    mass -= ndtr(a)
    np.maximum(mass, 0.0, out=mass)
    return f * mass


# A scrambled point set is a pure function of (dim, seed, n_shifts, size).
# Sets are memoized as read-only arrays, each built from fresh engines, so
# sharing them across threads cannot change any result.
_POINT_CACHE: dict[tuple[int, int, int], NDArray] = {}
_POINT_LOCK = threading.Lock()


def _point_set(dim: int, seed: int, n_shifts: int, log2_n: int) -> NDArray:
    seeds = np.random.SeedSequence(seed).spawn(n_shifts)
    pts = np.stack([qmc.Sobol(dim, scramble=True, seed=np.random.default_rng(sq)).random_base2(log2_n)
                    for sq in seeds])
    pts.setflags(write=False)
    return pts


def _points_prefix(dim: int, acc: MvnAccuracy, n: int) -> NDArray:
    key = (dim, acc.seed, acc.n_shifts)
    with _POINT_LOCK:
        pts = _POINT_CACHE.get(key)
    if pts is None or pts.shape[1] < n:
        pts = _point_set(dim, acc.seed, acc.n_shifts, max(0, (n - 1).bit_length()))
        with _POINT_LOCK:
            if key not in _POINT_CACHE or _POINT_CACHE[key].shape[1] < pts.shape[1]:
                _POINT_CACHE[key] = pts
    return pts[:, :n]


class _Replicates:
    """Independently scrambled Sobol' sequences, consumed in order."""

    def __init__(self, dim: int, acc: MvnAccuracy) -> None:
        self.dim = dim
        self.acc = acc
        self.n_shifts = acc.n_shifts
        self.n_points = 0

    def take(self, n: int) -> NDArray:
        """The next `n` points of every replicate, shape (n_shifts, n, dim)."""
        start = self.n_points
        self.n_points += n
        if self.dim == 0:
            return np.empty((self.n_shifts, n, 0))
        return _points_prefix(self.dim, self.acc, self.n_points)[:, start:]


def _orthant_estimate(t: float, fac: _Factor, points: NDArray) -> NDArray:
    """Per-replicate sums of the integrand over `points` (n_shifts, n, dim)."""
    n_shifts, n, dim = points.shape
    vals = _orthant_samples(t, fac, points.reshape(n_shifts * n, dim))
    return vals.reshape(n_shifts, n).sum(axis=1)


def _summary(sums: NDArray, n_points: int) -> tuple[float, float]:
    means = sums / n_points
    est = float(means.mean())
    err = float(3.0 * means.std(ddof=1) / np.sqrt(means.size))
    return est, err


def _tail_with_error(t: float, R: NDArray, acc: MvnAccuracy,
                     stop_if_clear_of: float | None = None) -> tuple[float, float]:
    if not np.isfinite(t):
        raise MvnError("t must be finite")
    if R.shape[0] == 1:
        return float(ndtr(-t)), 0.0
    fac = _factor(R, t)
    reps = _Replicates(fac.rank - 1, acc)
    sums = _orthant_estimate(t, fac, reps.take(acc.min_points))
    while True:
        est, err = _summary(sums, reps.n_points)
        tail = 1.0 - est
        if err <= acc.abs_tol or reps.n_points >= acc.max_points:
            break
        if stop_if_clear_of is not None and abs(tail - stop_if_clear_of) > err:
            break
        # doubling keeps each replicate a balanced Sobol' prefix
        sums = sums + _orthant_estimate(t, fac, reps.take(reps.n_points))
    return float(min(1.0, max(0.0, tail))), err


def mvn_max_tail(t: float, R: ArrayLike, acc: MvnAccuracy | None = None) -> float:
    """P(max_j Z_j >= t) for Z ~ N(0, R)."""
    acc = acc or MvnAccuracy()
    return _tail_with_error(float(t), _check_correlation(R), acc)[0]


def max_tail_many(t: ArrayLike, R: ArrayLike, acc: MvnAccuracy | None = None) -> NDArray:
    """Vector version of :func:`mvn_max_tail`."""
    acc = acc or MvnAccuracy()
    R = _check_correlation(R)
    return np.array([_tail_with_error(float(ti), R, acc)[0] for ti in np.atleast_1d(t)])


def max_tail_at_most(t: float, R: ArrayLike, level: float, acc: MvnAccuracy | None = None) -> bool:
    """Whether ``P(max_j Z_j >= t) <= level``.

    Refines the integration only while the error band straddles `level`, so
    the decision matches the one from a full-accuracy evaluation.
    """
    acc = acc or MvnAccuracy()
    tail, _ = _tail_with_error(float(t), _check_correlation(R), acc, stop_if_clear_of=level)
    return tail <= level


def max_quantile(R: ArrayLike, alpha: float, acc: MvnAccuracy | None = None,
                 xtol: float = 1e-7) -> float:
    """The level ``q`` with ``P(max_j Z_j >= q) = alpha``."""
    if not 0 < alpha < 1:
        raise MvnError("alpha must lie in (0, 1)")
    acc = acc or MvnAccuracy()
    R = _check_correlation(R)
    m = R.shape[0]
    lo = float(ndtri(1.0 - alpha))
    hi = float(ndtri(1.0 - alpha / m))
    if m == 1 or hi - lo < 1e-12:
        return lo
    # one ordering and one point set for the whole search keeps the
    # objective smooth in q
    mid = 0.5 * (lo + hi)
    fac = _factor(R, mid)
    reps = _Replicates(fac.rank - 1, acc)
    points = reps.take(acc.min_points)
    while points.shape[1] < acc.max_points:
        _, err = _summary(_orthant_estimate(mid, fac, points), points.shape[1])
        if err <= acc.abs_tol / 10:
            break
        points = np.concatenate([points, reps.take(points.shape[1])], axis=1)

    def g(q: float) -> float:
        est = _orthant_estimate(q, fac, points).mean() / points.shape[1]
        return 1.0 - est - alpha

    return float(brentq(g, lo - 0.05, hi + 0.05, xtol=xtol))
