"""Per-arm logit estimation for the saturated one-way binomial model.

With dose entered as a categorical factor the model is saturated, so the
intercept-plus-treatment-effects parametrization is a linear reparametrization
of the per-arm logits. Both the likelihood and Firth's Jeffreys penalty
factorize over arms, which is why everything here works arm by arm.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np
from numpy.typing import ArrayLike, NDArray

from binmcp.design import DoseDesign, inv_logit, logit


class FitError(RuntimeError):
    pass


class NonConvergence(FitError):
    pass


class AllZero(FitError):
    """Every arm has zero responders; the analysis is undefined."""


class FitMethod(str, Enum):
    ORDINARY_ML = "ordinary_ml"
    FIRTH = "firth"


@dataclass(frozen=True)
class BinomialCounts:
    x: tuple[int, ...]
    design: DoseDesign

    def __post_init__(self) -> None:
        x = tuple(self.x)
        if len(x) != self.design.k:
            raise ValueError(f"got {len(x)} counts for {self.design.k} arms")
        for xi, ni in zip(x, self.design.n):
            if int(xi) != xi or not 0 <= xi <= ni:
                raise ValueError(f"count {xi} outside [0, {ni}]")
        object.__setattr__(self, "x", tuple(int(v) for v in x))

    @property
    def x_array(self) -> NDArray:
        return np.asarray(self.x, dtype=float)

    @property
    def n_array(self) -> NDArray:
        return self.design.n_array

    @property
    def boundary(self) -> NDArray:
        """True for arms with no responders or only responders."""
        x, n = self.x_array, self.n_array
        return (x == 0) | (x == n)


@dataclass(frozen=True)
class FitResult:
    eta: NDArray  # per-arm logit estimates
    var: NDArray  # per-arm variances (diagonal covariance)
    method: FitMethod
    separation: NDArray  # per-arm boundary flags
    converged: bool
    n_iter: int = 0

    @property
    def cov(self) -> NDArray:
        return np.diag(self.var)

    @property
    def se(self) -> NDArray:
        return np.sqrt(self.var)

    def treatment_effects(self) -> NDArray:
        """Intercept followed by log odds ratios versus placebo (the factor coding)."""
        return np.concatenate([[self.eta[0]], self.eta[1:] - self.eta[0]])


def fit_logistic(data: BinomialCounts) -> FitResult:
    """Ordinary maximum likelihood. Boundary arms get infinite estimates and variances."""
    x, n = data.x_array, data.n_array
    sep = data.boundary
    with np.errstate(divide="ignore"):
        eta = np.log(x) - np.log(n - x)
    p = x / n
    with np.errstate(divide="ignore"):
        var = 1.0 / (n * p * (1.0 - p))
    return FitResult(eta=eta, var=var, method=FitMethod.ORDINARY_ML, separation=sep,
                     converged=not bool(sep.any()), n_iter=0)


def _penalized_loglik(eta: NDArray, x: NDArray, n: NDArray) -> NDArray:
    # per-arm x*eta - n*log(1+e^eta) + 0.5*log(n p (1-p))
    log1pexp = np.logaddexp(0.0, eta)
    log_pq = -np.abs(eta) - 2.0 * np.log1p(np.exp(-np.abs(eta)))
    return x * eta - n * log1pexp + 0.5 * (np.log(n) + log_pq)


def firth_newton(x: ArrayLike, n: ArrayLike, *, tol: float = 1e-10,
                 max_iter: int = 100) -> tuple[NDArray, int]:
    """Maximize the Jeffreys-penalized binomial log-likelihood arm by arm.

    Damped Newton from eta = 0: the step is halved while the penalized
    log-likelihood fails to increase. Returns ``(eta, iterations)``.
    """
    x = np.asarray(x, dtype=float)
    n = np.asarray(n, dtype=float)
    eta = np.zeros_like(x)
    ll = _penalized_loglik(eta, x, n)
    for it in range(1, max_iter + 1):
        p = np.asarray(inv_logit(eta))
        score = x - n * p + 0.5 * (1.0 - 2.0 * p)
        if np.max(np.abs(score)) < tol:
            return eta, it - 1
        info = (n + 1.0) * p * (1.0 - p)
        step = score / info
        for _ in range(60):
            trial = eta + step
            ll_trial = _penalized_loglik(trial, x, n)
            # near the optimum the objective is flat to rounding; only a real decrease counts
            worse = ll_trial < ll - 1e-12 * (1.0 + np.abs(ll))
            if not worse.any():
                break
            step = np.where(worse, 0.5 * step, step)
        eta, ll = trial, ll_trial
    p = np.asarray(inv_logit(eta))
    score = x - n * p + 0.5 * (1.0 - 2.0 * p)
    if np.max(np.abs(score)) < tol:
        return eta, max_iter
    raise NonConvergence(f"Firth iteration did not converge in {max_iter} steps "
                         f"(max |score| = {np.max(np.abs(score)):.3g})")


def fit_firth(data: BinomialCounts, *, tol: float = 1e-10, max_iter: int = 100) -> FitResult:
    """Firth penalized fit; variances are the unpenalized Fisher information inverse."""
    x, n = data.x_array, data.n_array
    eta, n_iter = firth_newton(x, n, tol=tol, max_iter=max_iter)
    p = np.asarray(inv_logit(eta))
    var = 1.0 / (n * p * (1.0 - p))
    return FitResult(eta=eta, var=var, method=FitMethod.FIRTH, separation=data.boundary,
                     converged=True, n_iter=n_iter)


def firth_closed_form(x: ArrayLike, n: ArrayLike) -> NDArray:
    """Saturated-model Firth estimate: half a success and half a failure added per arm."""
    x = np.asarray(x, dtype=float)
    n = np.asarray(n, dtype=float)
    return np.asarray(logit((x + 0.5) / (n + 1.0)))


def choose_fit(data: BinomialCounts) -> FitResult:
    """Firth when any arm sits on the boundary, ordinary ML otherwise."""
    if not any(data.x):
        raise AllZero("no responders in any arm")
    if data.boundary.any():
        return fit_firth(data)
    return fit_logistic(data)
