"""Trial layouts, candidate dose-response shapes and zero-count planning helpers."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np
from numpy.typing import ArrayLike, NDArray


class DesignError(ValueError):
    """Invalid design, shape parameter or candidate model."""


class DegenerateCandidate(DesignError):
    """A candidate mean vector is flat, so no contrast direction exists."""


def logit(p: ArrayLike) -> NDArray | float:
    p_arr = np.asarray(p, dtype=float)
    if np.any((p_arr <= 0) | (p_arr >= 1)) or np.any(np.isnan(p_arr)):
        raise DesignError("logit is only defined on the open interval (0, 1)")
    out = np.log(p_arr) - np.log1p(-p_arr)
    return float(out) if out.ndim == 0 else out


def inv_logit(x: ArrayLike) -> NDArray | float:
    x_arr = np.asarray(x, dtype=float)
    # numerically stable on both tails
    out = np.where(x_arr >= 0, 1.0 / (1.0 + np.exp(-np.abs(x_arr))),
                   np.exp(-np.abs(x_arr)) / (1.0 + np.exp(-np.abs(x_arr))))
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class DoseDesign:
    """Dose levels (placebo first) and per-arm sample sizes."""

    doses: tuple[float, ...]
    n: tuple[int, ...]

    def __post_init__(self) -> None:
        doses = tuple(float(d) for d in self.doses)
        n = tuple(self.n)
        if len(doses) < 2:
            raise DesignError("a design needs at least 2 arms")
        if len(n) != len(doses):
            raise DesignError(f"n has {len(n)} entries but there are {len(doses)} doses")
        if doses[0] != 0.0:
            raise DesignError("doses[0] must be 0 (placebo)")
        if any(b <= a for a, b in zip(doses, doses[1:])):
            raise DesignError("doses must be strictly increasing")
        if any(int(k) != k or k < 1 for k in n):
            raise DesignError("every arm size must be a positive integer")
        object.__setattr__(self, "doses", doses)
        object.__setattr__(self, "n", tuple(int(k) for k in n))

    @classmethod
    def balanced(cls, doses: Sequence[float], n_per_arm: int) -> "DoseDesign":
        return cls(tuple(doses), tuple([n_per_arm] * len(doses)))

    @property
    def k(self) -> int:
        return len(self.doses)

    @property
    def dmax(self) -> float:
        return self.doses[-1]

    @property
    def dose_array(self) -> NDArray:
        return np.asarray(self.doses, dtype=float)

    @property
    def n_array(self) -> NDArray:
        return np.asarray(self.n, dtype=float)


# --- candidate shapes -------------------------------------------------------
#
# Each shape is a standardized curve f0(d); the candidate model rescales it
# affinely so that the placebo and max-dose responses hit p0 and pmax.


def _require_positive(**params: float) -> None:
    for name, value in params.items():
        if not (value > 0 and math.isfinite(value)):
            raise DesignError(f"{name} must be a positive finite number, got {value!r}")


@dataclass(frozen=True)
class Linear:
    name = "linear"

    def __call__(self, d: NDArray) -> NDArray:
        return np.asarray(d, dtype=float)

    def params(self) -> dict[str, float]:
        return {}


@dataclass(frozen=True)
class Emax:
    ed50: float
    name = "emax"

    def __post_init__(self) -> None:
        _require_positive(ed50=self.ed50)

    def __call__(self, d: NDArray) -> NDArray:
        d = np.asarray(d, dtype=float)
        return d / (self.ed50 + d)

    def params(self) -> dict[str, float]:
        return {"ed50": self.ed50}


@dataclass(frozen=True)
class SigEmax:
    ed50: float
    h: float
    name = "sigemax"

    def __post_init__(self) -> None:
        _require_positive(ed50=self.ed50, h=self.h)

    def __call__(self, d: NDArray) -> NDArray:
        d = np.asarray(d, dtype=float)
        # d^h / (ed50^h + d^h) written as 1/(1 + (ed50/d)^h) to avoid overflow
        with np.errstate(divide="ignore"):
            ratio = np.where(d > 0, (self.ed50 / np.where(d > 0, d, 1.0)) ** self.h, np.inf)
        return np.where(d > 0, 1.0 / (1.0 + ratio), 0.0)

    def params(self) -> dict[str, float]:
        return {"ed50": self.ed50, "h": self.h}


@dataclass(frozen=True)
class Exponential:
    delta: float
    name = "exponential"

    def __post_init__(self) -> None:
        _require_positive(delta=self.delta)

    def __call__(self, d: NDArray) -> NDArray:
        return np.expm1(np.asarray(d, dtype=float) / self.delta)

    def params(self) -> dict[str, float]:
        return {"delta": self.delta}


@dataclass(frozen=True)
class Logistic:
    ed50: float
    delta: float
    name = "logistic"

    def __post_init__(self) -> None:
        _require_positive(ed50=self.ed50, delta=self.delta)

    def __call__(self, d: NDArray) -> NDArray:
        d = np.asarray(d, dtype=float)
        return np.asarray(inv_logit((d - self.ed50) / self.delta), dtype=float)

    def params(self) -> dict[str, float]:
        return {"ed50": self.ed50, "delta": self.delta}


@dataclass(frozen=True)
class BetaMod:
    delta1: float
    delta2: float
    scal: float
    name = "betamod"

    def __post_init__(self) -> None:
        _require_positive(delta1=self.delta1, delta2=self.delta2, scal=self.scal)

    def __call__(self, d: NDArray) -> NDArray:
        d = np.asarray(d, dtype=float)
        if np.any(d > self.scal):
            raise DesignError(f"betaMod is undefined for doses above scal={self.scal}")
        a, b = self.delta1, self.delta2
        log_b = (a + b) * math.log(a + b) - a * math.log(a) - b * math.log(b)
        u = d / self.scal
        return math.exp(log_b) * u**a * (1.0 - u) ** b

    def params(self) -> dict[str, float]:
        return {"delta1": self.delta1, "delta2": self.delta2, "scal": self.scal}


CandidateShape = Union[Linear, Emax, SigEmax, Exponential, Logistic, BetaMod]

SHAPES: dict[str, type] = {
    "linear": Linear,
    "emax": Emax,
    "sigemax": SigEmax,
    "exponential": Exponential,
    "logistic": Logistic,
    "betamod": BetaMod,
}


def make_shape(name: str, **params: float) -> CandidateShape:
    try:
        cls = SHAPES[name.lower()]
    except KeyError:
        raise DesignError(f"unknown shape {name!r}; expected one of {sorted(SHAPES)}") from None
    try:
        return cls(**params)
    except TypeError as exc:
        raise DesignError(f"bad parameters for {name}: {exc}") from None


def standardized_response(shape: CandidateShape, d: ArrayLike) -> NDArray | float:
    """Evaluate the parameter-only curve f0 of `shape` at dose(s) `d`."""
    d_arr = np.asarray(d, dtype=float)
    if np.any(d_arr < 0):
        raise DesignError("doses must be non-negative")
    out = shape(d_arr)
    return float(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True)
class CandidateModel:
    """A candidate curve anchored at placebo rate `p0` and max-dose rate `pmax`.

    ``scale="logit"`` anchors the standardized shape affinely on the logit of
    the response rate; ``scale="probability"`` anchors it on the rate itself.
    """

    shape: CandidateShape
    p0: float
    pmax: float
    scale: str = "logit"

    def __post_init__(self) -> None:
        for label, p in (("p0", self.p0), ("pmax", self.pmax)):
            if not 0 < p < 1:
                raise DesignError(f"{label} must lie strictly inside (0, 1), got {p}")
        if self.p0 == self.pmax:
            raise DegenerateCandidate("p0 == pmax gives a flat candidate")
        if self.scale not in ("logit", "probability"):
            raise DesignError(f"scale must be 'logit' or 'probability', got {self.scale!r}")

    def response(self, doses: ArrayLike, dmax: float) -> NDArray:
        """Response probabilities at `doses` with the curve anchored over [0, dmax]."""
        d = np.atleast_1d(np.asarray(doses, dtype=float))
        f = standardized_response(self.shape, d)
        f_ends = standardized_response(self.shape, np.array([0.0, dmax]))
        span = f_ends[1] - f_ends[0]
        if not np.isfinite(span) or abs(span) < 1e-300:
            raise DegenerateCandidate(f"{self.shape.name}: f0(dmax) == f0(0), anchoring impossible")
        u = (np.asarray(f) - f_ends[0]) / span
        if self.scale == "probability":
            p = self.p0 + (self.pmax - self.p0) * u
        else:
            lo, hi = logit(self.p0), logit(self.pmax)
            p = np.asarray(inv_logit(lo + (hi - lo) * u))
            # the logit round trip is not bit-exact; keep the anchors themselves
            p = np.where(u == 0.0, self.p0, np.where(u == 1.0, self.pmax, p))
        if np.any((p <= 0) | (p >= 1)):
            raise DesignError(f"{self.shape.name}: anchored response leaves (0, 1)")
        return np.asarray(p, dtype=float)


@dataclass(frozen=True)
class CandidateSet:
    models: tuple[tuple[str, CandidateModel], ...]

    def __post_init__(self) -> None:
        models = tuple((str(label), m) for label, m in self.models)
        if not models:
            raise DesignError("candidate set is empty")
        labels = [label for label, _ in models]
        if len(set(labels)) != len(labels):
            raise DesignError(f"duplicate candidate labels: {labels}")
        object.__setattr__(self, "models", models)

    @property
    def labels(self) -> list[str]:
        return [label for label, _ in self.models]

    def __len__(self) -> int:
        return len(self.models)

    def __iter__(self):
        return iter(self.models)


def candidate_means(model: CandidateModel, design: DoseDesign) -> tuple[NDArray, NDArray]:
    """Return ``(p, mu0)``: candidate response rates and their logits at the design doses."""
    p = model.response(design.dose_array, design.dmax)
    return p, np.asarray(logit(p))


# Shape parameters of the published case-study candidate set.  Recovered by
# least squares from the reported contrast tables (see calibrate.py); they
# reproduce all three reported contrast matrices to about 1e-3.
DEFAULT_SHAPES: dict[str, CandidateShape] = {
    "linear": Linear(),
    "emax": Emax(ed50=0.584),
    "sigemax": SigEmax(ed50=0.0897, h=1.22),
    "exponential": Exponential(delta=0.306),
    "logistic": Logistic(ed50=0.355, delta=0.105),
}

CASE_STUDY_DOSES = (0.0, 0.125, 0.25, 0.5, 1.0)


def default_candidates(p0: float = 0.05, pmax: float | None = None, scale: str = "logit") -> CandidateSet:
    """The five-shape candidate set; `pmax` defaults to ``p0 + 0.4``."""
    if pmax is None:
        pmax = p0 + 0.4
    return CandidateSet(tuple((name, CandidateModel(shape, p0, pmax, scale))
                              for name, shape in DEFAULT_SHAPES.items()))


def case_study_design(n_per_arm: int = 30) -> DoseDesign:
    return DoseDesign.balanced(CASE_STUDY_DOSES, n_per_arm)


def zero_count_probability(p: float, n: int) -> float:
    """Chance that an arm of size `n` with response rate `p` has no responders."""
    if not 0 <= p <= 1:
        raise DesignError(f"p must lie in [0, 1], got {p}")
    if n < 1:
        raise DesignError(f"n must be >= 1, got {n}")
    return (1.0 - p) ** n


def any_arm_zero_probability(p: Sequence[float], n: Sequence[int]) -> float:
    """Chance that at least one arm observes zero responders."""
    if len(p) != len(n):
        raise DesignError(f"length mismatch: {len(p)} rates vs {len(n)} arm sizes")
    none_zero = math.prod(1.0 - zero_count_probability(pi, ni) for pi, ni in zip(p, n))
    return 1.0 - none_zero
