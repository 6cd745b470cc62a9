"""Seeded Monte-Carlo operating characteristics for the contrast test and comparators.

Every run draws from its own generator, derived from ``(seed, run index)``
through ``numpy.random.SeedSequence``; runs are then aggregated as integer
counts. Results therefore do not depend on how runs are split across workers.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from numpy.typing import NDArray

from binmcp.comparators import DegenerateTable, chisq_trend_test, exact_catt
from binmcp.contrasts import ContrastMatrix, WeightingScheme, contrast_set
from binmcp.design import CandidateSet, DoseDesign, any_arm_zero_probability
from binmcp.mcptest import mcp_reject
from binmcp.mvn import MvnAccuracy
from binmcp.regression import BinomialCounts, FitResult, choose_fit

log = logging.getLogger(__name__)

MCP_METHODS = ("observed", "candidate", "allocation")
COMPARATOR_METHODS = ("trend", "exact_catt")
METHODS = MCP_METHODS + COMPARATOR_METHODS


class ScenarioError(ValueError):
    pass


@dataclass(frozen=True)
class Scenario:
    label: str
    true_p: tuple[float, ...]
    design: DoseDesign
    candidates: CandidateSet
    methods: tuple[str, ...] = METHODS
    alpha: float = 0.05
    n_sims: int = 10_000
    seed: int = 0
    trend_sidedness: str = "two-sided"
    exact_sidedness: str = "greater"
    scores: str = "ranks"
    mvn: MvnAccuracy = field(default_factory=MvnAccuracy)

    def __post_init__(self) -> None:
        true_p = tuple(float(p) for p in self.true_p)
        if len(true_p) != self.design.k:
            raise ScenarioError(f"{self.label}: {len(true_p)} rates for {self.design.k} arms")
        if any(not 0 <= p <= 1 for p in true_p):
            raise ScenarioError(f"{self.label}: true rates must lie in [0, 1]")
        methods = tuple(str(m).lower() for m in self.methods)
        if not methods:
            raise ScenarioError(f"{self.label}: no methods requested")
        unknown = [m for m in methods if m not in METHODS]
        if unknown:
            raise ScenarioError(f"{self.label}: unknown methods {unknown}; choose from {METHODS}")
        if len(set(methods)) != len(methods):
            raise ScenarioError(f"{self.label}: duplicated methods")
        if self.n_sims < 1:
            raise ScenarioError(f"{self.label}: n_sims must be >= 1")
        if not 0 < self.alpha < 1:
            raise ScenarioError(f"{self.label}: alpha must lie in (0, 1)")
        object.__setattr__(self, "true_p", true_p)
        object.__setattr__(self, "methods", methods)


@dataclass(frozen=True)
class MethodStats:
    rejections: int
    runs: int  # runs entering the denominator (all-zero runs excluded)
    failures: int = 0  # numerical failures, counted as non-rejections
    degenerate: int = 0  # comparator undefined for the data, counted as non-rejections

    @property
    def rate(self) -> float:
        return self.rejections / self.runs if self.runs else float("nan")

    @property
    def mc_se(self) -> float:
        if not self.runs:
            return float("nan")
        r = self.rate
        return math.sqrt(r * (1.0 - r) / self.runs)


@dataclass(frozen=True)
class SimulationReport:
    label: str
    true_p: tuple[float, ...]
    n_sims: int
    excluded_all_zero: int
    zero_any_runs: int
    p_zero_analytic: float
    methods: dict[str, MethodStats]
    seed: int
    alpha: float

    @property
    def p_zero_empirical(self) -> float:
        return self.zero_any_runs / self.n_sims

    @property
    def p_zero_se(self) -> float:
        p = self.p_zero_analytic
        return math.sqrt(p * (1.0 - p) / self.n_sims)

    @property
    def effective_runs(self) -> int:
        return self.n_sims - self.excluded_all_zero

    def rate(self, method: str) -> float:
        return self.methods[method].rate


def run_rng(seed: int, run_index: int) -> np.random.Generator:
    """Independent generator for one run, addressed by (master seed, run index)."""
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(run_index,)))


def simulate_trial(rng: np.random.Generator, scenario: Scenario) -> BinomialCounts:
    x = rng.binomial(np.asarray(scenario.design.n), np.asarray(scenario.true_p))
    return BinomialCounts(tuple(int(v) for v in x), scenario.design)


def _fixed_contrasts(scenario: Scenario) -> dict[str, ContrastMatrix]:
    out = {}
    for name in ("candidate", "allocation"):
        if name in scenario.methods:
            out[name] = contrast_set(scenario.candidates, scenario.design, name)
    return out


# counters layout per method: rejections, failures, degenerate
_REJ, _FAIL, _DEG = 0, 1, 2


def _run_chunk(scenario: Scenario, start: int, stop: int) -> tuple[int, int, NDArray]:
    fixed = _fixed_contrasts(scenario)
    counts = np.zeros((len(scenario.methods), 3), dtype=np.int64)
    excluded = zero_any = 0
    for run in range(start, stop):
        data = simulate_trial(run_rng(scenario.seed, run), scenario)
        x = data.x
        if min(x) == 0:
            zero_any += 1
        if max(x) == 0:
            excluded += 1
            continue
        fit: FitResult | None = None
        for j, method in enumerate(scenario.methods):
            try:
                if method in MCP_METHODS:
                    if fit is None:
                        fit = choose_fit(data)
                    if method == "observed":
                        cm = contrast_set(scenario.candidates, scenario.design,
                                          WeightingScheme.OBSERVED, fit.var)
                    else:
                        cm = fixed[method]
                    rejected = mcp_reject(fit, cm, scenario.alpha, scenario.mvn)
                elif method == "trend":
                    p = chisq_trend_test(data, scenario.scores, scenario.trend_sidedness)
                    rejected = p <= scenario.alpha
                else:
                    p = exact_catt(data, scenario.scores, scenario.exact_sidedness)
                    rejected = p <= scenario.alpha
            except DegenerateTable:
                counts[j, _DEG] += 1
                continue
            except (ArithmeticError, ValueError, RuntimeError) as exc:
                log.debug("run %d, %s failed: %s", run, method, exc)
                counts[j, _FAIL] += 1
                continue
            if rejected:
                counts[j, _REJ] += 1
    return excluded, zero_any, counts


def _chunks(n: int, n_chunks: int) -> list[tuple[int, int]]:
    n_chunks = max(1, min(n, n_chunks))
    edges = np.linspace(0, n, n_chunks + 1).round().astype(int)
    return [(int(a), int(b)) for a, b in zip(edges[:-1], edges[1:]) if b > a]


def run_scenario(scenario: Scenario, workers: int = 1) -> SimulationReport:
    """Simulate `scenario`; identical output for any `workers` value."""
    if workers < 1:
        raise ScenarioError("workers must be >= 1")
    if workers == 1:
        parts = [_run_chunk(scenario, 0, scenario.n_sims)]
    else:
        chunks = _chunks(scenario.n_sims, 4 * workers)
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_run_chunk, scenario, a, b) for a, b in chunks]
            parts = [f.result() for f in futures]
    excluded = sum(p[0] for p in parts)
    zero_any = sum(p[1] for p in parts)
    counts = sum((p[2] for p in parts), np.zeros((len(scenario.methods), 3), dtype=np.int64))
    effective = scenario.n_sims - excluded
    methods = {m: MethodStats(rejections=int(counts[j, _REJ]), runs=effective,
                              failures=int(counts[j, _FAIL]), degenerate=int(counts[j, _DEG]))
               for j, m in enumerate(scenario.methods)}
    return SimulationReport(
        label=scenario.label,
        true_p=scenario.true_p,
        n_sims=scenario.n_sims,
        excluded_all_zero=excluded,
        zero_any_runs=zero_any,
        p_zero_analytic=any_arm_zero_probability(scenario.true_p, scenario.design.n),
        methods=methods,
        seed=scenario.seed,
        alpha=scenario.alpha,
    )


def power_table(scenarios: Sequence[Scenario], workers: int = 1) -> list[SimulationReport]:
    if not scenarios:
        raise ScenarioError("power_table needs at least one scenario")
    return [run_scenario(s, workers) for s in scenarios]
