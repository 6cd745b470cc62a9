"""Run configuration: a YAML document validated into frozen dataclasses.

Every block is optional except where a command needs it; omitted blocks take
the case-study defaults. Unknown keys anywhere are errors, and
``RunConfig.to_dict`` emits a fully resolved document that parses back to an
equal ``RunConfig``.

Schema (all keys shown)::

    design:
      doses: [0, 0.125, 0.25, 0.5, 1]
      n: [30, 30, 30, 30, 30]          # or a single integer for balanced arms
    candidates:
      p0: 0.05                         # placebo rate used for anchoring
      pmax: 0.45                       # rate at the top dose; default p0 + 0.4
      scale: logit                     # or probability
      models:                          # default: the five case-study shapes
        - {label: emax, shape: emax, params: {ed50: 0.584}}
        - {label: late, shape: exponential, params: {delta: 0.3}, p0: 0.1}
    counts: [0, 13, 14, 15, 15]        # observed responders, optional
    analysis:
      scheme: all                      # observed | candidate | allocation | all
      alpha: 0.05
      trend_sidedness: two-sided
      exact_sidedness: greater
      scores: ranks                    # ranks | doses | explicit list
      mvn: {abs_tol: 1.0e-4, seed: 0, n_shifts: 12, min_points: 256, max_points: 65536}
    scenarios:
      - label: flat 0.3
        true_p: [0.3, 0.3, 0.3, 0.3, 0.3]
        methods: [observed, candidate, allocation, trend, exact_catt]
        n_sims: 10000
        seed: 0
        candidates: {p0: 0.3}          # optional; same keys as the top level
    output:
      format: md                       # csv | md | json
      path: null                       # stdout when null
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping, Sequence

import yaml

from binmcp.comparators import SIDES
from binmcp.contrasts import WeightingScheme
from binmcp.design import (CASE_STUDY_DOSES, DEFAULT_SHAPES, CandidateModel, CandidateSet,
                           DesignError, DoseDesign, make_shape)
from binmcp.mvn import MvnAccuracy, MvnError
from binmcp.simulation import METHODS, Scenario

SCHEMES = ("observed", "candidate", "allocation", "all")
FORMATS = ("csv", "md", "json")


class ConfigError(ValueError):
    """Invalid configuration; the message names the offending field."""


# --- low-level field readers --------------------------------------------------


def _mapping(obj: Any, path: str) -> Mapping[str, Any]:
    if obj is None:
        return {}
    if not isinstance(obj, Mapping):
        raise ConfigError(f"{path}: expected a mapping, got {type(obj).__name__}")
    return obj


def _check_keys(block: Mapping[str, Any], allowed: Sequence[str], path: str) -> None:
    unknown = sorted(set(block) - set(allowed))
    if unknown:
        raise ConfigError(f"{path}: unknown key(s) {unknown}; allowed: {sorted(allowed)}")


def _float(value: Any, path: str) -> float:
    # YAML 1.1 reads "1e-4" (no decimal point) as a string, so strings are accepted
    if isinstance(value, bool):
        raise ConfigError(f"{path}: expected a number, got {value!r}")
    try:
        return float(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{path}: expected a number, got {value!r}") from None


def _int(value: Any, path: str) -> int:
    if isinstance(value, bool):
        raise ConfigError(f"{path}: expected an integer, got {value!r}")
    try:
        out = int(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{path}: expected an integer, got {value!r}") from None
    if out != _float(value, path):
        raise ConfigError(f"{path}: expected an integer, got {value!r}")
    return out


def _list(value: Any, path: str) -> list:
    if not isinstance(value, (list, tuple)):
        raise ConfigError(f"{path}: expected a list, got {type(value).__name__}")
    return list(value)


def _choice(value: Any, choices: Sequence[str], path: str) -> str:
    text = str(value).lower()
    if text not in choices:
        raise ConfigError(f"{path}: {value!r} is not one of {list(choices)}")
    return text


# --- blocks -------------------------------------------------------------------


@dataclass(frozen=True)
class ModelSpec:
    label: str
    shape: str
    params: tuple[tuple[str, float], ...] = ()
    p0: float | None = None
    pmax: float | None = None
    scale: str | None = None

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {"label": self.label, "shape": self.shape}
        if self.params:
            out["params"] = dict(self.params)
        for key in ("p0", "pmax", "scale"):
            if getattr(self, key) is not None:
                out[key] = getattr(self, key)
        return out


def _default_models() -> tuple[ModelSpec, ...]:
    return tuple(ModelSpec(name, shape.name, tuple(shape.params().items()))
                 for name, shape in DEFAULT_SHAPES.items())


@dataclass(frozen=True)
class CandidateSpec:
    p0: float = 0.05
    pmax: float = 0.45
    scale: str = "logit"
    models: tuple[ModelSpec, ...] = field(default_factory=_default_models)

    def build(self) -> CandidateSet:
        models = []
        for m in self.models:
            shape = make_shape(m.shape, **dict(m.params))
            p0 = self.p0 if m.p0 is None else m.p0
            pmax = self.pmax if m.pmax is None else m.pmax
            models.append((m.label, CandidateModel(shape, p0, pmax, m.scale or self.scale)))
        return CandidateSet(tuple(models))

    def to_dict(self) -> dict[str, Any]:
        return {"p0": self.p0, "pmax": self.pmax, "scale": self.scale,
                "models": [m.to_dict() for m in self.models]}


@dataclass(frozen=True)
class AnalysisSpec:
    scheme: str = "all"
    alpha: float = 0.05
    trend_sidedness: str = "two-sided"
    exact_sidedness: str = "greater"
    scores: str | tuple[float, ...] = "ranks"
    mvn: MvnAccuracy = field(default_factory=MvnAccuracy)

    @property
    def schemes(self) -> tuple[WeightingScheme, ...]:
        if self.scheme == "all":
            return tuple(WeightingScheme)
        return (WeightingScheme.parse(self.scheme),)

    def to_dict(self) -> dict[str, Any]:
        return {"scheme": self.scheme, "alpha": self.alpha,
                "trend_sidedness": self.trend_sidedness,
                "exact_sidedness": self.exact_sidedness,
                "scores": self.scores if isinstance(self.scores, str) else list(self.scores),
                "mvn": {"abs_tol": self.mvn.abs_tol, "seed": self.mvn.seed,
                        "n_shifts": self.mvn.n_shifts, "min_points": self.mvn.min_points,
                        "max_points": self.mvn.max_points}}


@dataclass(frozen=True)
class ScenarioSpec:
    label: str
    true_p: tuple[float, ...]
    methods: tuple[str, ...] = METHODS
    n_sims: int = 10_000
    seed: int = 0
    candidates: CandidateSpec | None = None

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {"label": self.label, "true_p": list(self.true_p),
                               "methods": list(self.methods), "n_sims": self.n_sims,
                               "seed": self.seed}
        if self.candidates is not None:
            out["candidates"] = self.candidates.to_dict()
        return out


@dataclass(frozen=True)
class OutputSpec:
    format: str = "md"
    path: str | None = None

    def to_dict(self) -> dict[str, Any]:
        return {"format": self.format, "path": self.path}


def _default_design() -> DoseDesign:
    return DoseDesign.balanced(CASE_STUDY_DOSES, 30)


@dataclass(frozen=True)
class RunConfig:
    design: DoseDesign = field(default_factory=_default_design)
    candidates: CandidateSpec = field(default_factory=CandidateSpec)
    counts: tuple[int, ...] | None = None
    analysis: AnalysisSpec = field(default_factory=AnalysisSpec)
    scenarios: tuple[ScenarioSpec, ...] = ()
    output: OutputSpec = field(default_factory=OutputSpec)

    def candidate_set(self) -> CandidateSet:
        return self.candidates.build()

    def scenario(self, spec: ScenarioSpec) -> Scenario:
        cands = (spec.candidates or self.candidates).build()
        a = self.analysis
        scores = a.scores if isinstance(a.scores, str) else tuple(a.scores)
        return Scenario(label=spec.label, true_p=spec.true_p, design=self.design,
                        candidates=cands, methods=spec.methods, alpha=a.alpha,
                        n_sims=spec.n_sims, seed=spec.seed,
                        trend_sidedness=a.trend_sidedness, exact_sidedness=a.exact_sidedness,
                        scores=scores, mvn=a.mvn)

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {
            "design": {"doses": list(self.design.doses), "n": list(self.design.n)},
            "candidates": self.candidates.to_dict(),
        }
        if self.counts is not None:
            out["counts"] = list(self.counts)
        out["analysis"] = self.analysis.to_dict()
        out["scenarios"] = [s.to_dict() for s in self.scenarios]
        out["output"] = self.output.to_dict()
        return out

    def dump(self) -> str:
        return yaml.safe_dump(self.to_dict(), sort_keys=False, default_flow_style=None)


# --- parsing --------------------------------------------------------------------


def _parse_design(obj: Any) -> DoseDesign:
    block = _mapping(obj, "design")
    _check_keys(block, ("doses", "n"), "design")
    doses = [_float(d, f"design.doses[{i}]")
             for i, d in enumerate(_list(block.get("doses", CASE_STUDY_DOSES), "design.doses"))]
    raw_n = block.get("n", 30)
    if isinstance(raw_n, (list, tuple)):
        n = [_int(v, f"design.n[{i}]") for i, v in enumerate(raw_n)]
    else:
        n = [_int(raw_n, "design.n")] * len(doses)
    try:
        return DoseDesign(tuple(doses), tuple(n))
    except DesignError as exc:
        raise ConfigError(f"design: {exc}") from None


def _parse_model(obj: Any, path: str) -> ModelSpec:
    block = _mapping(obj, path)
    _check_keys(block, ("label", "shape", "params", "p0", "pmax", "scale"), path)
    if "shape" not in block:
        raise ConfigError(f"{path}.shape: required")
    shape = str(block["shape"]).lower()
    params_block = _mapping(block.get("params"), f"{path}.params")
    params = tuple((str(k), _float(v, f"{path}.params.{k}")) for k, v in params_block.items())
    try:
        make_shape(shape, **dict(params))
    except DesignError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    opt = {k: _float(block[k], f"{path}.{k}") if k in block else None for k in ("p0", "pmax")}
    scale = _choice(block["scale"], ("logit", "probability"), f"{path}.scale") if "scale" in block else None
    return ModelSpec(label=str(block.get("label", shape)), shape=shape, params=params,
                     p0=opt["p0"], pmax=opt["pmax"], scale=scale)


def _parse_candidates(obj: Any, path: str = "candidates") -> CandidateSpec:
    block = _mapping(obj, path)
    _check_keys(block, ("p0", "pmax", "scale", "models"), path)
    p0 = _float(block.get("p0", 0.05), f"{path}.p0")
    pmax = _float(block["pmax"], f"{path}.pmax") if "pmax" in block else p0 + 0.4
    scale = _choice(block.get("scale", "logit"), ("logit", "probability"), f"{path}.scale")
    if "models" in block:
        models = tuple(_parse_model(m, f"{path}.models[{i}]")
                       for i, m in enumerate(_list(block["models"], f"{path}.models")))
    else:
        models = _default_models()
    spec = CandidateSpec(p0=p0, pmax=pmax, scale=scale, models=models)
    try:
        spec.build()
    except DesignError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    return spec


def _parse_mvn(obj: Any) -> MvnAccuracy:
    block = _mapping(obj, "analysis.mvn")
    _check_keys(block, ("abs_tol", "seed", "n_shifts", "min_points", "max_points"), "analysis.mvn")
    base = MvnAccuracy()
    kwargs = {"abs_tol": _float(block.get("abs_tol", base.abs_tol), "analysis.mvn.abs_tol")}
    for key in ("seed", "n_shifts", "min_points", "max_points"):
        kwargs[key] = _int(block.get(key, getattr(base, key)), f"analysis.mvn.{key}")
    for key in ("min_points", "max_points"):
        v = kwargs[key]
        if v < 1 or v & (v - 1):
            raise ConfigError(f"analysis.mvn.{key}: must be a positive power of two, got {v}")
    if kwargs["min_points"] > kwargs["max_points"]:
        raise ConfigError("analysis.mvn: min_points exceeds max_points")
    try:
        return MvnAccuracy(**kwargs)
    except MvnError as exc:
        raise ConfigError(f"analysis.mvn: {exc}") from None


def _parse_analysis(obj: Any) -> AnalysisSpec:
    block = _mapping(obj, "analysis")
    _check_keys(block, ("scheme", "alpha", "trend_sidedness", "exact_sidedness", "scores", "mvn"),
                "analysis")
    scheme = str(block.get("scheme", "all")).lower()
    if scheme != "all":
        try:
            scheme = WeightingScheme.parse(scheme).value
        except ValueError:
            raise ConfigError(f"analysis.scheme: {block['scheme']!r} is not one of {list(SCHEMES)}") from None
    alpha = _float(block.get("alpha", 0.05), "analysis.alpha")
    if not 0 < alpha < 1:
        raise ConfigError(f"analysis.alpha: must lie in (0, 1), got {alpha}")
    raw_scores = block.get("scores", "ranks")
    if isinstance(raw_scores, (list, tuple)):
        scores: str | tuple[float, ...] = tuple(
            _float(v, f"analysis.scores[{i}]") for i, v in enumerate(raw_scores))
        if any(b <= a for a, b in zip(scores, scores[1:])):
            raise ConfigError("analysis.scores: must be strictly increasing")
    else:
        scores = _choice(raw_scores, ("ranks", "doses"), "analysis.scores")
    return AnalysisSpec(
        scheme=scheme, alpha=alpha,
        trend_sidedness=_choice(block.get("trend_sidedness", "two-sided"), SIDES,
                                "analysis.trend_sidedness"),
        exact_sidedness=_choice(block.get("exact_sidedness", "greater"), SIDES,
                                "analysis.exact_sidedness"),
        scores=scores, mvn=_parse_mvn(block.get("mvn")))


def _parse_scenario(obj: Any, path: str, k: int) -> ScenarioSpec:
    block = _mapping(obj, path)
    _check_keys(block, ("label", "true_p", "methods", "n_sims", "seed", "candidates"), path)
    if "true_p" not in block:
        raise ConfigError(f"{path}.true_p: required")
    true_p = tuple(_float(v, f"{path}.true_p[{i}]")
                   for i, v in enumerate(_list(block["true_p"], f"{path}.true_p")))
    if len(true_p) != k:
        raise ConfigError(f"{path}.true_p: {len(true_p)} rates for {k} arms")
    if any(not 0 <= p <= 1 for p in true_p):
        raise ConfigError(f"{path}.true_p: rates must lie in [0, 1]")
    methods = tuple(_choice(m, METHODS, f"{path}.methods[{i}]")
                    for i, m in enumerate(_list(block.get("methods", list(METHODS)), f"{path}.methods")))
    if not methods:
        raise ConfigError(f"{path}.methods: empty method list")
    if len(set(methods)) != len(methods):
        raise ConfigError(f"{path}.methods: duplicated entries")
    n_sims = _int(block.get("n_sims", 10_000), f"{path}.n_sims")
    if n_sims < 1:
        raise ConfigError(f"{path}.n_sims: must be >= 1")
    seed = _int(block.get("seed", 0), f"{path}.seed")
    if seed < 0:
        raise ConfigError(f"{path}.seed: must be non-negative")
    cands = _parse_candidates(block["candidates"], f"{path}.candidates") if "candidates" in block else None
    return ScenarioSpec(label=str(block.get("label", f"scenario {path}")), true_p=true_p,
                        methods=methods, n_sims=n_sims, seed=seed, candidates=cands)


def _parse_counts(obj: Any, design: DoseDesign, path: str = "counts") -> tuple[int, ...]:
    x = tuple(_int(v, f"{path}[{i}]") for i, v in enumerate(_list(obj, path)))
    if len(x) != design.k:
        raise ConfigError(f"{path}: {len(x)} counts for {design.k} arms")
    for i, (xi, ni) in enumerate(zip(x, design.n)):
        if not 0 <= xi <= ni:
            raise ConfigError(f"{path}[{i}]: {xi} outside [0, {ni}]")
    return x


def parse_config(doc: Any) -> RunConfig:
    block = _mapping(doc, "config")
    _check_keys(block, ("design", "candidates", "counts", "analysis", "scenarios", "output"), "config")
    design = _parse_design(block.get("design"))
    candidates = _parse_candidates(block.get("candidates"))
    counts = _parse_counts(block["counts"], design) if block.get("counts") is not None else None
    analysis = _parse_analysis(block.get("analysis"))
    scenarios = tuple(_parse_scenario(s, f"scenarios[{i}]", design.k)
                      for i, s in enumerate(_list(block.get("scenarios") or [], "scenarios")))
    out_block = _mapping(block.get("output"), "output")
    _check_keys(out_block, ("format", "path"), "output")
    path = out_block.get("path")
    output = OutputSpec(format=_choice(out_block.get("format", "md"), FORMATS, "output.format"),
                        path=None if path is None else str(path))
    return RunConfig(design=design, candidates=candidates, counts=counts, analysis=analysis,
                     scenarios=scenarios, output=output)


def load_config(path: str | Path) -> RunConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: malformed YAML: {exc}") from None
    return parse_config(doc)


def loads_config(text: str) -> RunConfig:
    try:
        return parse_config(yaml.safe_load(text))
    except yaml.YAMLError as exc:
        raise ConfigError(f"malformed YAML: {exc}") from None
