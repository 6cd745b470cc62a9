from __future__ import annotations

from pathlib import Path

import pytest
import yaml
from hypothesis import given
from hypothesis import strategies as st

from binmcp.config import ConfigError, RunConfig, load_config, loads_config, parse_config

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


@pytest.mark.parametrize("name", ["case_study.yaml", "null_flat03.yaml"])
def test_shipped_configs_roundtrip(name):
    cfg = load_config(CONFIGS / name)
    assert loads_config(cfg.dump()) == cfg


def test_defaults_roundtrip():
    cfg = RunConfig()
    assert loads_config(cfg.dump()) == cfg
    assert cfg.candidate_set().labels == ["linear", "emax", "sigemax", "exponential", "logistic"]


def test_scenario_candidates_override():
    cfg = load_config(CONFIGS / "null_flat03.yaml")
    sc = cfg.scenario(cfg.scenarios[0])
    assert sc.n_sims == 10_000 and sc.true_p == (0.3,) * 5
    assert {m.p0 for _, m in sc.candidates} == {0.3}


@pytest.mark.parametrize("doc,field", [
    ({"desgin": {}}, "config"),
    ({"design": {"doses": [0, 1], "n": [5, 5], "arms": 2}}, "design"),
    ({"design": {"doses": [1, 2]}}, "design"),
    ({"design": {"doses": [0, 1], "n": [5, "x"]}}, "design.n[1]"),
    ({"candidates": {"models": [{"shape": "emax", "params": {"ed": 1}}]}}, "candidates.models[0]"),
    ({"candidates": {"models": [{"label": "a"}]}}, "candidates.models[0].shape"),
    ({"candidates": {"p0": 0.3, "pmax": 0.3}}, "candidates"),
    ({"analysis": {"alpha": 2}}, "analysis.alpha"),
    ({"analysis": {"scheme": "bayes"}}, "analysis.scheme"),
    ({"analysis": {"mvn": {"abs_tol": 0}}}, "analysis.mvn"),
    ({"analysis": {"mvn": {"min_points": 100}}}, "analysis.mvn.min_points"),
    ({"analysis": {"scores": [3, 2, 1, 0, -1]}}, "analysis.scores"),
    ({"counts": [0, 1, 2]}, "counts"),
    ({"counts": [0, 1, 2, 3, 31]}, "counts[4]"),
    ({"scenarios": [{"label": "a"}]}, "scenarios[0].true_p"),
    ({"scenarios": [{"true_p": [0.1] * 4}]}, "scenarios[0].true_p"),
    ({"scenarios": [{"true_p": [0.1] * 5, "methods": []}]}, "scenarios[0].methods"),
    ({"scenarios": [{"true_p": [0.1] * 5, "n_sims": 0}]}, "scenarios[0].n_sims"),
    ({"scenarios": [{"true_p": [0.1] * 5, "extra": 1}]}, "scenarios[0]"),
    ({"output": {"format": "xlsx"}}, "output.format"),
    ([1, 2, 3], "config"),
])
def test_validation_names_the_field(doc, field):
    with pytest.raises(ConfigError, match=r"^" + field.replace("[", r"\[").replace("]", r"\]")):
        parse_config(doc)


def test_yaml_exponent_without_point():
    cfg = loads_config("analysis:\n  mvn: {abs_tol: 1e-5}\n")
    assert cfg.analysis.mvn.abs_tol == 1e-5


def test_malformed_yaml():
    with pytest.raises(ConfigError):
        loads_config("design: [unclosed")


def test_missing_file(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.yaml")


@given(p0=st.floats(0.01, 0.5), gap=st.floats(0.05, 0.45), seed=st.integers(0, 2**32),
       n=st.integers(1, 200), scale=st.sampled_from(["logit", "probability"]))
def test_roundtrip_property(p0, gap, seed, n, scale):
    doc = {"design": {"doses": [0, 0.5, 1], "n": n},
           "candidates": {"p0": p0, "pmax": p0 + gap, "scale": scale,
                          "models": [{"shape": "linear"}, {"label": "e", "shape": "emax",
                                                           "params": {"ed50": 0.2}}]},
           "scenarios": [{"label": "x", "true_p": [p0, p0, p0 + gap], "seed": seed}]}
    cfg = parse_config(yaml.safe_load(yaml.safe_dump(doc)))
    assert loads_config(cfg.dump()) == cfg
