from __future__ import annotations

import json
from pathlib import Path

import pytest

from binmcp.cli import main
from binmcp.config import load_config

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def tables(text):
    return {t["name"]: t for t in json.loads(text)["tables"]}


def test_analyze_observed_and_allocation(capsys):
    code, out, _ = run(capsys, "analyze", "--counts", "0,13,14,15,15", "--format", "json")
    assert code == 0
    t = tables(out)
    linear = [row[1] for row in t["contrasts (allocation)"]["rows"]]
    assert linear == pytest.approx([-0.474, -0.316, -0.158, 0.158, 0.791], abs=1e-3)
    placebo_observed = t["contrasts (observed)"]["rows"][0][1:]
    assert max(abs(v) for v in placebo_observed) < 0.2
    assert t["fit"]["rows"][0][3] == "firth"


def test_analyze_single_scheme_csv(capsys):
    code, out, _ = run(capsys, "analyze", "--counts", "0,11,10,12,12", "--scheme", "observed",
                       "--format", "csv")
    assert code == 0
    assert "# test (observed)" in out and "allocation" not in out
    assert "sigemax,1.79" in out


def test_counts_csv_file(capsys, tmp_path):
    f = tmp_path / "counts.csv"
    f.write_text("dose,n,x\n0,20,1\n1,20,6\n2,25,12\n", encoding="utf-8")
    code, out, _ = run(capsys, "analyze", "--counts", str(f), "--scheme", "allocation",
                       "--format", "json")
    assert code == 0
    assert [r[:3] for r in tables(out)["fit"]["rows"]] == [["0", 20, 1], ["1", 20, 6], ["2", 25, 12]]


@pytest.mark.parametrize("argv", [
    ["analyze", "--counts", "1,2,3"],
    ["analyze", "--counts", "1,2,x,4,5"],
    ["analyze", "--counts", "1,2,3,4,40"],
    ["analyze"],
    ["simulate"],
    ["contrasts", "--scheme", "observed"],
    ["curves", "--points", "1"],
    ["zeroprob", "--p", "1.5"],
    ["analyze", "--counts", "1,2,3,4,5", "--alpha", "0"],
    ["analyze", "--config", "/nonexistent.yaml"],
])
def test_validation_exit_code(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == 2 and err.startswith("error:")


def test_argparse_errors_exit_two(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["analyze", "--format", "xml"])
    assert exc.value.code == 2


def test_all_zero_exit_three(capsys):
    code, _, err = run(capsys, "analyze", "--counts", "0,0,0,0,0")
    assert code == 3 and "degenerate" in err


@pytest.mark.parametrize("text", [
    "design: {doses: [0, 1], n: [5, 5]}\nbogus: 1\n",
    "scenarios: [{true_p: [0.1, 0.1, 0.1, 0.1, 0.1], seed: -4}]\n",
    "candidates: {models: [{shape: betamod, params: {delta1: 1, delta2: 1, scal: 0.5}}]}\n",
    "candidates: {models: [{shape: emax, params: {ed50: .inf}}]}\n",
    "design: {doses: [0, 1e400], n: 3}\n",
    "{{{{\n",
    "- 1\n- 2\n",
    "analysis: {mvn: {n_shifts: 1}}\n",
])
def test_adversarial_configs(capsys, tmp_path, text):
    f = tmp_path / "c.yaml"
    f.write_text(text, encoding="utf-8")
    code, _, _ = run(capsys, "contrasts", "--config", str(f))
    assert code == 2


def test_dump_config_roundtrip(capsys, tmp_path):
    code, out, _ = run(capsys, "simulate", "--config", str(CONFIGS / "null_flat03.yaml"),
                       "--seed", "7", "--dump-config")
    assert code == 0
    f = tmp_path / "dumped.yaml"
    f.write_text(out, encoding="utf-8")
    cfg = load_config(f)
    assert cfg.scenarios[0].seed == 7
    code, out2, _ = run(capsys, "simulate", "--config", str(f), "--dump-config")
    assert out2 == out


def test_contrasts_all_schemes(capsys):
    code, out, _ = run(capsys, "contrasts", "--format", "json")
    assert code == 0 and set(tables(out)) == {"contrasts (candidate)", "contrasts (allocation)"}
    code, out, _ = run(capsys, "contrasts", "--counts", "0,11,10,12,12", "--format", "json")
    t = tables(out)
    assert len(t) == 3
    for table in t.values():
        cols = list(zip(*[row[1:] for row in table["rows"]]))
        for col in cols:
            assert abs(sum(col)) < 1e-6 and abs(sum(v * v for v in col) - 1) < 1e-5


def test_curves(capsys):
    code, out, _ = run(capsys, "curves", "--format", "json")
    rows = tables(out)["curves"]["rows"]
    lin = [r for r in rows if r[0] == "linear"]
    assert len(lin) == 101 and lin[0][1] == 0.0 and lin[0][2] == 0.05
    for model in {r[0] for r in rows}:
        p = [r[2] for r in rows if r[0] == model]
        assert all(b >= a for a, b in zip(p, p[1:]))


def test_curves_emax_at_ed50(capsys, tmp_path):
    f = tmp_path / "c.yaml"
    f.write_text("candidates:\n  p0: 0.1\n  pmax: 0.5\n  scale: probability\n  models:\n"
                 "    - {shape: emax, params: {ed50: 0.25}}\n", encoding="utf-8")
    code, out, _ = run(capsys, "curves", "--config", str(f), "--points", "5", "--format", "json")
    rows = tables(out)["curves"]["rows"]
    # f0(ed50) = 0.5 and f0(dmax) = 1 / 1.25, so p = p0 + (pmax - p0) * 0.5 / 0.8
    assert rows[1][1] == 0.25 and rows[1][2] == pytest.approx(0.1 + 0.4 * 0.5 / 0.8, abs=1e-12)


def test_zeroprob(capsys):
    code, out, _ = run(capsys, "zeroprob", "--format", "csv")
    assert code == 0 and "0.100000,10,0.348678" in out and "0.050000,30,0.214639" in out


def test_simulate_output_file_is_deterministic(capsys, tmp_path):
    cfg = tmp_path / "s.yaml"
    cfg.write_text("scenarios:\n  - {label: s, true_p: [0.05, 0.1, 0.15, 0.2, 0.3], n_sims: 60,"
                   " seed: 3}\n", encoding="utf-8")
    outs = []
    for i, workers in enumerate(("1", "2")):
        path = tmp_path / f"out{i}.json"
        assert main(["simulate", "--config", str(cfg), "--workers", workers, "--format", "json",
                     "--out", str(path)]) == 0
        outs.append(path.read_bytes())
    assert outs[0] == outs[1]
    doc = json.loads(outs[0])
    assert doc["meta"]["seeds"] == {"s": 3}
    assert doc["tables"][0]["columns"][-5:] == ["observed", "candidate", "allocation", "trend",
                                                "exact_catt"]
