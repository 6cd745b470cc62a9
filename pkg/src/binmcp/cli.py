"""Command-line front end.

Exit codes: 0 on success, 2 for invalid configuration or input, 3 when the
data admit no analysis (no responders in any arm).
"""

from __future__ import annotations

import argparse
import csv
import sys
from dataclasses import replace
from pathlib import Path
from typing import Any, Sequence

import numpy as np
from scipy import stats

from binmcp.comparators import ComparatorError, chisq_trend_test, exact_catt, fisher_exact
from binmcp.config import FORMATS, SCHEMES, ConfigError, RunConfig, load_config
from binmcp.contrasts import WeightingScheme, contrast_set
from binmcp.design import DesignError, DoseDesign, logit, zero_count_probability
from binmcp.mcptest import MCPResult, critical_value, mcp_analyze
from binmcp.mvn import MvnError
from binmcp.regression import BinomialCounts, FitError, FitResult, choose_fit
from binmcp.render import Table, render
from binmcp.simulation import ScenarioError, SimulationReport, run_scenario

EXIT_OK, EXIT_INVALID, EXIT_DEGENERATE = 0, 2, 3


class UsageError(ValueError):
    pass


# --- input helpers ------------------------------------------------------------


def _parse_list(text: str, cast: type, what: str) -> list:
    try:
        return [cast(v) for v in text.replace(" ", "").split(",") if v != ""]
    except ValueError:
        raise UsageError(f"{what}: cannot parse {text!r} as a comma-separated list") from None


def _read_counts_csv(path: Path) -> tuple[DoseDesign, tuple[int, ...]]:
    try:
        with path.open(newline="", encoding="utf-8") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames is None or not {"dose", "n", "x"} <= set(reader.fieldnames):
                raise UsageError(f"{path}: expected columns dose,n,x")
            rows = list(reader)
    except OSError as exc:
        raise UsageError(f"cannot read counts file {path}: {exc.strerror}") from None
    try:
        doses = tuple(float(r["dose"]) for r in rows)
        n = tuple(int(r["n"]) for r in rows)
        x = tuple(int(r["x"]) for r in rows)
    except (TypeError, ValueError):
        raise UsageError(f"{path}: non-numeric entry in dose,n,x") from None
    return DoseDesign(doses, n), x


def _resolve_counts(cfg: RunConfig, arg: str | None) -> RunConfig:
    """Fold ``--counts`` into the config: an inline list, or a dose,n,x CSV that also sets the design."""
    if arg is None:
        return cfg
    path = Path(arg)
    if path.suffix.lower() == ".csv" or path.is_file():
        design, x = _read_counts_csv(path)
        cfg = replace(cfg, design=design)
    else:
        x = tuple(_parse_list(arg, int, "--counts"))
    if len(x) != cfg.design.k:
        raise UsageError(f"--counts: {len(x)} counts for {cfg.design.k} arms")
    for i, (xi, ni) in enumerate(zip(x, cfg.design.n)):
        if not 0 <= xi <= ni:
            raise UsageError(f"--counts[{i}]: {xi} outside [0, {ni}]")
    return replace(cfg, counts=tuple(x))


def _apply_overrides(cfg: RunConfig, args: argparse.Namespace) -> RunConfig:
    analysis = cfg.analysis
    if args.scheme is not None:
        analysis = replace(analysis, scheme=args.scheme)
    if args.alpha is not None:
        if not 0 < args.alpha < 1:
            raise UsageError(f"--alpha must lie in (0, 1), got {args.alpha}")
        analysis = replace(analysis, alpha=args.alpha)
    scenarios = cfg.scenarios
    if args.seed is not None:
        if args.seed < 0:
            raise UsageError("--seed must be non-negative")
        analysis = replace(analysis, mvn=replace(analysis.mvn, seed=args.seed))
        scenarios = tuple(replace(s, seed=args.seed) for s in scenarios)
    output = cfg.output
    if args.format is not None:
        output = replace(output, format=args.format)
    if args.out is not None:
        output = replace(output, path=args.out)
    cfg = replace(cfg, analysis=analysis, scenarios=scenarios, output=output)
    return _resolve_counts(cfg, args.counts)


def _dose_label(d: float) -> str:
    return f"{d:g}"


# --- commands -----------------------------------------------------------------


def _fit_tables(data: BinomialCounts, fit: FitResult) -> list[Table]:
    doses = data.design.doses
    per_arm = Table("fit", ("dose", "n", "x", "method", "logit", "se"), tuple(
        (_dose_label(d), n, x, fit.method.value, float(e), float(s))
        for d, n, x, e, s in zip(doses, data.design.n, data.x, fit.eta, fit.se)))
    est = fit.treatment_effects()
    se = np.sqrt(np.concatenate([[fit.var[0]], fit.var[1:] + fit.var[0]]))
    p = 2.0 * stats.norm.sf(np.abs(est / se))
    terms = ["intercept"] + [_dose_label(d) for d in doses[1:]]
    coef = Table("coefficients", ("term", "estimate", "std_error", "p_value"),
                 tuple((t, float(e), float(s), float(q)) for t, e, s, q in zip(terms, est, se, p)))
    cov = Table("covariance", ("dose", "variance"),
                tuple((_dose_label(d), float(v)) for d, v in zip(doses, fit.var)))
    return [per_arm, coef, cov]


def _contrast_table(name: str, labels: Sequence[str], vectors: np.ndarray,
                    doses: Sequence[float]) -> Table:
    return Table(name, ("dose",) + tuple(labels), tuple(
        (_dose_label(d),) + tuple(float(v) for v in vectors[:, j]) for j, d in enumerate(doses)))


def _test_tables(res: MCPResult, doses: Sequence[float]) -> list[Table]:
    scheme = res.scheme.value
    q = critical_value(res.correlation, res.alpha, res.accuracy)
    test = Table(f"test ({scheme})", ("model", "t", "p_adj"),
                 tuple((label, t, p) for label, t, p in res.ranked()),
                 meta={"alpha": res.alpha, "critical_value": q, "min_p_adj": res.min_p,
                       "reject": res.reject})
    return [_contrast_table(f"contrasts ({scheme})", res.labels, res.contrasts.vectors, doses), test]


def _comparator_table(cfg: RunConfig, data: BinomialCounts) -> Table:
    a = cfg.analysis
    scores = a.scores if isinstance(a.scores, str) else tuple(a.scores)
    rows: list[tuple[Any, ...]] = []
    try:
        rows.append(("trend", a.trend_sidedness, chisq_trend_test(data, scores, a.trend_sidedness)))
        rows.append(("exact_catt", a.exact_sidedness, exact_catt(data, scores, a.exact_sidedness)))
    except ComparatorError:
        pass
    n0, x0 = data.design.n[0], data.x[0]
    for d, n, x in zip(data.design.doses[1:], data.design.n[1:], data.x[1:]):
        rows.append((f"fisher {_dose_label(d)} vs 0", "greater", fisher_exact(x0, n0, x, n, "greater")))
    return Table("comparators", ("test", "sidedness", "p_value"), tuple(rows))


def cmd_analyze(cfg: RunConfig) -> list[Table]:
    if cfg.counts is None:
        raise UsageError("analyze needs counts: pass --counts or set counts in the config")
    data = BinomialCounts(cfg.counts, cfg.design)
    fit = choose_fit(data)
    candidates = cfg.candidate_set()
    tables = _fit_tables(data, fit)
    for scheme in cfg.analysis.schemes:
        res = mcp_analyze(data, candidates, scheme, cfg.analysis.alpha, cfg.analysis.mvn, fit=fit)
        tables += _test_tables(res, cfg.design.doses)
    tables.append(_comparator_table(cfg, data))
    return tables


def cmd_contrasts(cfg: RunConfig) -> list[Table]:
    """Contrast matrices for the requested schemes.

    The observed scheme needs counts. With ``scheme: all`` and no counts it
    is skipped and only the design-stage schemes are printed.
    """
    candidates = cfg.candidate_set()
    tables = []
    for scheme in cfg.analysis.schemes:
        cov = None
        if scheme is WeightingScheme.OBSERVED:
            if cfg.counts is None:
                if cfg.analysis.scheme == "all":
                    continue
                raise UsageError("the observed scheme needs counts: pass --counts")
            cov = choose_fit(BinomialCounts(cfg.counts, cfg.design)).var
        cm = contrast_set(candidates, cfg.design, scheme, cov)
        tables.append(_contrast_table(f"contrasts ({scheme.value})", cm.labels, cm.vectors,
                                      cfg.design.doses))
    return tables


def cmd_curves(cfg: RunConfig, points: int = 101) -> list[Table]:
    if points < 2:
        raise UsageError("--points must be at least 2")
    grid = np.linspace(0.0, cfg.design.dmax, points)
    rows = []
    for label, model in cfg.candidate_set():
        p = model.response(grid, cfg.design.dmax)
        eta = np.asarray(logit(p))
        rows += [(label, float(d), float(pi), float(e)) for d, pi, e in zip(grid, p, eta)]
    return [Table("curves", ("model", "dose", "p", "logit"), tuple(rows))]


def cmd_zeroprob(rates: Sequence[float], sizes: Sequence[int]) -> list[Table]:
    for p in rates:
        if not 0 <= p <= 1:
            raise UsageError(f"--p: {p} outside [0, 1]")
    for n in sizes:
        if n < 1:
            raise UsageError(f"--n: {n} must be >= 1")
    rows = tuple((float(p), int(n), zero_count_probability(p, n)) for p in rates for n in sizes)
    return [Table("zero count probability", ("p", "n", "probability"), rows)]


def _report_rows(report: SimulationReport) -> tuple[Any, ...]:
    row: list[Any] = [report.label, " ".join(f"{p:g}" for p in report.true_p), report.n_sims,
                      report.excluded_all_zero, report.effective_runs]
    return tuple(row)


def cmd_simulate(cfg: RunConfig, workers: int = 1) -> list[Table]:
    if not cfg.scenarios:
        raise UsageError("simulate needs at least one scenario in the config")
    if workers < 1:
        raise UsageError("--workers must be >= 1")
    scenarios = [cfg.scenario(s) for s in cfg.scenarios]
    reports = [run_scenario(s, workers) for s in scenarios]
    rates_rows, zero_rows, detail_rows = [], [], []
    methods: list[str] = []
    for r in reports:
        methods += [m for m in r.methods if m not in methods]
    for r in reports:
        rates_rows.append(_report_rows(r) + tuple(
            r.methods[m].rate if m in r.methods else None for m in methods))
        zero_rows.append((r.label, r.p_zero_analytic, r.p_zero_empirical, r.p_zero_se,
                          r.zero_any_runs, r.excluded_all_zero))
        for m, st in r.methods.items():
            detail_rows.append((r.label, m, st.rejections, st.runs, st.rate, st.mc_se,
                                st.failures, st.degenerate))
    return [
        Table("rejection rates", ("scenario", "true_p", "n_sims", "excluded_all_zero",
                                  "effective_runs") + tuple(methods), tuple(rates_rows),
              meta={"alpha": cfg.analysis.alpha}),
        Table("zero counts", ("scenario", "p_zero_analytic", "p_zero_empirical", "p_zero_se",
                              "runs_with_zero", "excluded_all_zero"), tuple(zero_rows)),
        Table("method details", ("scenario", "method", "rejections", "runs", "rate", "mc_se",
                                 "failures", "degenerate"), tuple(detail_rows)),
    ]


# --- entry point --------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="YAML run configuration")
    common.add_argument("--scheme", choices=SCHEMES, help="contrast weighting scheme")
    common.add_argument("--alpha", type=float, help="one-sided significance level")
    common.add_argument("--seed", type=int, help="seed for scenarios and numerical integration")
    common.add_argument("--workers", type=int, default=1, help="simulation worker processes")
    common.add_argument("--format", choices=FORMATS, help="output format (default md)")
    common.add_argument("--out", metavar="PATH", help="write output here instead of stdout")
    common.add_argument("--counts", metavar="LIST|CSV",
                        help="responders per arm, e.g. 0,13,14,15,15, or a CSV with dose,n,x")
    common.add_argument("--dump-config", action="store_true",
                        help="print the resolved configuration as YAML and exit")

    parser = argparse.ArgumentParser(prog="binmcp", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("analyze", parents=[common], help="fit counts and run the contrast test")
    sub.add_parser("simulate", parents=[common], help="run the configured simulation scenarios")
    sub.add_parser("contrasts", parents=[common], help="print optimal contrast matrices")
    curves = sub.add_parser("curves", parents=[common], help="export candidate curves on a dose grid")
    curves.add_argument("--points", type=int, default=101, help="grid size (default 101)")
    zp = sub.add_parser("zeroprob", parents=[common], help="chance of a zero-responder arm")
    zp.add_argument("--p", default="0.10,0.05", help="response rates (default 0.10,0.05)")
    zp.add_argument("--n", default="10,15,20,30", help="arm sizes (default 10,15,20,30)")
    return parser


def _emit(text: str, path: str | None) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def _run(args: argparse.Namespace) -> int:
    cfg = load_config(args.config) if args.config else RunConfig()
    cfg = _apply_overrides(cfg, args)
    if args.dump_config:
        _emit(cfg.dump(), cfg.output.path)
        return EXIT_OK
    if args.command == "analyze":
        tables = cmd_analyze(cfg)
    elif args.command == "simulate":
        tables = cmd_simulate(cfg, args.workers)
    elif args.command == "contrasts":
        tables = cmd_contrasts(cfg)
    elif args.command == "curves":
        tables = cmd_curves(cfg, args.points)
    else:
        tables = cmd_zeroprob(_parse_list(args.p, float, "--p"), _parse_list(args.n, int, "--n"))
    a = cfg.analysis
    meta = {"command": args.command, "scheme": a.scheme, "alpha": a.alpha,
            "mvn": {"abs_tol": a.mvn.abs_tol, "seed": a.mvn.seed, "n_shifts": a.mvn.n_shifts},
            "seeds": {s.label: s.seed for s in cfg.scenarios}}
    _emit(render(tables, cfg.output.format, meta), cfg.output.path)
    return EXIT_OK


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _run(args)
    except FitError as exc:
        print(f"error: degenerate data: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except (ConfigError, UsageError, DesignError, ScenarioError, MvnError,
            ValueError, TypeError, OverflowError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
