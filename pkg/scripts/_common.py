"""Shared plumbing for the experiment scripts."""

from __future__ import annotations

import argparse
import time
from typing import Sequence

from binmcp.cli import cmd_simulate
from binmcp.config import CandidateSpec, RunConfig, ScenarioSpec
from binmcp.render import render
from binmcp.scenarios import StudyRow, study_candidates


def sim_parser(description: str) -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(description=description)
    ap.add_argument("--n-sims", type=int, default=10_000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--methods", default="observed,candidate,allocation,trend,exact_catt")
    ap.add_argument("--format", default="md", choices=("csv", "md", "json"))
    ap.add_argument("--out", default=None)
    return ap


def run_rows(rows: Sequence[StudyRow], anchor: float, args: argparse.Namespace) -> None:
    methods = tuple(m.strip() for m in args.methods.split(",") if m.strip())
    specs = tuple(ScenarioSpec(label=r.label, true_p=r.true_p, methods=methods,
                               n_sims=args.n_sims, seed=args.seed) for r in rows)
    cfg = RunConfig(candidates=CandidateSpec(p0=anchor, pmax=anchor + 0.4), scenarios=specs)
    assert study_candidates(anchor) == cfg.candidate_set()
    start = time.perf_counter()
    text = render(cmd_simulate(cfg, args.workers), args.format)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        print(text, end="")
    print(f"[{len(rows)} scenarios x {args.n_sims} runs in {time.perf_counter() - start:.0f} s]")
