"""``pfbench`` command line: Monte Carlo runs, single trials and size tables."""

from __future__ import annotations

import argparse
import csv
import logging
import sys
from pathlib import Path

from .benchmark import (
    METHODS,
    AggregateReport,
    BenchConfig,
    aggregate,
    emit_outputs,
    load_config,
    run_monte_carlo,
    run_trial,
    size_table,
)
from .errors import ConfigError, DomainError
from .sample_size import SampleSizeBound

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_IO = 3
EXIT_ALL_FAILED = 4

log = logging.getLogger("pfbench")


def _config(args) -> BenchConfig:
    cfg = load_config(args.config) if args.config else BenchConfig()
    changes = {}
    if getattr(args, "trials", None) is not None:
        changes["trials"] = args.trials
    if getattr(args, "seed", None) is not None:
        changes["master_seed"] = args.seed
    return cfg.replace(**changes) if changes else cfg


def _summary(report: AggregateReport):
    for m, s in report.stats.items():
        if s.all_failed:
            print(f"{m:15s} all {report.trials} trials failed")
            continue
        print(
            f"{m:15s} mean error {s.mean_error.mean():.6g}  "
            f"mean n {s.mean_n.mean():.1f} (per-step {s.mean_n.min():.1f}..{s.mean_n.max():.1f})  "
            f"failed {s.failed_trials}/{report.trials}"
        )


def cmd_run(args) -> int:
    cfg = _config(args)
    keep = tuple(args.trace) if args.trace is not None else (0,)
    keep = tuple(i for i in keep if i < cfg.trials)
    report = run_monte_carlo(cfg, jobs=args.jobs, keep_traces=keep)
    out = Path(args.out)
    for p in emit_outputs(report, out):
        log.info("wrote %s", p)
    if not args.no_plots:
        from .plotting import render_figures

        for p in render_figures(report, out):
            log.info("wrote %s", p)
    _summary(report)
    if any(s.all_failed for s in report.stats.values()):
        return EXIT_ALL_FAILED
    return EXIT_OK


def cmd_trial(args) -> int:
    cfg = _config(args)
    if args.method not in cfg.methods:
        cfg = cfg.replace(methods=cfg.methods + (args.method,))
    trace = run_trial(cfg, args.method, args.trial_index)
    report = AggregateReport(
        cfg.replace(trials=1, methods=(args.method,)),
        {args.method: aggregate(cfg, args.method, [trace])},
        {(args.method, args.trial_index): trace},
    )
    out = Path(args.out)
    for p in emit_outputs(report, out):
        log.info("wrote %s", p)
    if not args.no_plots:
        from .plotting import plot_trial

        plot_trial([trace], out / f"trial_{args.method}_{args.trial_index}.png")
    if trace.failed:
        print(f"{args.method} trial {args.trial_index} failed at step {trace.failed_step}")
        return EXIT_ALL_FAILED
    print(
        f"{args.method} trial {args.trial_index}: mean error {trace.errors.mean():.6g}, "
        f"n_used {trace.n_used.min()}..{trace.n_used.max()}"
    )
    return EXIT_OK


def cmd_size_table(args) -> int:
    bound = SampleSizeBound(args.epsilon, args.delta, 1, 1)
    rows = size_table(bound, args.k_max)
    fh = open(args.out, "w", newline="", encoding="utf-8") if args.out else sys.stdout
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["k", "n_wilson_hilferty", "n_exact_chi_square", "rel_error"])
        for k, wh, exact in rows:
            w.writerow([k, repr(wh), repr(exact), repr(abs(wh - exact) / exact)])
    finally:
        if fh is not sys.stdout:
            fh.close()
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="pfbench", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="Monte Carlo comparison of all configured methods")
    run.add_argument("--config", help="JSON config; defaults reproduce the published setup")
    run.add_argument("--trials", type=int)
    run.add_argument("--seed", type=int, help="override master_seed")
    run.add_argument("--out", default="pfbench-out")
    run.add_argument("--jobs", type=int, default=1, help="worker processes (results do not depend on it)")
    run.add_argument("--trace", type=int, action="append",
                     help="trial index whose full trace is written; repeatable (default 0)")
    run.add_argument("--no-plots", action="store_true")
    run.set_defaults(func=cmd_run)

    trial = sub.add_parser("trial", help="run and record a single trial")
    trial.add_argument("--method", required=True, choices=sorted(METHODS))
    trial.add_argument("--trial-index", type=int, required=True)
    trial.add_argument("--config")
    trial.add_argument("--seed", type=int)
    trial.add_argument("--out", default="pfbench-out")
    trial.add_argument("--no-plots", action="store_true")
    trial.set_defaults(func=cmd_trial)

    tab = sub.add_parser("size-table", help="Wilson-Hilferty vs exact chi-square sample sizes")
    tab.add_argument("--epsilon", type=float, default=0.15)
    tab.add_argument("--delta", type=float, default=0.01)
    tab.add_argument("--k-max", type=int, default=100)
    tab.add_argument("--out", help="CSV path (default stdout)")
    tab.set_defaults(func=cmd_size_table)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except (ConfigError, DomainError) as exc:
        print(f"pfbench: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"pfbench: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
