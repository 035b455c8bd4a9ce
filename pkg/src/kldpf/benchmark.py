"""Monte Carlo harness for the bearing-only tracking comparison.

Every trial draws from its own random streams, derived from
``(master_seed, method, trial_index)`` through :class:`numpy.random.SeedSequence`,
so a trial can be rerun in isolation and results do not depend on how trials
are scheduled across worker processes.  The truth trajectory of a trial is
drawn from a stream keyed by ``(master_seed, trial_index)`` only, so all
methods are scored against the same trajectories.
"""

from __future__ import annotations

import csv
import json
import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np

from .errors import ConfigError, DegenerateWeightsError, DomainError
from .filters import FilterState, step
from .particles import BinConfig
from .resampling import Fixed, KLDResampling, KLDSampling, method_from_name
from .sample_size import SampleSizeBound, exact_sample_size, wilson_hilferty_size
from .tracking import TrackingScenario, position_error, sample_initial_particles, simulate_truth

__all__ = [
    "METHODS",
    "BenchConfig",
    "TrialTrace",
    "MethodStats",
    "AggregateReport",
    "load_config",
    "trial_streams",
    "run_trial",
    "run_monte_carlo",
    "aggregate",
    "size_table",
    "emit_outputs",
    "write_trace_csv",
    "AGGREGATE_COLUMNS",
    "TRACE_COLUMNS",
]

log = logging.getLogger(__name__)

# stable integer codes feed the seed derivation; never renumber
METHODS = {Fixed.tag: 0, KLDSampling.tag: 1, KLDResampling.tag: 2}
_FILTER_STREAM = 1
_TRUTH_STREAM = 2

AGGREGATE_COLUMNS = ["method", "step", "mean_error", "std_error", "mean_n", "std_n", "failed_trials"]
TRACE_COLUMNS = [
    "step",
    *(f"truth_x{i}" for i in range(1, 5)),
    *(f"est_x{i}" for i in range(1, 5)),
    "error",
    "n_used",
]


@dataclass(frozen=True)
class BenchConfig:
    scenario: TrackingScenario = TrackingScenario()
    bound: SampleSizeBound = SampleSizeBound()
    bins: BinConfig = BinConfig()
    n_init: int = 1000
    methods: tuple = (Fixed.tag, KLDSampling.tag, KLDResampling.tag)
    trials: int = 1000
    master_seed: int = 0
    fixed_truth: bool = False

    def __post_init__(self):
        object.__setattr__(self, "methods", tuple(self.methods))
        if not self.methods:
            raise ConfigError("at least one method is required")
        unknown = [m for m in self.methods if m not in METHODS]
        if unknown:
            raise ConfigError(f"unknown methods {unknown}; choose from {sorted(METHODS)}")
        if len(set(self.methods)) != len(self.methods):
            raise ConfigError("methods must not repeat")
        for name in ("n_init", "trials", "master_seed"):
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, (int, np.integer)):
                raise ConfigError(f"{name} must be an integer, got {v!r}")
        if self.n_init < 1:
            raise ConfigError("n_init must be >= 1")
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if self.master_seed < 0:
            raise ConfigError("master_seed must be non-negative")
        if not isinstance(self.fixed_truth, bool):
            raise ConfigError("fixed_truth must be a boolean")
        try:
            self.bins.check_dim(4)
        except DomainError as exc:
            raise ConfigError(str(exc)) from None

    def method(self, name: str):
        return method_from_name(name, n_init=self.n_init, bound=self.bound, bins=self.bins)

    def replace(self, **changes) -> "BenchConfig":
        d = {f.name: getattr(self, f.name) for f in fields(self)}
        d.update(changes)
        return BenchConfig(**d)

    def to_dict(self) -> dict:
        return {
            "scenario": self.scenario.to_dict(),
            "bound": {
                "epsilon": self.bound.epsilon,
                "delta": self.bound.delta,
                "n_min": self.bound.n_min,
                "n_max": self.bound.n_max,
            },
            "bins": {
                "dims": list(self.bins.dims),
                "cell_size": list(self.bins.cell_size),
                "origin": list(self.bins.origin),
            },
            "n_init": self.n_init,
            "methods": list(self.methods),
            "trials": self.trials,
            "master_seed": self.master_seed,
            "fixed_truth": self.fixed_truth,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "BenchConfig":
        """Build a config from its JSON form. Missing keys take defaults; unknown keys are rejected."""
        _check_keys(d, {f.name for f in fields(cls)}, "config")
        kw = dict(d)
        try:
            if "scenario" in d:
                _check_keys(d["scenario"], {f.name for f in fields(TrackingScenario)}, "scenario")
                kw["scenario"] = TrackingScenario(**d["scenario"])
            if "bound" in d:
                _check_keys(d["bound"], {f.name for f in fields(SampleSizeBound)}, "bound")
                kw["bound"] = SampleSizeBound(**d["bound"])
            if "bins" in d:
                _check_keys(d["bins"], {f.name for f in fields(BinConfig)}, "bins")
                kw["bins"] = BinConfig(**d["bins"])
            return cls(**kw)
        except ConfigError:
            raise
        except (DomainError, TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from None


def _check_keys(d, allowed, where):
    if not isinstance(d, dict):
        raise ConfigError(f"{where} must be a JSON object")
    extra = sorted(set(d) - allowed)
    if extra:
        raise ConfigError(f"unknown keys in {where}: {extra}")


def load_config(path) -> BenchConfig:
    """Read a JSON config file. Raises OSError if unreadable, ConfigError if invalid."""
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    return BenchConfig.from_dict(data)


def trial_streams(cfg: BenchConfig, method: str, trial_index: int):
    """Return ``(filter_rng, truth_rng, seed)`` for one trial.

    ``seed`` is a 64-bit digest of the filter stream, recorded in traces.
    """
    filter_ss = np.random.SeedSequence(
        cfg.master_seed, spawn_key=(_FILTER_STREAM, METHODS[method], trial_index)
    )
    truth_key = 0 if cfg.fixed_truth else trial_index
    truth_ss = np.random.SeedSequence(cfg.master_seed, spawn_key=(_TRUTH_STREAM, truth_key))
    seed = int(filter_ss.generate_state(1, np.uint64)[0])
    return np.random.default_rng(filter_ss), np.random.default_rng(truth_ss), seed


@dataclass
class TrialTrace:
    """Per-step record of one filter run.

    If the run aborted on degenerate weights, ``failed_step`` holds the step
    and the arrays cover only the completed steps.
    """

    method: str
    trial_index: int
    seed: int
    truth: np.ndarray
    estimates: np.ndarray
    errors: np.ndarray
    n_used: np.ndarray
    failed_step: int | None = None

    @property
    def failed(self) -> bool:
        return self.failed_step is not None


def run_trial(cfg: BenchConfig, method: str, trial_index: int) -> TrialTrace:
    if method not in cfg.methods and method not in METHODS:
        raise ConfigError(f"unknown method {method!r}")
    rng, truth_rng, seed = trial_streams(cfg, method, trial_index)
    sc = cfg.scenario
    truth, meas = simulate_truth(sc, truth_rng)
    fs = FilterState(sample_initial_particles(cfg.n_init, sc, rng), cfg.method(method))
    estimates = np.empty((sc.num_steps, 4))
    n_used = np.empty(sc.num_steps, dtype=np.int64)
    failed_step = None
    done = sc.num_steps
    for t in range(sc.num_steps):
        try:
            fs, estimates[t], n_used[t] = step(fs, meas[t], sc, rng)
        except DegenerateWeightsError as exc:
            failed_step, done = exc.step, t
            log.warning("%s trial %d failed: %s", method, trial_index, exc)
            break
    return TrialTrace(
        method,
        trial_index,
        seed,
        truth[:done],
        estimates[:done],
        position_error(estimates[:done], truth[:done]),
        n_used[:done],
        failed_step,
    )


@dataclass
class MethodStats:
    mean_error: np.ndarray
    std_error: np.ndarray
    mean_n: np.ndarray
    std_n: np.ndarray
    successes: int
    failures: list = field(default_factory=list)  # (trial_index, step)

    @property
    def failed_trials(self) -> int:
        return len(self.failures)

    @property
    def all_failed(self) -> bool:
        return self.successes == 0


@dataclass
class AggregateReport:
    config: BenchConfig
    stats: dict  # method name -> MethodStats, in config order
    traces: dict = field(default_factory=dict)  # (method, trial_index) -> TrialTrace

    @property
    def trials(self) -> int:
        return self.config.trials


def aggregate(cfg: BenchConfig, method: str, traces) -> MethodStats:
    """Mean and population std per step over the successful traces, in trial order."""
    ok = sorted((t for t in traces if not t.failed), key=lambda t: t.trial_index)
    failures = sorted((t.trial_index, t.failed_step) for t in traces if t.failed)
    steps = cfg.scenario.num_steps
    if not ok:
        nan = np.full(steps, np.nan)
        return MethodStats(nan, nan.copy(), nan.copy(), nan.copy(), 0, failures)
    err = np.stack([t.errors for t in ok])
    n = np.stack([t.n_used for t in ok]).astype(float)
    return MethodStats(
        err.mean(axis=0), err.std(axis=0), n.mean(axis=0), n.std(axis=0), len(ok), failures
    )


def _run_task(args):
    cfg, method, idx = args
    return run_trial(cfg, method, idx)


def run_monte_carlo(cfg: BenchConfig, jobs: int = 1, keep_traces=(0,)) -> AggregateReport:
    """Run every configured method for ``cfg.trials`` trials and aggregate.

    ``jobs > 1`` spreads trials over worker processes; the report is identical
    for any value. Traces for trial indices in ``keep_traces`` are retained.
    """
    tasks = [(cfg, m, i) for m in cfg.methods for i in range(cfg.trials)]
    if jobs > 1:
        chunk = max(1, len(tasks) // (4 * jobs))
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_run_task, tasks, chunksize=chunk))
    else:
        results = [_run_task(t) for t in tasks]
    keep = set(keep_traces)
    stats, kept = {}, {}
    for m in cfg.methods:
        traces = [r for r in results if r.method == m]
        stats[m] = aggregate(cfg, m, traces)
        kept.update({(m, t.trial_index): t for t in traces if t.trial_index in keep})
    return AggregateReport(cfg, stats, kept)


def size_table(bound: SampleSizeBound, k_max: int):
    """Rows ``(k, wilson_hilferty, exact_chi_square)`` of unclamped sizes for ``k = 2..k_max``."""
    if k_max < 2:
        raise DomainError("k_max must be >= 2")
    return [
        (k, wilson_hilferty_size(k, bound.epsilon, bound.delta), exact_sample_size(k, bound.epsilon, bound.delta))
        for k in range(2, k_max + 1)
    ]


def _fmt(x) -> str:
    # repr gives the shortest round-trip decimal, independent of locale
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(x))


def write_trace_csv(trace: TrialTrace, path) -> Path:
    path = Path(path)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TRACE_COLUMNS)
        for t in range(len(trace.errors)):
            w.writerow(
                [t + 1]
                + [_fmt(v) for v in trace.truth[t]]
                + [_fmt(v) for v in trace.estimates[t]]
                + [_fmt(trace.errors[t]), _fmt(trace.n_used[t])]
            )
    return path


def trace_filename(trace: TrialTrace) -> str:
    return f"trial_{trace.method}_{trace.trial_index}.csv"


def emit_outputs(report: AggregateReport, out_dir) -> list:
    """Write ``aggregate.csv``, ``config.json`` and one CSV per retained trace.

    Raises OSError (with the offending path) on I/O failure.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    path = out / "aggregate.csv"
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(AGGREGATE_COLUMNS)
        for m, s in report.stats.items():
            for t in range(report.config.scenario.num_steps):
                w.writerow(
                    [
                        m,
                        t + 1,
                        _fmt(s.mean_error[t]),
                        _fmt(s.std_error[t]),
                        _fmt(s.mean_n[t]),
                        _fmt(s.std_n[t]),
                        s.failed_trials,
                    ]
                )
    written.append(path)
    path = out / "config.json"
    path.write_text(json.dumps(report.config.to_dict(), indent=2) + "\n", encoding="utf-8")
    written.append(path)
    for key in sorted(report.traces, key=lambda k: (METHODS[k[0]], k[1])):
        written.append(write_trace_csv(report.traces[key], out / trace_filename(report.traces[key])))
    return written


def default_jobs() -> int:
    return max(1, min(8, os.cpu_count() or 1))
