"""Figures for benchmark reports.

Uses the object-oriented matplotlib API with an Agg canvas, so rendering
never touches pyplot global state or needs a display.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
from matplotlib.backends.backend_agg import FigureCanvasAgg
from matplotlib.figure import Figure

__all__ = ["plot_trial", "plot_aggregate", "render_figures"]

_STYLE = {
    "fixed": dict(color="0.35", ls="-", label="fixed-size PF"),
    "kld-sampling": dict(color="tab:blue", ls="--", label="KLD-sampling PF"),
    "kld-resampling": dict(color="tab:red", ls="-.", label="KLD-resampling PF"),
}


def _new_figure(width=11.0, height=4.2):
    fig = Figure(figsize=(width, height), facecolor="w")
    FigureCanvasAgg(fig)
    return fig


def plot_trial(traces, path, dpi=120):
    """Tracking scene and sample-size history of one trial, all methods overlaid."""
    traces = list(traces)
    fig = _new_figure()
    ax_xy, ax_n = fig.subplots(1, 2)
    truth = traces[0].truth
    ax_xy.plot(truth[:, 0], truth[:, 2], "k-", lw=2, label="truth")
    ax_xy.plot([0], [0], "k^", ms=8, label="sensor")
    for tr in traces:
        st = _STYLE.get(tr.method, {})
        ax_xy.plot(tr.estimates[:, 0], tr.estimates[:, 2], color=st.get("color"),
                   ls=st.get("ls"), label=st.get("label", tr.method))
        steps = np.arange(1, len(tr.n_used) + 1)
        ax_n.plot(steps, tr.n_used, color=st.get("color"), ls=st.get("ls"),
                  label=st.get("label", tr.method))
    ax_xy.set_xlabel("x")
    ax_xy.set_ylabel("y")
    ax_xy.set_title(f"tracking scene, trial {traces[0].trial_index}")
    ax_xy.legend(fontsize=8)
    ax_n.set_xlabel("step")
    ax_n.set_ylabel("number of particles")
    ax_n.set_title("sample size")
    ax_n.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=dpi)
    return Path(path)


def plot_aggregate(report, path, dpi=120):
    """Per-step mean position error and mean sample size across trials."""
    fig = _new_figure()
    ax_e, ax_n = fig.subplots(1, 2)
    steps = np.arange(1, report.config.scenario.num_steps + 1)
    for m, s in report.stats.items():
        if s.all_failed:
            continue
        st = _STYLE.get(m, {})
        kw = dict(color=st.get("color"), ls=st.get("ls"), label=st.get("label", m))
        ax_e.plot(steps, s.mean_error, **kw)
        ax_n.plot(steps, s.mean_n, **kw)
    ax_e.set_xlabel("step")
    ax_e.set_ylabel("mean position error")
    ax_e.set_title(f"mean error, {report.trials} trials")
    ax_e.legend(fontsize=8)
    ax_n.set_xlabel("step")
    ax_n.set_ylabel("mean number of particles")
    ax_n.set_title(f"mean sample size, {report.trials} trials")
    ax_n.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=dpi)
    return Path(path)


def render_figures(report, out_dir) -> list:
    """Write ``mean_error_and_size.png`` plus one ``trial_<i>.png`` per retained trial index."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = [plot_aggregate(report, out / "mean_error_and_size.png")]
    by_trial = {}
    for (m, i), tr in report.traces.items():
        by_trial.setdefault(i, []).append(tr)
    for i in sorted(by_trial):
        written.append(plot_trial(by_trial[i], out / f"trial_{i}.png"))
    return written
