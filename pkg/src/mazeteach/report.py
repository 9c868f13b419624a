"""Figure rendering for experiment reports.

Renders PNGs next to the delimited trial output: a mean-efficiency bar
chart with 95% CIs per (rule, source) group, and coverage-vs-demos
traces per rule.
"""
from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .metrics import SuiteSummary, TrialRecord

RULE_COLORS = {"entropy": "#1f77b4", "heuristic": "#d62728"}


def render_efficiency_figure(summary: SuiteSummary, path: str | Path) -> Path:
    """Bar chart of mean teaching efficiency with 95% CI error bars."""
    groups = list(summary.groups)
    labels = [f"{g.rule}\n{g.source}" for g in groups]
    means = [g.mean_efficiency for g in groups]
    err_lo = [g.mean_efficiency - g.ci_low for g in groups]
    err_hi = [g.ci_high - g.mean_efficiency for g in groups]
    colors = [RULE_COLORS.get(g.rule, "#7f7f7f") for g in groups]

    fig, ax = plt.subplots(figsize=(1.6 * max(4, len(groups)), 4))
    x = np.arange(len(groups))
    ax.bar(x, means, color=colors, alpha=0.85)
    ax.errorbar(x, means, yerr=[err_lo, err_hi], fmt="none", ecolor="black", capsize=4)
    ax.set_xticks(x)
    ax.set_xticklabels(labels)
    ax.set_ylabel("teaching efficiency (mean, 95% CI)")
    ax.set_title("Guidance-rule comparison")
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def render_coverage_traces(records: list[TrialRecord], path: str | Path) -> Path:
    """Per-trial coverage as a function of demonstration count."""
    fig, ax = plt.subplots(figsize=(6, 4))
    seen = set()
    for r in records:
        if not r.coverage_trace:
            continue
        color = RULE_COLORS.get(r.rule, "#7f7f7f")
        label = r.rule if r.rule not in seen else None
        seen.add(r.rule)
        ax.plot(
            range(1, len(r.coverage_trace) + 1),
            r.coverage_trace,
            color=color,
            alpha=0.2,
            label=label,
        )
    ax.axhline(0.9, color="gray", linestyle="--", linewidth=1)
    ax.set_xlabel("demonstrations")
    ax.set_ylabel("grid coverage")
    ax.set_ylim(0, 1.02)
    if seen:
        ax.legend()
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def render_all(
    records: list[TrialRecord], summary: SuiteSummary, out_dir: str | Path
) -> dict[str, Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return {
        "efficiency": render_efficiency_figure(summary, out / "efficiency.png"),
        "coverage": render_coverage_traces(records, out / "coverage_traces.png"),
    }
