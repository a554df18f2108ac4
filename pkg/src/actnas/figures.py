"""Matplotlib rendering for report rows, saved to files next to the CSV."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .report import ReportRow
from .tables import Metric, METRIC_UNITS

_BASELINE_COLOR = "#9aa0a6"
_CANDIDATE_COLOR = "#3070b3"


def render_report_figure(rows: list[ReportRow], metric: Metric,
                         path: str | Path) -> None:
    """One bar panel per device: predicted objective value per model."""
    if not rows:
        raise ValueError("nothing to plot")
    devices = list(rows[0].values)
    labels = [row.label for row in rows]
    colors = [_BASELINE_COLOR if row.is_baseline else _CANDIDATE_COLOR for row in rows]
    unit = METRIC_UNITS[metric]

    fig, axes = plt.subplots(
        len(devices), 1,
        figsize=(max(6.0, 1.1 * len(rows) + 2.0), 2.6 * len(devices)),
        squeeze=False,
    )
    for ax, device in zip(axes.flat, devices):
        heights = [row.values[device] for row in rows]
        ax.bar(range(len(rows)), heights, color=colors)
        ax.set_xticks(range(len(rows)))
        ax.set_xticklabels(labels, rotation=20, ha="right")
        ax.set_ylabel(f"{metric.value} ({unit})")
        ax.set_title(device)
        ax.grid(axis="y", alpha=0.3)
    fig.suptitle(f"predicted {metric.value} by model")
    fig.tight_layout()
    fig.savefig(Path(path), dpi=150)
    plt.close(fig)
