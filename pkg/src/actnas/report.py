"""Improvement-percentage reports over benchmark tables and proposals.

A report row is one model (a uniform-activation baseline or a search
proposal) with its predicted objective value per device and its improvement
percentage against the named baselines. Values come from the additive
model: reference_total plus the chosen per-layer deltas of each device's
table. Percentages are (baseline - value) / baseline * 100, shown with two
decimals, ties rounding away from zero. Baselines show "-" against
themselves and each other.
"""

from __future__ import annotations

import decimal
from dataclasses import dataclass
from pathlib import Path

from .activations import ActivationKind
from .tables import CostMatrix, Metric, METRIC_UNITS, improvement_pct, predicted_total


@dataclass(frozen=True)
class ReportRow:
    label: str
    is_baseline: bool
    assignment: tuple[ActivationKind, ...]
    values: dict[str, float]
    improvements: dict[tuple[str, str], float | None]


def round_half_away_from_zero(value: float, ndigits: int = 2) -> float:
    quantum = decimal.Decimal(1).scaleb(-ndigits)
    rounded = decimal.Decimal(value).quantize(quantum, rounding=decimal.ROUND_HALF_UP)
    return float(rounded)


def build_report_rows(matrices: dict[str, CostMatrix],
                      baselines: list[tuple[str, ActivationKind]],
                      candidates: list[tuple[str, tuple[ActivationKind, ...]]],
                      ) -> list[ReportRow]:
    """Rows for the named baselines first, then the candidate assignments.

    matrices maps device name to that device's objective-metric matrix;
    baselines are (label, activation) pairs expanded to uniform
    assignments.
    """
    if not matrices:
        raise ValueError("report needs at least one device table")
    if not baselines:
        raise ValueError("report needs at least one baseline")
    devices = list(matrices)
    baseline_values: dict[tuple[str, str], float] = {}
    rows: list[ReportRow] = []

    def _values(assignment: tuple[ActivationKind, ...]) -> dict[str, float]:
        return {device: predicted_total(matrices[device], assignment)
                for device in devices}

    for label, kind in baselines:
        assignment = (kind,) * matrices[devices[0]].n_layers
        values = _values(assignment)
        for device in devices:
            baseline_values[(device, label)] = values[device]
        rows.append(ReportRow(
            label=label, is_baseline=True, assignment=assignment, values=values,
            improvements={(device, other): None
                          for device in devices for other, _ in baselines},
        ))

    for label, assignment in candidates:
        values = _values(assignment)
        improvements = {
            (device, base_label): improvement_pct(
                baseline_values[(device, base_label)], values[device])
            for device in devices for base_label, _ in baselines
        }
        rows.append(ReportRow(label=label, is_baseline=False,
                              assignment=assignment, values=values,
                              improvements=improvements))
    return rows


def _format_pct(value: float | None) -> str:
    if value is None:
        return "-"
    return f"{round_half_away_from_zero(value):.2f}"


def _format_value(value: float) -> str:
    # Significant digits, not fixed decimals: predicted totals span many
    # orders of magnitude across devices and model sizes.
    return f"{value:.6g}"


def render_report_text(rows: list[ReportRow], metric: Metric,
                       baseline_labels: list[str]) -> str:
    if not rows:
        raise ValueError("nothing to report")
    devices = list(rows[0].values)
    unit = METRIC_UNITS[metric]
    header = ["model"]
    for device in devices:
        header.append(f"{device} {metric.value} ({unit})")
        for base in baseline_labels:
            header.append(f"{device} vs {base} (%)")
    body: list[list[str]] = []
    for row in rows:
        cells = [row.label]
        for device in devices:
            cells.append(_format_value(row.values[device]))
            for base in baseline_labels:
                cells.append(_format_pct(row.improvements[(device, base)]))
        body.append(cells)
    widths = [max(len(line[i]) for line in [header] + body)
              for i in range(len(header))]
    def fmt(cells: list[str]) -> str:
        return "  ".join(cell.ljust(width) for cell, width in zip(cells, widths)).rstrip()
    ruler = "  ".join("-" * width for width in widths)
    return "\n".join([fmt(header), ruler] + [fmt(cells) for cells in body]) + "\n"


def report_csv_text(rows: list[ReportRow], metric: Metric,
                    baseline_labels: list[str]) -> str:
    """Delimited report: full-precision values, two-decimal percentages."""
    if not rows:
        raise ValueError("nothing to report")
    devices = list(rows[0].values)
    header = ["model"]
    for device in devices:
        header.append(f"{device}_{metric.value}")
        for base in baseline_labels:
            header.append(f"{device}_improvement_vs_{base}")
    lines = [",".join(header)]
    for row in rows:
        cells = [row.label]
        for device in devices:
            cells.append(repr(row.values[device]))
            for base in baseline_labels:
                pct = row.improvements[(device, base)]
                cells.append("" if pct is None else _format_pct(pct))
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def write_report_csv(rows: list[ReportRow], metric: Metric,
                     baseline_labels: list[str], path: str | Path) -> None:
    Path(path).write_text(report_csv_text(rows, metric, baseline_labels))
