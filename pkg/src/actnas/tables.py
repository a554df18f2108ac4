"""Benchmark tables: per-layer activation replacement deltas.

Every table row prices one single-replacement candidate: replace the
activation of one layer, keep everything else, and record the change
against the reference model. Because the search strategies treat the total
cost of a multi-replacement model as

    reference_total + sum of the chosen per-layer deltas

these tables are the whole search space: L layers times A candidates,
identity replacements included (their delta is exactly 0).

Sign conventions: accuracy deltas are positive-is-better, latency and
memory deltas are positive-is-worse.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Callable

import numpy as np

from .activations import CANDIDATE_ORDER, COLUMN_INDEX, ActivationKind, parse_activation
from .devices import DeviceProfile, MeasurementConfig, simulate_latency, simulate_memory
from .errors import EstimatorError
from .model import ModelSpec, apply_assignment
from .nwot import MiniBatch, score_model


class Metric(Enum):
    LATENCY = "latency"
    ACCURACY = "accuracy"
    MEMORY = "memory"

    def __str__(self) -> str:
        return self.value


METRIC_UNITS = {Metric.LATENCY: "ms", Metric.ACCURACY: "score", Metric.MEMORY: "KB"}


@dataclass(frozen=True)
class CostEntry:
    layer_index: int
    layer_name: str
    activation: ActivationKind
    reference_value: float
    delta_value: float


@dataclass(frozen=True)
class CostTable:
    """All single-replacement deltas for one (metric, device) pair."""

    metric: Metric
    device: str
    entries: tuple[CostEntry, ...]
    reference_total: float
    weight_seed: int | None = None
    batch_seed: int | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "entries", tuple(self.entries))
        seen: set[tuple[int, ActivationKind]] = set()
        for entry in self.entries:
            key = (entry.layer_index, entry.activation)
            if key in seen:
                raise ValueError(
                    f"duplicate table entry for layer {entry.layer_index}, "
                    f"activation {entry.activation.value}")
            seen.add(key)


@dataclass(frozen=True, eq=False)
class CostMatrix:
    """Dense layers-by-candidates delta matrix in the fixed column order."""

    metric: Metric
    device: str
    values: np.ndarray
    reference_total: float = 0.0
    layer_names: tuple[str, ...] | None = None

    def __post_init__(self) -> None:
        arr = np.asarray(self.values, dtype=np.float64)
        if arr.ndim != 2 or arr.shape[1] != len(CANDIDATE_ORDER):
            raise ValueError(
                f"matrix must be (layers, {len(CANDIDATE_ORDER)}), got {arr.shape}")
        if arr.shape[0] < 1:
            raise ValueError("matrix needs at least one layer row")
        if np.isnan(arr).any():
            raise ValueError("matrix values must not be NaN")
        arr = arr.copy()
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)
        if self.layer_names is not None:
            names = tuple(self.layer_names)
            if len(names) != arr.shape[0]:
                raise ValueError("layer_names length does not match matrix rows")
            object.__setattr__(self, "layer_names", names)

    @property
    def n_layers(self) -> int:
        return int(self.values.shape[0])

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, CostMatrix):
            return NotImplemented
        return (self.metric is other.metric
                and self.device == other.device
                and self.reference_total == other.reference_total
                and self.values.shape == other.values.shape
                and bool(np.array_equal(self.values, other.values)))


def build_table(model: ModelSpec, metric: Metric,
                estimator: Callable[[ModelSpec], float], device: str,
                candidates: tuple[ActivationKind, ...] = CANDIDATE_ORDER,
                weight_seed: int | None = None,
                batch_seed: int | None = None) -> CostTable:
    """Benchmark every single-replacement candidate with the estimator.

    Rows follow the enumeration order (layer-major, fixed candidate order).
    Identity replacements short-circuit to a delta of exactly 0. Estimator
    failures abort construction and name the offending (layer, activation).
    """
    if not model.layers:
        raise ValueError("cannot build a table for an empty model")
    ordered = sorted(set(candidates), key=COLUMN_INDEX.__getitem__)
    if not ordered:
        raise ValueError("candidate set is empty")
    try:
        reference_value = float(estimator(model))
    except Exception as exc:
        raise EstimatorError(f"estimator failed on the reference model: {exc}") from exc
    reference = model.assignment
    entries: list[CostEntry] = []
    for layer in model.layers:
        for kind in ordered:
            if kind is reference[layer.index]:
                delta = 0.0
            else:
                changed = list(reference)
                changed[layer.index] = kind
                candidate = apply_assignment(model, tuple(changed))
                try:
                    delta = float(estimator(candidate)) - reference_value
                except Exception as exc:
                    raise EstimatorError(
                        f"estimator failed on layer {layer.index} ({layer.name}), "
                        f"activation {kind.value}: {exc}",
                        layer_index=layer.index, activation=kind) from exc
            entries.append(CostEntry(
                layer_index=layer.index,
                layer_name=layer.name,
                activation=kind,
                reference_value=reference_value,
                delta_value=delta,
            ))
    return CostTable(metric=metric, device=device, entries=tuple(entries),
                     reference_total=reference_value,
                     weight_seed=weight_seed, batch_seed=batch_seed)


def build_latency_table(model: ModelSpec, profile: DeviceProfile,
                        config: MeasurementConfig | None = None) -> CostTable:
    return build_table(model, Metric.LATENCY,
                       lambda m: simulate_latency(m, profile, config), profile.name)


def build_memory_table(model: ModelSpec, profile: DeviceProfile) -> CostTable:
    return build_table(model, Metric.MEMORY,
                       lambda m: simulate_memory(m, profile), profile.name)


def build_accuracy_table(model: ModelSpec, batch: MiniBatch, weight_seed: int = 0,
                         device: str = "nwot") -> CostTable:
    """Score table from the training-free proxy; degenerate scores are -inf."""
    return build_table(model, Metric.ACCURACY,
                       lambda m: score_model(m, batch, weight_seed).value, device,
                       weight_seed=weight_seed, batch_seed=batch.seed)


def to_matrix(table: CostTable) -> CostMatrix:
    """Lossless delta view: rows are layers, columns the fixed order."""
    if not table.entries:
        raise ValueError("cannot convert an empty table")
    n_layers = max(entry.layer_index for entry in table.entries) + 1
    values = np.full((n_layers, len(CANDIDATE_ORDER)), np.nan)
    names: list[str | None] = [None] * n_layers
    for entry in table.entries:
        values[entry.layer_index, COLUMN_INDEX[entry.activation]] = entry.delta_value
        names[entry.layer_index] = entry.layer_name
    missing = np.argwhere(np.isnan(values))
    if missing.size:
        layer, col = (int(v) for v in missing[0])
        raise ValueError(
            f"table has no entry for layer {layer}, "
            f"activation {CANDIDATE_ORDER[col].value}")
    return CostMatrix(metric=table.metric, device=table.device, values=values,
                      reference_total=table.reference_total,
                      layer_names=tuple(str(n) for n in names))


def table_from_matrix(matrix: CostMatrix) -> CostTable:
    """Inverse of to_matrix, synthesizing layer names when absent."""
    names = matrix.layer_names or tuple(f"layer{i}" for i in range(matrix.n_layers))
    entries = tuple(
        CostEntry(layer_index=i, layer_name=names[i], activation=kind,
                  reference_value=matrix.reference_total,
                  delta_value=float(matrix.values[i, col]))
        for i in range(matrix.n_layers)
        for col, kind in enumerate(CANDIDATE_ORDER)
    )
    return CostTable(metric=matrix.metric, device=matrix.device, entries=entries,
                     reference_total=matrix.reference_total)


def predicted_total(matrix: CostMatrix, assignment: tuple[ActivationKind, ...]) -> float:
    """reference_total plus the chosen per-layer deltas (the additivity model)."""
    if len(assignment) != matrix.n_layers:
        raise ValueError(
            f"assignment length {len(assignment)} does not match "
            f"matrix rows {matrix.n_layers}")
    total = matrix.reference_total
    for i, kind in enumerate(assignment):
        total += float(matrix.values[i, COLUMN_INDEX[kind]])
    return total


def improvement_pct(reference_value: float, new_value: float) -> float:
    """(reference - new) / reference * 100; the reference must be positive."""
    reference_value = float(reference_value)
    if not reference_value > 0.0:
        raise ValueError(
            f"improvement needs a positive reference value, got {reference_value!r}")
    return (reference_value - float(new_value)) / reference_value * 100.0


CSV_HEADER = "layer_index,layer_name,activation,reference_value,delta_value"

_META_RE = re.compile(r"^# (.+)$")


def table_csv_text(table: CostTable) -> str:
    meta = (f"# metric={table.metric.value} device={table.device} "
            f"reference_total={table.reference_total!r}")
    if table.weight_seed is not None or table.batch_seed is not None:
        meta += f" weight_seed={table.weight_seed} batch_seed={table.batch_seed}"
    lines = [meta, CSV_HEADER]
    for e in table.entries:
        lines.append(f"{e.layer_index},{e.layer_name},{e.activation.value},"
                     f"{e.reference_value!r},{e.delta_value!r}")
    return "\n".join(lines) + "\n"


def write_table_csv(table: CostTable, path: str | Path) -> None:
    Path(path).write_text(table_csv_text(table))


def parse_table_csv(text: str) -> CostTable:
    lines = [line for line in text.splitlines() if line.strip()]
    if len(lines) < 2:
        raise ValueError("table CSV needs a metadata line and a header")
    meta_match = _META_RE.match(lines[0])
    if not meta_match:
        raise ValueError("table CSV must start with a '# key=value ...' metadata line")
    meta: dict[str, str] = {}
    for token in meta_match.group(1).split():
        if "=" not in token:
            raise ValueError(f"bad metadata token {token!r}")
        key, _, value = token.partition("=")
        meta[key] = value
    for required in ("metric", "device", "reference_total"):
        if required not in meta:
            raise ValueError(f"table metadata is missing {required!r}")
    if lines[1] != CSV_HEADER:
        raise ValueError(f"unexpected table header {lines[1]!r}")
    entries = []
    for line in lines[2:]:
        parts = line.split(",")
        if len(parts) != 5:
            raise ValueError(f"bad table row {line!r}")
        entries.append(CostEntry(
            layer_index=int(parts[0]),
            layer_name=parts[1],
            activation=parse_activation(parts[2]),
            reference_value=float(parts[3]),
            delta_value=float(parts[4]),
        ))
    def _seed(key: str) -> int | None:
        value = meta.get(key)
        return None if value in (None, "None") else int(value)
    return CostTable(
        metric=Metric(meta["metric"]),
        device=meta["device"],
        entries=tuple(entries),
        reference_total=float(meta["reference_total"]),
        weight_seed=_seed("weight_seed"),
        batch_seed=_seed("batch_seed"),
    )


def read_table_csv(path: str | Path) -> CostTable:
    return parse_table_csv(Path(path).read_text())


def table_filename(metric: Metric, device: str) -> str:
    return f"{metric.value}_{device}.csv"
