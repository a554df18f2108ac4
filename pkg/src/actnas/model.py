"""Layered model description and the single-replacement candidate space.

A model is an ordered stack of dense and conv2d layers, each with one
activation slot. The per-layer activation choices form the assignment; the
search strategies explore assignments, and the benchmark tables are built
from candidates that replace exactly one slot at a time.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from enum import Enum
from importlib import resources
from pathlib import Path

from .activations import (
    CANDIDATE_ORDER,
    COLUMN_INDEX,
    DEFAULT_LEAKY_SLOPE,
    ActivationKind,
    parse_activation,
    validate_leaky_slope,
)


class LayerKind(Enum):
    DENSE = "dense"
    CONV2D = "conv2d"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class LayerSpec:
    """One activation slot: a dense or conv2d layer plus its activation."""

    index: int
    name: str
    kind: LayerKind
    in_shape: tuple[int, ...]
    out_shape: tuple[int, ...]
    kernel: int | None = None
    stride: int | None = None
    padding: int | None = None
    activation: ActivationKind = ActivationKind.SILU

    def __post_init__(self) -> None:
        object.__setattr__(self, "in_shape", tuple(int(d) for d in self.in_shape))
        object.__setattr__(self, "out_shape", tuple(int(d) for d in self.out_shape))
        if self.index < 0:
            raise ValueError(f"layer index must be non-negative, got {self.index}")
        if any(d <= 0 for d in self.in_shape + self.out_shape):
            raise ValueError(f"layer {self.index}: shape dimensions must be positive")
        if self.kind is LayerKind.DENSE:
            self._validate_dense()
        elif self.kind is LayerKind.CONV2D:
            self._validate_conv()
        else:
            raise ValueError(f"layer {self.index}: unknown kind {self.kind!r}")
        if not isinstance(self.activation, ActivationKind):
            raise ValueError(f"layer {self.index}: bad activation {self.activation!r}")

    def _validate_dense(self) -> None:
        if len(self.in_shape) != 1 or len(self.out_shape) != 1:
            raise ValueError(f"layer {self.index}: dense shapes must be 1-d (width,)")
        if not (self.kernel is None and self.stride is None and self.padding is None):
            raise ValueError(
                f"layer {self.index}: dense layers take no kernel/stride/padding")

    def _validate_conv(self) -> None:
        if len(self.in_shape) != 3 or len(self.out_shape) != 3:
            raise ValueError(
                f"layer {self.index}: conv2d shapes must be (channels, height, width)")
        if self.kernel is None or self.stride is None or self.padding is None:
            raise ValueError(
                f"layer {self.index}: conv2d layers need kernel, stride, and padding")
        if self.kernel < 1 or self.stride < 1 or self.padding < 0:
            raise ValueError(
                f"layer {self.index}: kernel/stride must be >= 1 and padding >= 0")
        _, h, w = self.in_shape
        out_h = (h + 2 * self.padding - self.kernel) // self.stride + 1
        out_w = (w + 2 * self.padding - self.kernel) // self.stride + 1
        if out_h < 1 or out_w < 1:
            raise ValueError(f"layer {self.index}: kernel exceeds the padded input")
        if self.out_shape[1:] != (out_h, out_w):
            raise ValueError(
                f"layer {self.index}: out_shape {self.out_shape} is inconsistent with "
                f"kernel={self.kernel} stride={self.stride} padding={self.padding}; "
                f"expected spatial dims ({out_h}, {out_w})")

    @property
    def element_count(self) -> int:
        n = 1
        for d in self.out_shape:
            n *= d
        return n


@dataclass(frozen=True)
class ModelSpec:
    name: str
    layers: tuple[LayerSpec, ...]
    leaky_slope: float = DEFAULT_LEAKY_SLOPE

    def __post_init__(self) -> None:
        object.__setattr__(self, "layers", tuple(self.layers))
        object.__setattr__(self, "leaky_slope", validate_leaky_slope(self.leaky_slope))
        for position, layer in enumerate(self.layers):
            if layer.index != position:
                raise ValueError(
                    f"layer indexes must be contiguous from 0; position {position} "
                    f"holds index {layer.index}")

    @property
    def assignment(self) -> tuple[ActivationKind, ...]:
        return tuple(layer.activation for layer in self.layers)

    @property
    def n_layers(self) -> int:
        return len(self.layers)

    @property
    def input_shape(self) -> tuple[int, ...]:
        if not self.layers:
            raise ValueError("model has no layers")
        return self.layers[0].in_shape

    @property
    def element_counts(self) -> tuple[int, ...]:
        return tuple(layer.element_count for layer in self.layers)

    @property
    def total_elements(self) -> int:
        return sum(self.element_counts)


def apply_assignment(model: ModelSpec,
                     assignment: tuple[ActivationKind, ...]) -> ModelSpec:
    """Return a copy of the model with the given per-layer activations.

    Layer topology is unchanged; only the activation slots move.
    """
    assignment = tuple(assignment)
    if len(assignment) != model.n_layers:
        raise ValueError(
            f"assignment length {len(assignment)} does not match "
            f"layer count {model.n_layers}")
    for kind in assignment:
        if not isinstance(kind, ActivationKind):
            raise ValueError(f"bad activation in assignment: {kind!r}")
    layers = tuple(replace(layer, activation=kind)
                   for layer, kind in zip(model.layers, assignment))
    return replace(model, layers=layers)


def enumerate_single_replacements(
        model: ModelSpec,
        candidates: tuple[ActivationKind, ...] = CANDIDATE_ORDER,
) -> list[ModelSpec]:
    """All models that differ from the reference in at most one slot.

    Candidates are visited layer-major in the fixed column order, and the
    identity replacement is included, so a model with L slots and A
    candidates yields exactly L * A entries.
    """
    if not model.layers:
        raise ValueError("cannot enumerate candidates for an empty model")
    ordered = sorted(set(candidates), key=COLUMN_INDEX.__getitem__)
    if not ordered:
        raise ValueError("candidate set is empty")
    reference = model.assignment
    out: list[ModelSpec] = []
    for layer in model.layers:
        for kind in ordered:
            changed = list(reference)
            changed[layer.index] = kind
            out.append(apply_assignment(model, tuple(changed)))
    return out


def model_to_dict(model: ModelSpec) -> dict:
    return {
        "name": model.name,
        "leaky_slope": model.leaky_slope,
        "layers": [
            {
                "index": layer.index,
                "name": layer.name,
                "kind": layer.kind.value,
                "in_shape": list(layer.in_shape),
                "out_shape": list(layer.out_shape),
                "kernel": layer.kernel,
                "stride": layer.stride,
                "padding": layer.padding,
                "activation": layer.activation.value,
            }
            for layer in model.layers
        ],
    }


def model_from_dict(data: dict) -> ModelSpec:
    try:
        raw_layers = data["layers"]
        layers = tuple(
            LayerSpec(
                index=int(entry["index"]),
                name=str(entry["name"]),
                kind=LayerKind(entry["kind"]),
                in_shape=tuple(entry["in_shape"]),
                out_shape=tuple(entry["out_shape"]),
                kernel=None if entry.get("kernel") is None else int(entry["kernel"]),
                stride=None if entry.get("stride") is None else int(entry["stride"]),
                padding=None if entry.get("padding") is None else int(entry["padding"]),
                activation=parse_activation(entry["activation"]),
            )
            for entry in raw_layers
        )
        return ModelSpec(
            name=str(data["name"]),
            layers=layers,
            leaky_slope=float(data.get("leaky_slope", DEFAULT_LEAKY_SLOPE)),
        )
    except KeyError as exc:
        raise ValueError(f"model description is missing field {exc.args[0]!r}") from None


def save_model(model: ModelSpec, path: str | Path) -> None:
    Path(path).write_text(json.dumps(model_to_dict(model), indent=2) + "\n")


def load_model(path: str | Path) -> ModelSpec:
    return model_from_dict(json.loads(Path(path).read_text()))


def builtin_model_names() -> list[str]:
    root = resources.files("actnas") / "data" / "models"
    return sorted(p.name[:-len(".json")] for p in root.iterdir()
                  if p.name.endswith(".json"))


def builtin_model(name: str) -> ModelSpec:
    path = resources.files("actnas") / "data" / "models" / f"{name}.json"
    try:
        text = path.read_text()
    except FileNotFoundError:
        known = ", ".join(builtin_model_names())
        raise ValueError(f"unknown builtin model {name!r}; shipped: {known}") from None
    return model_from_dict(json.loads(text))


def stacked_conv_model(n_layers: int,
                       name: str = "stacked-conv",
                       in_channels: int = 3,
                       channels: int = 8,
                       height: int = 16,
                       width: int = 16,
                       activation: ActivationKind = ActivationKind.SILU,
                       leaky_slope: float = DEFAULT_LEAKY_SLOPE) -> ModelSpec:
    """Build a same-resolution conv stack, handy as a stand-in test subject.

    Every layer is a 3x3, stride 1, padding 1 convolution, so the spatial
    dims never change and each slot contributes channels * height * width
    elements.
    """
    if n_layers < 1:
        raise ValueError("n_layers must be >= 1")
    layers = []
    for i in range(n_layers):
        c_in = in_channels if i == 0 else channels
        layers.append(LayerSpec(
            index=i,
            name=f"conv{i}",
            kind=LayerKind.CONV2D,
            in_shape=(c_in, height, width),
            out_shape=(channels, height, width),
            kernel=3,
            stride=1,
            padding=1,
            activation=activation,
        ))
    return ModelSpec(name=name, layers=tuple(layers), leaky_slope=leaky_slope)
