"""Synthetic device profiles for latency and memory simulation.

A profile prices each activation in nanoseconds per output element (on top
of a base per-element layer cost) and in bytes per output element for
memory. Latency simulation averages a configurable number of runs, each
perturbed by seeded multiplicative noise, mirroring how repeated on-device
measurements are averaged; memory is exact. The shipped profiles are
illustrative, not measurements.
"""

from __future__ import annotations

import functools
import json
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from .activations import CANDIDATE_ORDER, ActivationKind, parse_activation
from .model import ModelSpec

DEFAULT_RUNS = 50

NS_PER_MS = 1e6
BYTES_PER_KB = 1024.0


@dataclass(frozen=True)
class MeasurementConfig:
    """How latency measurements are taken: run count and expected input size."""

    runs: int = DEFAULT_RUNS
    input_shape: tuple[int, ...] | None = None

    def __post_init__(self) -> None:
        if self.runs < 1:
            raise ValueError("runs must be >= 1")
        if self.input_shape is not None:
            object.__setattr__(self, "input_shape",
                               tuple(int(d) for d in self.input_shape))


@dataclass(frozen=True)
class DeviceProfile:
    name: str
    base_layer_cost: float
    per_activation_cost: dict[ActivationKind, float] = field(repr=False)
    memory_per_element: dict[ActivationKind, float] = field(repr=False)
    noise_amplitude: float = 0.0
    seed: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "per_activation_cost", dict(self.per_activation_cost))
        object.__setattr__(self, "memory_per_element", dict(self.memory_per_element))
        if not self.name:
            raise ValueError("profile needs a name")
        if self.base_layer_cost < 0 or not math.isfinite(self.base_layer_cost):
            raise ValueError("base_layer_cost must be finite and non-negative")
        for table_name, table in (("per_activation_cost", self.per_activation_cost),
                                  ("memory_per_element", self.memory_per_element)):
            missing = [k.value for k in CANDIDATE_ORDER if k not in table]
            if missing:
                raise ValueError(f"{table_name} is missing activations: {missing}")
            for kind, value in table.items():
                if value < 0 or not math.isfinite(value):
                    raise ValueError(
                        f"{table_name}[{kind.value}] must be finite and non-negative")
        if not 0.0 <= self.noise_amplitude < 1.0:
            raise ValueError("noise_amplitude must lie in [0, 1)")
        if self.seed < 0:
            raise ValueError("profile seed must be non-negative")


@functools.lru_cache(maxsize=None)
def _mean_noise_factor(seed: int, amplitude: float, runs: int) -> float:
    # One multiplicative draw per run, seeded by (profile seed, run index).
    total = 0.0
    for run in range(runs):
        rng = np.random.default_rng([seed, run])
        total += 1.0 + float(rng.uniform(-amplitude, amplitude))
    return total / runs


def simulate_latency(model: ModelSpec, profile: DeviceProfile,
                     config: MeasurementConfig | None = None) -> float:
    """Mean simulated latency in milliseconds.

    Each run prices every layer at element_count * (base_layer_cost +
    per_activation_cost[assignment]) nanoseconds, scaled by that run's
    noise factor; the result is the mean over runs. With zero noise
    amplitude the run count does not matter and the sum is exact.
    """
    if config is None:
        config = MeasurementConfig()
    if config.input_shape is not None and model.layers \
            and config.input_shape != model.input_shape:
        raise ValueError(
            f"configured input shape {config.input_shape} does not match "
            f"model input shape {model.input_shape}")
    total_ns = 0.0
    for layer in model.layers:
        cost = profile.base_layer_cost + profile.per_activation_cost[layer.activation]
        total_ns += layer.element_count * cost
    if profile.noise_amplitude > 0.0:
        total_ns *= _mean_noise_factor(profile.seed, profile.noise_amplitude, config.runs)
    return total_ns / NS_PER_MS


def simulate_memory(model: ModelSpec, profile: DeviceProfile) -> float:
    """Activation memory in kilobytes; deterministic, no noise."""
    total_bytes = 0.0
    for layer in model.layers:
        total_bytes += layer.element_count * profile.memory_per_element[layer.activation]
    return total_bytes / BYTES_PER_KB


def profile_to_dict(profile: DeviceProfile) -> dict:
    return {
        "name": profile.name,
        "base_layer_cost": profile.base_layer_cost,
        "per_activation_cost": {k.value: profile.per_activation_cost[k]
                                for k in CANDIDATE_ORDER},
        "memory_per_element": {k.value: profile.memory_per_element[k]
                               for k in CANDIDATE_ORDER},
        "noise_amplitude": profile.noise_amplitude,
        "seed": profile.seed,
    }


def profile_from_dict(data: dict) -> DeviceProfile:
    try:
        return DeviceProfile(
            name=str(data["name"]),
            base_layer_cost=float(data["base_layer_cost"]),
            per_activation_cost={parse_activation(k): float(v)
                                 for k, v in data["per_activation_cost"].items()},
            memory_per_element={parse_activation(k): float(v)
                                for k, v in data["memory_per_element"].items()},
            noise_amplitude=float(data.get("noise_amplitude", 0.0)),
            seed=int(data.get("seed", 0)),
        )
    except KeyError as exc:
        raise ValueError(f"profile is missing field {exc.args[0]!r}") from None


def save_profile(profile: DeviceProfile, path: str | Path) -> None:
    Path(path).write_text(json.dumps(profile_to_dict(profile), indent=2) + "\n")


def load_profile(path: str | Path) -> DeviceProfile:
    return profile_from_dict(json.loads(Path(path).read_text()))


def builtin_profile_names() -> list[str]:
    root = resources.files("actnas") / "data" / "profiles"
    return sorted(p.name[:-len(".json")] for p in root.iterdir()
                  if p.name.endswith(".json"))


def builtin_profile(name: str) -> DeviceProfile:
    path = resources.files("actnas") / "data" / "profiles" / f"{name}.json"
    try:
        text = path.read_text()
    except FileNotFoundError:
        known = ", ".join(builtin_profile_names())
        raise ValueError(f"unknown builtin profile {name!r}; shipped: {known}") from None
    return profile_from_dict(json.loads(text))
