"""Candidate activation functions.

Every assignment slot holds one of five activations. The candidate order
below is fixed: cost matrices, serialized tables, and tie-breaking in the
exact search all index columns in this order.
"""

from __future__ import annotations

import math
from enum import Enum

import numpy as np

DEFAULT_LEAKY_SLOPE = 0.1


class ActivationKind(Enum):
    RELU = "relu"
    SILU = "silu"
    HARDSWISH = "hardswish"
    RELU6 = "relu6"
    LEAKYRELU = "leakyrelu"

    def __str__(self) -> str:
        return self.value


#: Fixed column order for cost matrices and serialized tables.
CANDIDATE_ORDER: tuple[ActivationKind, ...] = (
    ActivationKind.RELU,
    ActivationKind.SILU,
    ActivationKind.HARDSWISH,
    ActivationKind.RELU6,
    ActivationKind.LEAKYRELU,
)

COLUMN_INDEX: dict[ActivationKind, int] = {k: i for i, k in enumerate(CANDIDATE_ORDER)}


def parse_activation(name: str) -> ActivationKind:
    try:
        return ActivationKind(str(name).strip().lower())
    except ValueError:
        known = ", ".join(k.value for k in CANDIDATE_ORDER)
        raise ValueError(f"unknown activation {name!r}; expected one of: {known}") from None


def validate_leaky_slope(slope: float) -> float:
    slope = float(slope)
    if not math.isfinite(slope) or not 0.0 < slope < 1.0:
        raise ValueError(f"leaky slope must be finite and in (0, 1), got {slope!r}")
    return slope


def eval_activation(kind: ActivationKind, x: float,
                    leaky_slope: float = DEFAULT_LEAKY_SLOPE) -> float:
    """Evaluate one activation at a scalar point.

    ReLU(x) = max(0, x); ReLU6 clips at 6; LeakyReLU keeps a configurable
    fraction of negative inputs; SiLU(x) = x * sigmoid(x); Hardswish is the
    piecewise-linear SiLU stand-in x * min(max(x + 3, 0), 6) / 6.
    """
    x = float(x)
    if not math.isfinite(x):
        raise ValueError(f"activation input must be finite, got {x!r}")
    if kind is ActivationKind.RELU:
        return max(0.0, x)
    if kind is ActivationKind.RELU6:
        return min(max(0.0, x), 6.0)
    if kind is ActivationKind.LEAKYRELU:
        slope = validate_leaky_slope(leaky_slope)
        return x if x >= 0.0 else slope * x
    if kind is ActivationKind.SILU:
        return x * _sigmoid(x)
    if kind is ActivationKind.HARDSWISH:
        return x * min(max(x + 3.0, 0.0), 6.0) / 6.0
    raise TypeError(f"not an ActivationKind: {kind!r}")


def _sigmoid(x: float) -> float:
    # Split by sign so exp never overflows.
    if x >= 0.0:
        return 1.0 / (1.0 + math.exp(-x))
    e = math.exp(x)
    return e / (1.0 + e)


def activation_array(kind: ActivationKind, x: np.ndarray,
                     leaky_slope: float = DEFAULT_LEAKY_SLOPE) -> np.ndarray:
    """Vectorized eval_activation, used by the forward pass."""
    x = np.asarray(x, dtype=np.float64)
    if kind is ActivationKind.RELU:
        return np.maximum(x, 0.0)
    if kind is ActivationKind.RELU6:
        return np.clip(x, 0.0, 6.0)
    if kind is ActivationKind.LEAKYRELU:
        slope = validate_leaky_slope(leaky_slope)
        return np.where(x >= 0.0, x, slope * x)
    if kind is ActivationKind.SILU:
        return x * _sigmoid_array(x)
    if kind is ActivationKind.HARDSWISH:
        return x * np.clip(x + 3.0, 0.0, 6.0) / 6.0
    raise TypeError(f"not an ActivationKind: {kind!r}")


def _sigmoid_array(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)
    pos = x >= 0.0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    e = np.exp(x[~pos])
    out[~pos] = e / (1.0 + e)
    return out
