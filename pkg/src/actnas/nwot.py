"""Training-free accuracy proxy from binary activation codes.

A model is scored without any training: a seeded mini-batch runs through a
deterministic, randomly initialized forward pass, each sample collects one
binary code (bit = 1 wherever an activation output is strictly positive),
and the score is the log-determinant of the code-agreement kernel

    K[i][j] = n_units - hamming(code_i, code_j)

which counts the positions where samples i and j agree. Models whose
kernels are rank deficient get a degenerate flag and a -inf sentinel value
that ranks below every finite score. Replacing a layer's activation changes
the values flowing into later layers, so the codes, the kernel, and the
score all move with the assignment.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .activations import ActivationKind, activation_array
from .model import LayerKind, LayerSpec, ModelSpec

DEFAULT_BATCH_SIZE = 16

DEGENERATE_SCORE = float("-inf")


@dataclass(frozen=True, eq=False)
class MiniBatch:
    """A seeded batch of network inputs; same seed, bit-identical values."""

    inputs: np.ndarray
    seed: int

    def __post_init__(self) -> None:
        arr = np.asarray(self.inputs, dtype=np.float64)
        if arr.ndim < 2:
            raise ValueError("batch inputs need a leading sample axis")
        if arr.shape[0] < 1:
            raise ValueError("batch must hold at least one sample")
        if not np.isfinite(arr).all():
            raise ValueError("batch inputs must be finite")
        arr.setflags(write=False)
        object.__setattr__(self, "inputs", arr)

    @classmethod
    def generate(cls, input_shape: tuple[int, ...], n_samples: int = DEFAULT_BATCH_SIZE,
                 seed: int = 0) -> "MiniBatch":
        if n_samples < 1:
            raise ValueError("n_samples must be >= 1")
        rng = np.random.default_rng(seed)
        inputs = rng.standard_normal((n_samples, *input_shape))
        return cls(inputs=inputs, seed=seed)

    @property
    def n_samples(self) -> int:
        return int(self.inputs.shape[0])

    @property
    def input_shape(self) -> tuple[int, ...]:
        return tuple(self.inputs.shape[1:])


@dataclass(frozen=True, eq=False)
class CodeMatrix:
    """Per-sample binary activation codes, one row per batch sample."""

    bits: np.ndarray

    def __post_init__(self) -> None:
        arr = np.asarray(self.bits, dtype=np.uint8)
        if arr.ndim != 2:
            raise ValueError("code matrix must be 2-d (samples x units)")
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError("code matrix must be non-empty")
        if not np.isin(arr, (0, 1)).all():
            raise ValueError("code matrix entries must be 0 or 1")
        arr.setflags(write=False)
        object.__setattr__(self, "bits", arr)

    @property
    def n_samples(self) -> int:
        return int(self.bits.shape[0])

    @property
    def n_units(self) -> int:
        return int(self.bits.shape[1])


@dataclass(frozen=True)
class NwotScore:
    value: float
    degenerate: bool = False


def layer_weights(layer: LayerSpec, weight_seed: int) -> np.ndarray:
    """Deterministic Gaussian weights, scaled by 1/sqrt(fan_in).

    The draw depends only on (weight_seed, layer index) and the layer's
    shape, never on the activation assignment, so a reference model and its
    single-replacement candidates share identical weights.
    """
    rng = np.random.default_rng([int(weight_seed), layer.index])
    if layer.kind is LayerKind.DENSE:
        fan_in = layer.in_shape[0]
        shape: tuple[int, ...] = (layer.out_shape[0], fan_in)
    else:
        c_in = layer.in_shape[0]
        fan_in = c_in * layer.kernel * layer.kernel
        shape = (layer.out_shape[0], c_in, layer.kernel, layer.kernel)
    return rng.standard_normal(shape) / math.sqrt(fan_in)


def _conv2d(x: np.ndarray, weights: np.ndarray, stride: int, padding: int) -> np.ndarray:
    # x: (n, c_in, h, w); weights: (c_out, c_in, k, k)
    k = weights.shape[2]
    if padding:
        x = np.pad(x, ((0, 0), (0, 0), (padding, padding), (padding, padding)))
    windows = np.lib.stride_tricks.sliding_window_view(x, (k, k), axis=(2, 3))
    windows = windows[:, :, ::stride, ::stride, :, :]
    return np.einsum("nihwkl,oikl->nohw", windows, weights)


def forward_with_codes(model: ModelSpec, batch: MiniBatch,
                       weight_seed: int = 0) -> CodeMatrix:
    """Run the batch through the model and collect the activation codes.

    Layers chain in order; a dense layer after a conv2d layer consumes the
    flattened feature map. Any shape mismatch or non-finite intermediate
    raises.
    """
    if not model.layers:
        raise ValueError("cannot run a forward pass on an empty model")
    x = batch.inputs
    if batch.input_shape != model.input_shape:
        raise ValueError(
            f"batch shape {batch.input_shape} does not match "
            f"model input shape {model.input_shape}")
    n = batch.n_samples
    code_blocks: list[np.ndarray] = []
    for layer in model.layers:
        if layer.kind is LayerKind.DENSE and x.ndim > 2:
            x = x.reshape(n, -1)
        if tuple(x.shape[1:]) != layer.in_shape:
            raise ValueError(
                f"layer {layer.index} ({layer.name}): input shape "
                f"{tuple(x.shape[1:])} does not match declared {layer.in_shape}")
        weights = layer_weights(layer, weight_seed)
        if layer.kind is LayerKind.DENSE:
            pre = x @ weights.T
        else:
            pre = _conv2d(x, weights, layer.stride, layer.padding)
        if not np.isfinite(pre).all():
            raise ValueError(
                f"layer {layer.index} ({layer.name}): non-finite intermediate values")
        x = activation_array(layer.activation, pre, model.leaky_slope)
        code_blocks.append((x > 0.0).reshape(n, -1).astype(np.uint8))
    return CodeMatrix(bits=np.concatenate(code_blocks, axis=1))


def hamming_kernel(codes: CodeMatrix) -> np.ndarray:
    """Agreement kernel: K[i][j] = n_units - hamming(row_i, row_j)."""
    c = codes.bits.astype(np.float64)
    return c @ c.T + (1.0 - c) @ (1.0 - c).T


def nwot_score(codes: CodeMatrix) -> NwotScore:
    """log|det K| of the agreement kernel, via a pivoted factorization.

    Singular kernels (or a non-positive determinant) yield the degenerate
    sentinel instead of a finite value; no jitter is applied.
    """
    kernel = hamming_kernel(codes)
    if codes.n_samples == 1:
        diag = float(kernel[0, 0])
        if diag <= 0.0:
            return NwotScore(value=DEGENERATE_SCORE, degenerate=True)
        return NwotScore(value=math.log(diag), degenerate=False)
    sign, logdet = np.linalg.slogdet(kernel)
    if sign <= 0.0 or not math.isfinite(logdet):
        return NwotScore(value=DEGENERATE_SCORE, degenerate=True)
    return NwotScore(value=float(logdet), degenerate=False)


def score_model(model: ModelSpec, batch: MiniBatch, weight_seed: int = 0) -> NwotScore:
    return nwot_score(forward_with_codes(model, batch, weight_seed))


def _same_topology(a: ModelSpec, b: ModelSpec) -> bool:
    if a.n_layers != b.n_layers or a.leaky_slope != b.leaky_slope:
        return False
    for la, lb in zip(a.layers, b.layers):
        if (la.kind, la.in_shape, la.out_shape, la.kernel, la.stride, la.padding) != \
           (lb.kind, lb.in_shape, lb.out_shape, lb.kernel, lb.stride, lb.padding):
            return False
    return True


def accuracy_delta(reference: ModelSpec, candidate: ModelSpec, batch: MiniBatch,
                   weight_seed: int = 0) -> float:
    """Candidate score minus reference score; positive means better.

    An identity replacement returns exactly 0. A degenerate candidate
    against a finite reference returns -inf (and +inf the other way
    around); two degenerate models compare equal at 0.
    """
    if not _same_topology(reference, candidate):
        raise ValueError("reference and candidate topologies differ")
    if reference.assignment == candidate.assignment:
        return 0.0
    ref = score_model(reference, batch, weight_seed)
    cand = score_model(candidate, batch, weight_seed)
    if ref.degenerate and cand.degenerate:
        return 0.0
    if cand.degenerate:
        return float("-inf")
    if ref.degenerate:
        return float("inf")
    return cand.value - ref.value
