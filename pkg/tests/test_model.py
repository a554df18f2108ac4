from __future__ import annotations

import json
from pathlib import Path

import pytest

from actnas.activations import CANDIDATE_ORDER, ActivationKind
from actnas.model import (
    LayerKind,
    LayerSpec,
    ModelSpec,
    apply_assignment,
    builtin_model,
    builtin_model_names,
    enumerate_single_replacements,
    load_model,
    model_from_dict,
    model_to_dict,
    save_model,
    stacked_conv_model,
)


def _dense(index: int, n_in: int, n_out: int, activation: ActivationKind = ActivationKind.SILU) -> LayerSpec:
    return LayerSpec(
        index=index,
        name=f"fc{index}",
        kind=LayerKind.DENSE,
        in_shape=(n_in,),
        out_shape=(n_out,),
        activation=activation,
    )


def _conv(
    index: int,
    c_in: int,
    c_out: int,
    hw: int,
    kernel: int = 3,
    stride: int = 1,
    padding: int = 1,
    activation: ActivationKind = ActivationKind.SILU,
) -> LayerSpec:
    out_hw = (hw + 2 * padding - kernel) // stride + 1
    return LayerSpec(
        index=index,
        name=f"conv{index}",
        kind=LayerKind.CONV2D,
        in_shape=(c_in, hw, hw),
        out_shape=(c_out, out_hw, out_hw),
        kernel=kernel,
        stride=stride,
        padding=padding,
        activation=activation,
    )


@pytest.fixture
def small_model() -> ModelSpec:
    return ModelSpec(
        name="small",
        layers=(
            _conv(0, 3, 4, 8),
            _conv(1, 4, 4, 8, stride=2),
            _dense(2, 4 * 4 * 4, 10),
        ),
    )


def test_conv_output_shape_arithmetic_enforced() -> None:
    _conv(0, 3, 8, 16, kernel=3, stride=2, padding=1)  # (16+2-3)//2+1 = 8, fine
    with pytest.raises(ValueError):
        LayerSpec(
            index=0,
            name="bad",
            kind=LayerKind.CONV2D,
            in_shape=(3, 16, 16),
            out_shape=(8, 9, 9),
            kernel=3,
            stride=2,
            padding=1,
        )


def test_dense_rejects_conv_fields() -> None:
    with pytest.raises(ValueError):
        LayerSpec(
            index=0,
            name="bad",
            kind=LayerKind.DENSE,
            in_shape=(4,),
            out_shape=(2,),
            kernel=3,
        )


def test_conv_requires_3d_shapes() -> None:
    with pytest.raises(ValueError):
        LayerSpec(
            index=0,
            name="bad",
            kind=LayerKind.CONV2D,
            in_shape=(16, 16),
            out_shape=(8, 16, 16),
            kernel=3,
            stride=1,
            padding=1,
        )


def test_element_count() -> None:
    assert _dense(0, 7, 5).element_count == 5
    assert _conv(0, 3, 8, 16).element_count == 8 * 16 * 16


def test_model_requires_contiguous_indexes(small_model: ModelSpec) -> None:
    with pytest.raises(ValueError):
        ModelSpec(name="gap", layers=(small_model.layers[0], small_model.layers[2]))


def test_model_properties(small_model: ModelSpec) -> None:
    assert small_model.n_layers == 3
    assert small_model.input_shape == (3, 8, 8)
    assert small_model.assignment == (ActivationKind.SILU,) * 3
    assert small_model.element_counts == (4 * 8 * 8, 4 * 4 * 4, 10)
    assert small_model.total_elements == 256 + 64 + 10


def test_apply_identity_assignment_returns_equal_model(small_model: ModelSpec) -> None:
    same = apply_assignment(small_model, small_model.assignment)
    assert same == small_model


def test_apply_assignment_changes_only_activations(small_model: ModelSpec) -> None:
    target = (ActivationKind.RELU, ActivationKind.HARDSWISH, ActivationKind.RELU6)
    out = apply_assignment(small_model, target)
    assert out.assignment == target
    for before, after in zip(small_model.layers, out.layers):
        assert before.in_shape == after.in_shape
        assert before.out_shape == after.out_shape
        assert before.kind == after.kind
        assert before.name == after.name


def test_apply_assignment_length_mismatch(small_model: ModelSpec) -> None:
    with pytest.raises(ValueError):
        apply_assignment(small_model, (ActivationKind.RELU,))


def test_apply_assignment_rejects_non_kind(small_model: ModelSpec) -> None:
    with pytest.raises(ValueError):
        apply_assignment(small_model, ("relu", "silu", "relu"))  # type: ignore[arg-type]


def test_enumeration_count_small(small_model: ModelSpec) -> None:
    cands = enumerate_single_replacements(small_model)
    assert len(cands) == 3 * len(CANDIDATE_ORDER)


def test_enumeration_count_69_slots() -> None:
    model = stacked_conv_model(69)
    cands = enumerate_single_replacements(model)
    assert len(cands) == 345


def test_enumeration_is_layer_major_and_includes_identity(small_model: ModelSpec) -> None:
    cands = enumerate_single_replacements(small_model)
    k = len(CANDIDATE_ORDER)
    for li in range(small_model.n_layers):
        for ci, kind in enumerate(CANDIDATE_ORDER):
            cand = cands[li * k + ci]
            expected = list(small_model.assignment)
            expected[li] = kind
            assert cand.assignment == tuple(expected)


def test_enumeration_candidates_differ_in_at_most_one_slot(small_model: ModelSpec) -> None:
    ref = small_model.assignment
    for cand in enumerate_single_replacements(small_model):
        diff = sum(1 for a, b in zip(ref, cand.assignment) if a is not b)
        assert diff <= 1


def test_enumeration_rejects_empty_inputs(small_model: ModelSpec) -> None:
    with pytest.raises(ValueError):
        enumerate_single_replacements(ModelSpec(name="empty", layers=()))
    with pytest.raises(ValueError):
        enumerate_single_replacements(small_model, candidates=())


def test_json_round_trip(small_model: ModelSpec, tmp_path: Path) -> None:
    path = tmp_path / "model.json"
    save_model(small_model, path)
    loaded = load_model(path)
    assert loaded == small_model


def test_dense_serializes_null_conv_fields(small_model: ModelSpec) -> None:
    payload = model_to_dict(small_model)
    dense_row = payload["layers"][2]
    assert dense_row["kernel"] is None
    assert dense_row["stride"] is None
    assert dense_row["padding"] is None


def test_missing_field_raises_value_error(small_model: ModelSpec) -> None:
    payload = model_to_dict(small_model)
    del payload["layers"][0]["out_shape"]
    with pytest.raises(ValueError):
        model_from_dict(payload)


def test_load_rejects_bad_json(tmp_path: Path) -> None:
    path = tmp_path / "broken.json"
    path.write_text("{not json", encoding="utf-8")
    with pytest.raises((ValueError, json.JSONDecodeError)):
        load_model(path)


def test_builtin_model_loads() -> None:
    assert "tiny_cnn" in builtin_model_names()
    model = builtin_model("tiny_cnn")
    assert model.n_layers == 5
    # conv trunk feeding a dense head; shapes chain
    assert model.layers[0].kind is LayerKind.CONV2D
    assert model.layers[-1].kind is LayerKind.DENSE
    with pytest.raises(ValueError):
        builtin_model("resnet50")


def test_stacked_conv_model_shape_chain() -> None:
    model = stacked_conv_model(5)
    assert model.n_layers == 5
    assert model.layers[0].in_shape == (3, 16, 16)
    for prev, cur in zip(model.layers, model.layers[1:]):
        assert prev.out_shape == cur.in_shape
    assert all(layer.activation is ActivationKind.SILU for layer in model.layers)
