from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from actnas.activations import (
    CANDIDATE_ORDER,
    COLUMN_INDEX,
    DEFAULT_LEAKY_SLOPE,
    ActivationKind,
    activation_array,
    eval_activation,
    parse_activation,
    validate_leaky_slope,
)

finite_floats = st.floats(min_value=-1e6, max_value=1e6, allow_nan=False, allow_infinity=False)


def _sigmoid(x: float) -> float:
    if x >= 0:
        return 1.0 / (1.0 + math.exp(-x))
    e = math.exp(x)
    return e / (1.0 + e)


def test_candidate_order_is_fixed() -> None:
    names = [kind.value for kind in CANDIDATE_ORDER]
    assert names == ["relu", "silu", "hardswish", "relu6", "leakyrelu"]
    assert COLUMN_INDEX[ActivationKind.RELU] == 0
    assert COLUMN_INDEX[ActivationKind.LEAKYRELU] == 4


def test_parse_round_trip() -> None:
    for kind in CANDIDATE_ORDER:
        assert parse_activation(kind.value) is kind
        assert str(kind) == kind.value


def test_parse_rejects_unknown() -> None:
    with pytest.raises(ValueError):
        parse_activation("gelu")


def test_relu_point_values() -> None:
    assert eval_activation(ActivationKind.RELU, -2.0) == 0.0
    assert eval_activation(ActivationKind.RELU, 0.0) == 0.0
    assert eval_activation(ActivationKind.RELU, 3.5) == 3.5


def test_relu6_clips_both_sides() -> None:
    assert eval_activation(ActivationKind.RELU6, -1.0) == 0.0
    assert eval_activation(ActivationKind.RELU6, 4.0) == 4.0
    assert eval_activation(ActivationKind.RELU6, 7.0) == 6.0
    assert eval_activation(ActivationKind.RELU6, 6.0) == 6.0


def test_leakyrelu_point_values() -> None:
    assert eval_activation(ActivationKind.LEAKYRELU, -2.0, leaky_slope=0.1) == pytest.approx(-0.2)
    assert eval_activation(ActivationKind.LEAKYRELU, 2.0, leaky_slope=0.1) == 2.0
    assert eval_activation(ActivationKind.LEAKYRELU, -4.0, leaky_slope=0.25) == -1.0
    assert DEFAULT_LEAKY_SLOPE == 0.1


def test_silu_matches_reference_formula() -> None:
    for x in np.linspace(-8.0, 8.0, 97):
        expected = float(x) * _sigmoid(float(x))
        assert eval_activation(ActivationKind.SILU, float(x)) == pytest.approx(expected, rel=1e-12, abs=1e-15)
    assert eval_activation(ActivationKind.SILU, 0.0) == 0.0


def test_hardswish_matches_reference_formula() -> None:
    # piecewise: 0 below -3, identity above +3, x*(x+3)/6 between
    assert eval_activation(ActivationKind.HARDSWISH, -5.0) == 0.0
    assert eval_activation(ActivationKind.HARDSWISH, -3.0) == 0.0
    assert eval_activation(ActivationKind.HARDSWISH, 5.0) == 5.0
    assert eval_activation(ActivationKind.HARDSWISH, 3.0) == 3.0
    for x in np.linspace(-2.9, 2.9, 59):
        expected = float(x) * (float(x) + 3.0) / 6.0
        assert eval_activation(ActivationKind.HARDSWISH, float(x)) == pytest.approx(expected, rel=1e-12, abs=1e-15)


def test_hardswish_stays_close_to_silu() -> None:
    # the cheap surrogate should track the smooth curve within a small band
    xs = np.linspace(-6.0, 6.0, 2401)
    hs = activation_array(ActivationKind.HARDSWISH, xs)
    si = activation_array(ActivationKind.SILU, xs)
    assert float(np.max(np.abs(hs - si))) < 0.4


@given(x=finite_floats)
def test_sign_preservation(x: float) -> None:
    # every candidate maps positives to positives and non-positives to non-positives
    for kind in CANDIDATE_ORDER:
        y = eval_activation(kind, x, leaky_slope=0.1)
        if x > 0:
            assert y > 0
        else:
            assert y <= 0


@given(a=finite_floats, b=finite_floats)
def test_piecewise_linear_kinds_are_monotone(a: float, b: float) -> None:
    lo, hi = (a, b) if a <= b else (b, a)
    for kind in (ActivationKind.RELU, ActivationKind.RELU6, ActivationKind.LEAKYRELU):
        assert eval_activation(kind, lo, leaky_slope=0.1) <= eval_activation(kind, hi, leaky_slope=0.1)


def test_non_finite_input_rejected() -> None:
    for bad in (math.nan, math.inf, -math.inf):
        with pytest.raises(ValueError):
            eval_activation(ActivationKind.RELU, bad)


def test_leaky_slope_validation() -> None:
    validate_leaky_slope(0.5)
    for bad in (0.0, 1.0, -0.1, math.nan, math.inf):
        with pytest.raises(ValueError):
            validate_leaky_slope(bad)


def test_array_agrees_with_scalar() -> None:
    rng = np.random.default_rng(7)
    xs = rng.normal(scale=4.0, size=256)
    for kind in CANDIDATE_ORDER:
        out = activation_array(kind, xs, leaky_slope=0.3)
        expected = np.array([eval_activation(kind, float(x), leaky_slope=0.3) for x in xs])
        np.testing.assert_allclose(out, expected, rtol=1e-13, atol=1e-300)
