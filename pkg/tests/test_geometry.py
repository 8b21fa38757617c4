import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from geomcp.errors import ConfigurationError, DegenerateInputError, InputError
from geomcp.geometry import (
    MapKind,
    TranslatedMatrix,
    angle_bound,
    angle_map,
    as_series_matrix,
    distance_map,
    translate,
)

finite = st.floats(-1e6, 1e6, allow_nan=False, allow_infinity=False)
matrices = st.tuples(st.integers(2, 12), st.integers(1, 8)).flatmap(
    lambda shape: arrays(np.float64, shape, elements=finite)
)


def _rows(rows):
    rows = np.asarray(rows, dtype=float)
    return TranslatedMatrix(rows, np.ones(rows.shape[1]))


def test_translate_columns():
    out = translate(np.array([[3.0, -2.0], [5.0, 0.0]])).values
    np.testing.assert_array_equal(out, [[1, 1], [3, 3]])


def test_translate_constant_column():
    np.testing.assert_array_equal(translate(np.full((4, 1), 7.5)).values.ravel(), np.ones(4))


def test_translate_three_by_two():
    out = translate(np.array([[0, 10], [2, 10], [1, 13]], dtype=float)).values
    np.testing.assert_array_equal(out, [[1, 1], [3, 1], [2, 4]])


def test_translate_custom_reference():
    out = translate(np.array([[0.0, 5.0], [1.0, 6.0]]), reference=[2.0, -1.0]).values
    np.testing.assert_array_equal(out, [[2, -1], [3, 0]])


def test_reference_errors():
    with pytest.raises(ConfigurationError):
        translate(np.zeros((3, 2)), reference=[1.0, 1.0, 1.0])
    with pytest.raises(ConfigurationError):
        translate(np.zeros((3, 2)), reference=[1.0, 0.0])


def test_input_validation():
    with pytest.raises(InputError, match="row 2, column 1"):
        as_series_matrix([[1.0], [np.nan]])
    with pytest.raises(InputError):
        as_series_matrix([1.0])
    assert as_series_matrix([1.0, 2.0]).shape == (2, 1)


@pytest.mark.parametrize(
    "row, expected",
    [([1, 1, 1, 1], 0.0), ([2, 2, 2, 2], 2.0), ([1, 2, 4], math.sqrt(10))],
)
def test_distance_examples(row, expected):
    d = distance_map(_rows([row]))
    assert d.kind is MapKind.DISTANCE
    assert d.values[0] == pytest.approx(expected, abs=1e-12)


@pytest.mark.parametrize(
    "row, expected",
    [
        ([3, 3, 3], 0.0),
        ([1, 3], math.atan(3) - math.pi / 4),
        ([1, 1, 2], math.acos(4 / (math.sqrt(6) * math.sqrt(3)))),
    ],
)
def test_angle_examples(row, expected):
    a = angle_map(_rows([row]))
    assert a.kind is MapKind.ANGLE
    assert a.values[0] == pytest.approx(expected, abs=1e-7)


def test_angle_zero_row():
    with pytest.raises(DegenerateInputError):
        angle_map(_rows([[0.0, 0.0], [1.0, 2.0]]))


def test_angle_collinear_rounding_stays_finite():
    a = angle_map(_rows([[1 / 3] * 7, [0.1] * 7])).values
    assert np.all(np.isfinite(a)) and np.all(a >= 0)


def test_angle_bound_exceeds_quarter_pi_beyond_two_series():
    assert angle_bound(2) == pytest.approx(math.pi / 4)
    y = _rows([[1.0, 1.0, 1e6]])
    assert angle_map(y).values[0] > math.pi / 4


@given(matrices)
def test_column_minimum_is_one(y):
    out = translate(y).values
    np.testing.assert_array_equal(out.min(axis=0), np.ones(y.shape[1]))


@given(matrices, arrays(np.float64, 8, elements=st.floats(-1e3, 1e3)))
def test_distance_shift_invariant(y, shift):
    shifted = y + shift[: y.shape[1]]
    a = distance_map(translate(y)).values
    b = distance_map(translate(shifted)).values
    np.testing.assert_allclose(a, b, rtol=1e-9, atol=1e-6)


@given(matrices)
def test_distance_reference_free(y):
    a = distance_map(translate(y)).values
    b = distance_map(translate(y, reference=np.full(y.shape[1], 3.5))).values
    np.testing.assert_allclose(a, b, rtol=1e-12, atol=1e-9)


@given(matrices)
def test_angle_range(y):
    a = angle_map(translate(y)).values
    assert np.all(a >= 0)
    assert np.all(a <= angle_bound(y.shape[1]) + 1e-12)


@given(matrices, st.randoms(use_true_random=False))
def test_permutation_equivariance(y, rnd):
    cols = list(range(y.shape[1]))
    rows = list(range(y.shape[0]))
    rnd.shuffle(cols)
    rnd.shuffle(rows)
    t = translate(y)
    tc = translate(y[:, cols])
    np.testing.assert_allclose(distance_map(tc).values, distance_map(t).values, rtol=1e-12, atol=1e-9)
    np.testing.assert_allclose(angle_map(tc).values, angle_map(t).values, atol=1e-7)
    tr = translate(y[rows])
    np.testing.assert_array_equal(distance_map(tr).values, distance_map(t).values[rows])
    np.testing.assert_array_equal(angle_map(tr).values, angle_map(t).values[rows])


def test_large_p_sum_accuracy():
    t = _rows(np.full((1, 1_000_000), 1.1))
    expected = math.sqrt(1_000_000) * 0.1
    assert distance_map(t).values[0] == pytest.approx(expected, rel=1e-12)
