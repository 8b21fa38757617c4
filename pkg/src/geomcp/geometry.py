"""Distance and angle mappings of a multivariate series.

Every time vector is compared with a fixed reference vector after each column
has been shifted so that its minimum sits on the reference entry. The norm of
the shifted vector relative to the reference reacts to mean changes; the angle
it makes with the reference reacts to changes in spread.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, DegenerateInputError, InputError

__all__ = [
    "MapKind",
    "MappedSeries",
    "TranslatedMatrix",
    "angle_bound",
    "angle_map",
    "as_series_matrix",
    "distance_map",
    "translate",
]


class MapKind(str, enum.Enum):
    DISTANCE = "distance"
    ANGLE = "angle"


@dataclass(frozen=True, eq=False)
class TranslatedMatrix:
    """Column-shifted copy of the data together with its reference vector."""

    values: np.ndarray
    reference: np.ndarray

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def p(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True, eq=False)
class MappedSeries:
    values: np.ndarray
    kind: MapKind

    def __len__(self) -> int:
        return len(self.values)


def as_series_matrix(values) -> np.ndarray:
    """Validate and return an ``(n, p)`` float64 matrix.

    A one-dimensional input is read as a single series (``p = 1``).
    """
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2:
        raise InputError(f"expected a 2-d matrix, got {arr.ndim} dimensions")
    n, p = arr.shape
    if n < 2 or p < 1:
        raise InputError(f"need at least 2 time points and 1 series, got {n}x{p}")
    if not np.all(np.isfinite(arr)):
        row, col = np.argwhere(~np.isfinite(arr))[0]
        raise InputError(f"non-finite value at row {row + 1}, column {col + 1}")
    return arr


def _reference(p: int, reference) -> np.ndarray:
    if reference is None:
        return np.ones(p)
    ref = np.asarray(reference, dtype=np.float64).ravel()
    if ref.shape[0] != p:
        raise ConfigurationError(
            f"reference vector has length {ref.shape[0]}, data has {p} series"
        )
    if np.any(ref == 0) or not np.all(np.isfinite(ref)):
        raise ConfigurationError("reference vector entries must be finite and nonzero")
    return ref


def translate(values, reference=None) -> TranslatedMatrix:
    """Shift each column so that its minimum equals the reference entry.

    ``y'[i, j] = y[i, j] - (min_i y[i, j] - reference[j])``. The reference
    defaults to the all-ones vector.
    """
    y = as_series_matrix(values)
    ref = _reference(y.shape[1], reference)
    col_min = y.min(axis=0)
    # y - min is exactly 0 at the minimising row, so the column minimum lands on ref exactly.
    shifted = y - col_min
    shifted += ref
    return TranslatedMatrix(values=shifted, reference=ref)


def distance_map(t: TranslatedMatrix) -> MappedSeries:
    """Euclidean distance of each translated row from the reference vector.

    Because ``y' - reference`` equals ``y - min(y)`` column-wise, the result
    does not depend on the reference at all.
    """
    diff = t.values - t.reference
    # np.sum reduces the contiguous axis pairwise, which keeps large-p sums accurate.
    d = np.sqrt(np.sum(diff * diff, axis=1))
    return MappedSeries(values=d, kind=MapKind.DISTANCE)


def angle_map(t: TranslatedMatrix) -> MappedSeries:
    """Principal angle (radians) between each translated row and the reference."""
    y = t.values
    row_norm = np.sqrt(np.sum(y * y, axis=1))
    if np.any(row_norm == 0):
        i = int(np.flatnonzero(row_norm == 0)[0])
        raise DegenerateInputError(f"row {i + 1} has zero norm; angle is undefined")
    ref_norm = np.sqrt(np.sum(t.reference * t.reference))
    cos = (y @ t.reference) / (row_norm * ref_norm)
    np.clip(cos, -1.0, 1.0, out=cos)
    return MappedSeries(values=np.arccos(cos), kind=MapKind.ANGLE)


def angle_bound(p: int) -> float:
    """Largest angle attainable when every coordinate is at least one."""
    return float(np.arccos(1.0 / np.sqrt(p)))
