"""CSV ingestion, MAD scaling and small serialisation helpers."""

from __future__ import annotations

import csv
import json
import math
import warnings
from pathlib import Path

import numpy as np

from .errors import ConfigurationError, InputError
from .geometry import as_series_matrix

__all__ = [
    "MAD_CONSISTENCY",
    "load_csv",
    "read_key_value_file",
    "save_csv",
    "scale_mad",
    "write_json",
    "write_rows",
]

MAD_CONSISTENCY = 1.4826


def _is_number(token: str) -> bool:
    try:
        float(token)
    except ValueError:
        return False
    return True


def load_csv(path) -> np.ndarray:
    """Read a rectangular numeric CSV (rows are time points, columns series).

    A first row holding any non-numeric token is taken as a header and skipped.
    """
    path = Path(path)
    if not path.is_file():
        raise InputError(f"no such file: {path}")
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]
    if not rows:
        raise InputError(f"{path} is empty")
    first_line = 1
    if not all(_is_number(c.strip()) for c in rows[0]):
        rows = rows[1:]
        first_line = 2
    if not rows:
        raise InputError(f"{path} has a header but no data")
    width = len(rows[0])
    data = np.empty((len(rows), width))
    for i, row in enumerate(rows):
        line = i + first_line
        if len(row) != width:
            raise InputError(f"row {line} has {len(row)} fields, expected {width}")
        for j, cell in enumerate(row):
            try:
                value = float(cell)
            except ValueError:
                raise InputError(f"non-numeric value {cell!r} at row {line}, column {j + 1}") from None
            if not math.isfinite(value):
                raise InputError(f"non-finite value at row {line}, column {j + 1}")
            data[i, j] = value
    return as_series_matrix(data)


def save_csv(values, path, header: list[str] | None = None) -> None:
    """Write a matrix so that :func:`load_csv` reads it back bit for bit."""
    values = np.asarray(values, dtype=np.float64)
    if values.ndim == 1:
        values = values[:, None]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        if header:
            writer.writerow(header)
        for row in values:
            writer.writerow([repr(float(v)) for v in row])


def scale_mad(values) -> np.ndarray:
    """Divide every column by its Normal-consistent median absolute deviation.

    Columns with zero MAD are left alone and reported with a warning.
    """
    y = as_series_matrix(values)
    med = np.median(y, axis=0)
    mad = MAD_CONSISTENCY * np.median(np.abs(y - med), axis=0)
    flat = mad == 0
    if np.any(flat):
        cols = ", ".join(str(j + 1) for j in np.flatnonzero(flat)[:10])
        warnings.warn(f"zero MAD in column(s) {cols}; left unscaled", stacklevel=2)
    return y / np.where(flat, 1.0, mad)


def write_rows(path, header: list[str], rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def write_json(path, payload) -> None:
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, default=_json_default)
        fh.write("\n")


def _json_default(obj):
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not JSON serialisable: {type(obj).__name__}")


def read_key_value_file(path) -> dict[str, str]:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    path = Path(path)
    if not path.is_file():
        raise InputError(f"no such file: {path}")
    out = {}
    for lineno, raw in enumerate(path.read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigurationError(f"{path}:{lineno}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        out[key.lower()] = value
    return out
