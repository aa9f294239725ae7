"""Observation matrices and transforms between the three working scales.

A dataset lives on one of three scales:

* ``x`` -- raw observations, arbitrary continuous margins;
* ``u`` -- pseudo-observations in the open unit interval (copula scale);
* ``z`` -- probit-transformed pseudo-observations (standard-normal margins).

Datasets are immutable; every transform returns a new object.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy import stats

from .errors import ContractError, DataError, ParseError


class Scale(Enum):
    """Scale tag of an observation matrix."""

    X = "x"
    U = "u"
    Z = "z"


def _as_readonly(values: np.ndarray) -> np.ndarray:
    out = np.array(values, dtype=float, copy=True)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class Dataset:
    """An immutable n x d observation matrix tagged with its scale.

    Parameters
    ----------
    values : ndarray, shape (n, d)
        Observation matrix; one column per variable.
    scale : Scale
        Which of the three scales the values live on.
    column_names : tuple of str
        One identifier per column.
    """

    values: np.ndarray
    scale: Scale
    column_names: tuple = field(default=())

    def __post_init__(self):
        values = _as_readonly(np.atleast_2d(self.values))
        object.__setattr__(self, "values", values)
        if values.ndim != 2:
            raise DataError(f"expected a 2-d matrix, got ndim={values.ndim}")
        n, d = values.shape
        if n < 2 or d < 2:
            raise DataError(f"need at least 2 rows and 2 columns, got {n}x{d}")
        if not np.all(np.isfinite(values)):
            bad = np.argwhere(~np.isfinite(values))[0]
            raise DataError(
                f"non-finite entry at row {bad[0] + 1}, column {bad[1] + 1}"
            )
        names = tuple(self.column_names) or tuple(f"V{i + 1}" for i in range(d))
        if len(names) != d:
            raise DataError(f"{len(names)} column names for {d} columns")
        object.__setattr__(self, "column_names", names)
        if self.scale == Scale.U:
            if values.min() <= 0.0 or values.max() >= 1.0:
                raise DataError("u-scale entries must lie strictly inside (0, 1)")

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def d(self) -> int:
        return self.values.shape[1]

    def column(self, j: int) -> np.ndarray:
        """Return column ``j`` (0-based)."""
        return self.values[:, j]


def load_csv(path, has_header="auto") -> Dataset:
    """Load a rectangular numeric CSV file as an x-scale dataset.

    Parameters
    ----------
    path : str or Path
        File to read. Comma-separated, '.' decimal separator, UTF-8.
    has_header : bool or "auto"
        Whether the first line holds column names. ``"auto"`` sniffs by
        attempting to parse the first row as numbers.

    Returns
    -------
    Dataset
        On the x scale, with names from the header or generated ``V1..Vd``.
    """
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            rows = [row for row in csv.reader(fh) if row]
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    if not rows:
        raise DataError(f"{path} is empty")

    names = None
    if has_header == "auto":
        try:
            [float(cell) for cell in rows[0]]
            has_header = False
        except ValueError:
            has_header = True
    if has_header:
        names = tuple(cell.strip() for cell in rows[0])
        rows = rows[1:]
        if not rows:
            raise DataError(f"{path} has a header but no data rows")

    width = len(rows[0])
    data = np.empty((len(rows), width), dtype=float)
    for i, row in enumerate(rows):
        if len(row) != width:
            raise DataError(
                f"ragged row {i + 1 + bool(names)}: expected {width} cells, got {len(row)}"
            )
        for j, cell in enumerate(row):
            try:
                data[i, j] = float(cell)
            except ValueError:
                raise ParseError(
                    f"non-numeric cell {cell!r} at row {i + 1 + bool(names)}, "
                    f"column {j + 1}",
                    row=i + 1 + bool(names),
                    col=j + 1,
                ) from None
    return Dataset(data, Scale.X, names or ())


def to_pseudo_observations(ds: Dataset) -> Dataset:
    """Rank-transform each column to the open unit interval.

    Each column is replaced by ``rank / (n + 1)`` with average ranks for
    ties, so every output entry lies strictly inside (0, 1).
    """
    if ds.scale != Scale.X:
        raise ContractError(f"expected an x-scale dataset, got {ds.scale}")
    n = ds.n
    out = np.empty_like(ds.values)
    for j in range(ds.d):
        col = ds.values[:, j]
        if np.ptp(col) == 0.0:
            raise DataError(
                f"column {ds.column_names[j]!r} is constant; "
                "ranks are uninformative (degenerate margin)"
            )
        out[:, j] = stats.rankdata(col, method="average") / (n + 1)
    return Dataset(out, Scale.U, ds.column_names)


def to_z_scale(ds: Dataset) -> Dataset:
    """Apply the standard-normal quantile function entrywise."""
    if ds.scale != Scale.U:
        raise ContractError(f"expected a u-scale dataset, got {ds.scale}")
    # The Dataset invariant already guarantees the open interval, but guard
    # anyway so raw arrays routed here fail loudly rather than yield infs.
    if ds.values.min() <= 0.0 or ds.values.max() >= 1.0:
        raise DataError("entries at 0 or 1 map to infinite quantiles")
    return Dataset(stats.norm.ppf(ds.values), Scale.Z, ds.column_names)


def to_u_scale(ds: Dataset) -> Dataset:
    """Inverse of :func:`to_z_scale` (standard-normal CDF entrywise)."""
    if ds.scale != Scale.Z:
        raise ContractError(f"expected a z-scale dataset, got {ds.scale}")
    return Dataset(stats.norm.cdf(ds.values), Scale.U, ds.column_names)
