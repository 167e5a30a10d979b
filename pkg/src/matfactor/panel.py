"""Partially observed matrix time series and observation-pattern bookkeeping.

A panel is a length-T sequence of a x b matrices together with a binary mask
marking which cells were actually observed.  Unobserved cells may hold any
finite placeholder; downstream code only ever reads them through
:func:`zero_impute` or mask-filtered sums, so placeholders never leak.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, NeverObservedCell


@dataclass(frozen=True)
class MaskedSeries:
    """T x a x b value array plus a parallel 0/1 observation mask."""

    values: np.ndarray
    mask: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        mask = np.asarray(self.mask)
        if values.ndim != 3:
            raise DimensionMismatch(f"values must be 3-d (T, a, b), got shape {values.shape}")
        if values.shape != mask.shape:
            raise DimensionMismatch(
                f"values shape {values.shape} != mask shape {mask.shape}"
            )
        if any(s < 1 for s in values.shape):
            raise DimensionMismatch(f"all dimensions must be >= 1, got {values.shape}")
        if not np.isin(mask, (0, 1)).all():
            raise ValueError("mask entries must be exactly 0 or 1")
        mask = mask.astype(np.uint8)
        values = values.copy()
        values.flags.writeable = False
        mask.flags.writeable = False
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "mask", mask)

    @property
    def n_periods(self) -> int:
        return self.values.shape[0]

    @property
    def n_rows(self) -> int:
        return self.values.shape[1]

    @property
    def n_cols(self) -> int:
        return self.values.shape[2]

    @property
    def shape(self) -> tuple[int, int, int]:
        return self.values.shape

    def with_mask(self, mask: np.ndarray) -> "MaskedSeries":
        """Same values under a different observation mask."""
        return MaskedSeries(self.values, mask)


@dataclass(frozen=True)
class OverlapCounts:
    """Pairwise joint-observation counts for rows and for columns.

    ``row_overlap[i, j]`` counts the (t, m) pairs at which rows i and j are
    both observed; ``col_overlap`` is the column analogue.  Counts are kept
    as exact integers and only converted to floats at the division site.
    """

    row_overlap: np.ndarray
    col_overlap: np.ndarray

    def __post_init__(self):
        for name in ("row_overlap", "col_overlap"):
            arr = np.asarray(getattr(self, name), dtype=np.int64)
            if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
                raise DimensionMismatch(f"{name} must be square, got shape {arr.shape}")
            if (arr < 0).any():
                raise ValueError(f"{name} has negative entries")
            if (arr != arr.T).any():
                raise ValueError(f"{name} is not symmetric")
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)


def overlap_counts(series: MaskedSeries) -> OverlapCounts:
    """Count joint observations for every row pair and every column pair."""
    t_len, a, b = series.shape
    w = series.mask.astype(np.float64)
    # One BLAS product per axis; 0/1 sums up to a*b*T stay exact in float64.
    w_rows = w.transpose(1, 0, 2).reshape(a, t_len * b)
    w_cols = w.transpose(2, 0, 1).reshape(b, t_len * a)
    row = np.rint(w_rows @ w_rows.T).astype(np.int64)
    col = np.rint(w_cols @ w_cols.T).astype(np.int64)
    return OverlapCounts(row_overlap=row, col_overlap=col)


def demean(series: MaskedSeries) -> tuple[MaskedSeries, np.ndarray]:
    """Subtract per-cell means taken over each cell's observed time points.

    Returns the demeaned series (mask unchanged) and the a x b matrix of cell
    means.  Raises :class:`NeverObservedCell` if some cell has no observation
    at any time point.
    """
    counts = series.mask.sum(axis=0)
    if (counts == 0).any():
        i, j = np.argwhere(counts == 0)[0]
        raise NeverObservedCell(int(i), int(j))
    means = (series.values * series.mask).sum(axis=0) / counts
    centered = MaskedSeries(series.values - means[None, :, :], series.mask)
    return centered, means


def zero_impute(series: MaskedSeries) -> np.ndarray:
    """Dense T x a x b array with unobserved cells replaced by exact zeros."""
    return series.values * series.mask


def observed_fraction(series: MaskedSeries) -> float:
    """Share of cells that are observed, in [0, 1]."""
    return float(series.mask.sum()) / series.mask.size
