"""Row and column covariance matrices from partially observed panels.

Two estimators are provided.  The re-weighted estimator divides each entry of
the zero-imputed Gram accumulation by the corresponding pairwise overlap
count, undoing the attenuation caused by missing cells.  The direct estimator
("zero-imputation baseline") divides everything by a*b*T and is biased under
missingness; the two coincide exactly on fully observed panels.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InsufficientOverlap
from .panel import MaskedSeries, OverlapCounts, overlap_counts, zero_impute

REWEIGHTED = "reweighted"
DIRECT = "direct"


@dataclass(frozen=True)
class CovPair:
    """Symmetric a x a row covariance and b x b column covariance."""

    row_cov: np.ndarray
    col_cov: np.ndarray
    method: str

    def __post_init__(self):
        # Kill accumulation-order round-off before eigendecomposition.
        for name in ("row_cov", "col_cov"):
            m = np.asarray(getattr(self, name), dtype=np.float64)
            m = (m + m.T) / 2.0
            m.flags.writeable = False
            object.__setattr__(self, name, m)


def _gram_sums(series: MaskedSeries) -> tuple[np.ndarray, np.ndarray]:
    """sum_t Y~_t Y~_t' and sum_t Y~_t' Y~_t via one BLAS product each."""
    t_len, a, b = series.shape
    y = zero_impute(series)
    y_rows = y.transpose(1, 0, 2).reshape(a, t_len * b)
    y_cols = y.transpose(2, 0, 1).reshape(b, t_len * a)
    return y_rows @ y_rows.T, y_cols @ y_cols.T


def reweighted_covariances(
    series: MaskedSeries,
    overlaps: OverlapCounts | None = None,
    min_overlap: int = 1,
) -> CovPair:
    """Overlap-re-weighted covariance pair.

    Entry (i, j) of the row matrix is the average of products
    ``Y[t, i, m] * Y[t, j, m]`` over the (t, m) pairs where both rows are
    observed, scaled by 1/a (columns analogously with 1/b).  Every pairwise
    overlap must reach ``min_overlap``, otherwise the entry is undefined and
    :class:`InsufficientOverlap` is raised.
    """
    if min_overlap < 1:
        raise ValueError("min_overlap must be >= 1")
    if overlaps is None:
        overlaps = overlap_counts(series)
    _, a, b = series.shape
    for axis, counts in (("row", overlaps.row_overlap), ("col", overlaps.col_overlap)):
        if counts.min() < min_overlap:
            i, j = np.argwhere(counts < min_overlap)[0]
            raise InsufficientOverlap(axis, int(i), int(j), int(counts[i, j]))
    gram_r, gram_c = _gram_sums(series)
    m_r = gram_r / (a * overlaps.row_overlap.astype(np.float64))
    m_c = gram_c / (b * overlaps.col_overlap.astype(np.float64))
    return CovPair(row_cov=m_r, col_cov=m_c, method=REWEIGHTED)


def direct_covariances(series: MaskedSeries) -> CovPair:
    """Zero-imputation covariance pair: Gram sums divided by a*b*T."""
    t_len, a, b = series.shape
    gram_r, gram_c = _gram_sums(series)
    scale = float(a * b * t_len)
    return CovPair(row_cov=gram_r / scale, col_cov=gram_c / scale, method=DIRECT)
