"""End-to-end factor model fit: loadings, factors, signal, and imputation.

The estimator is a two-step procedure.  Step one runs PCA on the row and
column covariance matrices (re-weighted by default) and scales the leading
eigenvectors so the loadings satisfy the normalisation
``loadings' loadings / dim = I``.  Step two projects the zero-imputed data
through both loading matrices to recover the factor matrices and the
low-rank signal.  Loadings and factors are identified only up to invertible
transforms, so accuracy metrics must compare column spaces (see
:mod:`matfactor.evaluation`), never raw coefficients.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .covariance import (
    DIRECT,
    REWEIGHTED,
    CovPair,
    direct_covariances,
    reweighted_covariances,
)
from .errors import DimensionMismatch, RankTooLarge
from .panel import MaskedSeries, demean as _demean, overlap_counts, zero_impute
from .spectra import (
    DEFAULT_FLOOR_RATIO,
    EigenPairs,
    scaled_loading_from_eigenvectors,
    select_rank,
    top_eigenpairs,
)


@dataclass(frozen=True)
class FactorFit:
    """Everything produced by one fit.

    ``row_loadings`` is a x k, ``col_loadings`` is b x r, ``factors`` stacks
    the per-period k x r factor matrices, ``signal`` the per-period a x b
    low-rank reconstructions.  ``cell_means`` holds the demeaning offsets
    when demeaning was applied (None otherwise) so imputation can restore
    the original scale.
    """

    row_loadings: np.ndarray
    col_loadings: np.ndarray
    factors: np.ndarray
    signal: np.ndarray
    row_eigenvalues: np.ndarray
    col_eigenvalues: np.ndarray
    rank_rows: int
    rank_cols: int
    method: str
    cell_means: np.ndarray | None = None

    @property
    def demeaned(self) -> bool:
        return self.cell_means is not None


def default_k_max(dim: int) -> int:
    """Search bound for rank selection: ceil(dim / 2), capped at dim - 1."""
    return max(1, min(math.ceil(dim / 2), dim - 1))


def _resolve_k_max(k_max, a: int, b: int) -> tuple[int, int]:
    if k_max is None:
        return default_k_max(a), default_k_max(b)
    if isinstance(k_max, int):
        return k_max, k_max
    kr, kc = k_max
    return int(kr), int(kc)


PLAIN = "plain"
LEAST_SQUARES = "ls"


def estimate_factors(
    row_loadings: np.ndarray,
    col_loadings: np.ndarray,
    series: MaskedSeries,
    factor_method: str = LEAST_SQUARES,
) -> np.ndarray:
    """Per-period factor matrices given the loadings.

    ``"ls"`` (default) solves, for each period, the least-squares problem
    over the observed cells only; with complete data and Eq.-normalised
    loadings this reduces exactly to the plain projection.  ``"plain"``
    computes ``loadings' @ zero-imputed data @ loadings / (a*b)`` literally,
    which attenuates the factors by roughly the observed fraction when cells
    are missing (kept for baseline comparisons).
    """
    _, a, b = series.shape
    if row_loadings.shape[0] != a or col_loadings.shape[0] != b:
        raise DimensionMismatch(
            f"loadings {row_loadings.shape}/{col_loadings.shape} do not match "
            f"panel dimensions ({a}, {b})"
        )
    y = zero_impute(series)
    projected = row_loadings.T @ y @ col_loadings
    if factor_method == PLAIN:
        return projected / (a * b)
    if factor_method != LEAST_SQUARES:
        raise ValueError(f"unknown factor method {factor_method!r}")
    if series.mask.all():
        # Complete panel: the normal matrix is (C'C) x (R'R), no solve needed
        # when loadings are normalised, but solve anyway for exactness with
        # arbitrary loadings.
        gram = np.kron(row_loadings.T @ row_loadings, col_loadings.T @ col_loadings)
        t_len, k, r = projected.shape[0], row_loadings.shape[1], col_loadings.shape[1]
        flat = np.linalg.solve(gram, projected.reshape(t_len, k * r).T).T
        return flat.reshape(t_len, k, r)
    return _masked_least_squares(row_loadings, col_loadings, series, projected)


def _masked_least_squares(
    row_loadings: np.ndarray,
    col_loadings: np.ndarray,
    series: MaskedSeries,
    projected: np.ndarray,
) -> np.ndarray:
    """Solve the per-period normal equations restricted to observed cells."""
    t_len = series.n_periods
    k, r = row_loadings.shape[1], col_loadings.shape[1]
    w = series.mask.astype(np.float64)
    # Normal matrix entries: sum_im W[t,i,m] * (r_i r_i') x (c_m c_m').
    col_grams = np.einsum("tim,mp,mq->tipq", w, col_loadings, col_loadings)
    normal = np.einsum("ik,il,tipq->tkplq", row_loadings, row_loadings, col_grams)
    normal = normal.reshape(t_len, k * r, k * r)
    rhs = projected.reshape(t_len, k * r)
    try:
        flat = np.linalg.solve(normal, rhs[..., None])[..., 0]
    except np.linalg.LinAlgError:
        # Some periods are too sparse to identify every factor entry; the
        # pseudo-inverse yields the minimum-norm solution (zero when nothing
        # at all is observed).
        flat = np.stack(
            [np.linalg.lstsq(normal[t], rhs[t], rcond=None)[0] for t in range(t_len)]
        )
    return flat.reshape(t_len, k, r)


def estimate_signal(
    row_loadings: np.ndarray,
    col_loadings: np.ndarray,
    series: MaskedSeries,
    factor_method: str = LEAST_SQUARES,
) -> np.ndarray:
    """Per-period low-rank signal reconstruction."""
    factors = estimate_factors(row_loadings, col_loadings, series, factor_method)
    return row_loadings @ factors @ col_loadings.T


def fit(
    series: MaskedSeries,
    ranks: tuple[int, int] | None = None,
    *,
    demean: bool = False,
    method: str = REWEIGHTED,
    factor_method: str = LEAST_SQUARES,
    k_max: int | tuple[int, int] | None = None,
    min_overlap: int = 1,
    floor_ratio: float = DEFAULT_FLOOR_RATIO,
) -> FactorFit:
    """Fit the factor model to a partially observed panel.

    When ``ranks`` is None both ranks are chosen by the eigen-ratio rule with
    search bound ``k_max`` (default ceil(dim/2) per axis); otherwise the given
    (row rank, column rank) pair is used as-is.
    """
    if method not in (REWEIGHTED, DIRECT):
        raise ValueError(f"unknown method {method!r}")
    means = None
    work = series
    if demean:
        work, means = _demean(series)
    cov = _covariances(work, method, min_overlap)
    return fit_from_covariances(
        work,
        cov,
        ranks,
        factor_method=factor_method,
        k_max=k_max,
        floor_ratio=floor_ratio,
        cell_means=means,
    )


def fit_from_covariances(
    series: MaskedSeries,
    cov: CovPair,
    ranks: tuple[int, int] | None = None,
    *,
    factor_method: str = LEAST_SQUARES,
    k_max: int | tuple[int, int] | None = None,
    floor_ratio: float = DEFAULT_FLOOR_RATIO,
    cell_means: np.ndarray | None = None,
) -> FactorFit:
    """Fit from precomputed covariances (covariance reuse for sweeps).

    ``series`` must be the panel the covariances were built from, already
    demeaned when demeaning is wanted (pass the offsets as ``cell_means``).
    """
    _, a, b = series.shape
    if ranks is not None:
        k, r = int(ranks[0]), int(ranks[1])
        if not (1 <= k <= a) or not (1 <= r <= b):
            raise RankTooLarge(f"forced ranks ({k}, {r}) outside 1..({a}, {b})")
        pairs_r = top_eigenpairs(cov.row_cov, k)
        pairs_c = top_eigenpairs(cov.col_cov, r)
    else:
        k_max_r, k_max_c = _resolve_k_max(k_max, a, b)
        pairs_r, k = _auto_rank(cov.row_cov, k_max_r, floor_ratio)
        pairs_c, r = _auto_rank(cov.col_cov, k_max_c, floor_ratio)

    row_loadings = scaled_loading_from_eigenvectors(
        EigenPairs(pairs_r.eigenvalues[:k], pairs_r.eigenvectors[:, :k]), a
    )
    col_loadings = scaled_loading_from_eigenvectors(
        EigenPairs(pairs_c.eigenvalues[:r], pairs_c.eigenvectors[:, :r]), b
    )
    factors = estimate_factors(row_loadings, col_loadings, series, factor_method)
    signal = row_loadings @ factors @ col_loadings.T
    return FactorFit(
        row_loadings=row_loadings,
        col_loadings=col_loadings,
        factors=factors,
        signal=signal,
        row_eigenvalues=pairs_r.eigenvalues[:k].copy(),
        col_eigenvalues=pairs_c.eigenvalues[:r].copy(),
        rank_rows=k,
        rank_cols=r,
        method=cov.method,
        cell_means=cell_means,
    )


def rank_pair(
    cov: CovPair,
    k_max: int | tuple[int, int] | None = None,
    floor_ratio: float = DEFAULT_FLOOR_RATIO,
) -> tuple[int, int]:
    """Eigen-ratio-selected (row rank, column rank) for a covariance pair."""
    a, b = cov.row_cov.shape[0], cov.col_cov.shape[0]
    k_max_r, k_max_c = _resolve_k_max(k_max, a, b)
    _, k = _auto_rank(cov.row_cov, k_max_r, floor_ratio)
    _, r = _auto_rank(cov.col_cov, k_max_c, floor_ratio)
    return k, r


def _covariances(series: MaskedSeries, method: str, min_overlap: int) -> CovPair:
    if method == REWEIGHTED:
        return reweighted_covariances(series, overlap_counts(series), min_overlap)
    return direct_covariances(series)


def _auto_rank(
    cov: np.ndarray, k_max: int, floor_ratio: float
) -> tuple[EigenPairs, int]:
    n = cov.shape[0]
    if n == 1:
        return top_eigenpairs(cov, 1), 1
    k_max = max(1, min(k_max, n - 1))
    pairs = top_eigenpairs(cov, k_max + 1)
    return pairs, select_rank(pairs.eigenvalues, k_max, floor_ratio)


def impute(fit_result: FactorFit, series: MaskedSeries) -> np.ndarray:
    """Complete the panel: observed values kept, missing cells filled.

    Missing cells take the fitted signal; when the fit demeaned the data the
    stored cell means are added back so imputed values live on the original
    scale.
    """
    if fit_result.signal.shape != series.shape:
        raise DimensionMismatch(
            f"fit signal shape {fit_result.signal.shape} != series shape {series.shape}"
        )
    filled = fit_result.signal
    if fit_result.cell_means is not None:
        filled = filled + fit_result.cell_means[None, :, :]
    return np.where(series.mask.astype(bool), series.values, filled)


def varimax(
    loading: np.ndarray,
    max_iter: int = 500,
    tol: float = 1e-12,
    normalize: bool = False,
) -> tuple[np.ndarray, np.ndarray]:
    """Orthogonal varimax rotation of a loading matrix.

    Maximises the variance of squared loadings by the SVD-based fixed-point
    iteration; the criterion is non-decreasing across iterations.  Kaiser row
    normalisation is off by default.  Returns (rotated loadings, rotation);
    ``rotated = loading @ rotation``.
    """
    a = np.asarray(loading, dtype=np.float64)
    if a.ndim != 2:
        raise ValueError(f"loading must be 2-d, got shape {a.shape}")
    n, q = a.shape
    if q == 1:
        return a.copy(), np.eye(1)
    weights = None
    if normalize:
        weights = np.sqrt((a**2).sum(axis=1))
        weights[weights == 0] = 1.0
        a = a / weights[:, None]
    rotation = np.eye(q)
    criterion = 0.0
    for _ in range(max_iter):
        basis = a @ rotation
        grad = a.T @ (basis**3 - basis @ np.diag((basis**2).sum(axis=0)) / n)
        u, s, vt = np.linalg.svd(grad)
        rotation = u @ vt
        previous, criterion = criterion, s.sum()
        if criterion - previous < tol * max(criterion, 1.0):
            break
    rotated = a @ rotation
    if normalize:
        rotated = rotated * weights[:, None]
    return rotated, rotation
