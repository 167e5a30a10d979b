"""Oracle-aware accuracy metrics for simulation studies.

When the ground truth is known (simulation only), the estimated loadings
approximate an invertible transform of the truth.  This module computes that
transform pair, the rotation-invariant subspace distance between estimated
and true loading spaces, per-period factor errors, and moment-based
normality diagnostics for the loading-error draws.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import stats

from .errors import (
    DimensionMismatch,
    RankDeficientInput,
    SingularEigenvalues,
    SingularRotation,
    TooFewReplications,
)
from .estimator import FactorFit


@dataclass(frozen=True)
class RotationPair:
    """Invertible transforms linking estimated loadings to the truth."""

    row_rotation: np.ndarray
    col_rotation: np.ndarray

    def __post_init__(self):
        for name in ("row_rotation", "col_rotation"):
            m = np.asarray(getattr(self, name), dtype=np.float64)
            if m.ndim != 2 or m.shape[0] != m.shape[1]:
                raise DimensionMismatch(f"{name} must be square, got {m.shape}")
            s = np.linalg.svd(m, compute_uv=False)
            if s[0] == 0 or s[-1] / s[0] < 1e-10:
                raise SingularRotation(
                    f"{name} reciprocal condition {0.0 if s[0] == 0 else s[-1] / s[0]:.3e} < 1e-10"
                )
            object.__setattr__(self, name, m)


def rotations(
    row_true: np.ndarray,
    col_true: np.ndarray,
    factors_true: np.ndarray,
    fit: FactorFit,
    floor: float = 0.0,
) -> RotationPair:
    """Rotation matrices relating ``fit`` to the given ground truth.

    ``factors_true`` stacks the per-period true factor matrices (T, k, r).
    Requires the fitted eigenvalue diagonals to be strictly above ``floor``.
    """
    t_len = factors_true.shape[0]
    a, b = row_true.shape[0], col_true.shape[0]
    for name, eig in (("row", fit.row_eigenvalues), ("col", fit.col_eigenvalues)):
        if eig.min() <= floor:
            raise SingularEigenvalues(
                f"{name} eigenvalue diagonal has entry {eig.min()} <= floor {floor}"
            )
    ctc = col_true.T @ col_true
    rtr = row_true.T @ row_true
    sum_fc = np.einsum("tkr,rs,tls->kl", factors_true, ctc, factors_true)
    sum_fr = np.einsum("tkr,kl,tls->rs", factors_true, rtr, factors_true)
    scale = float(a * b * t_len)
    row_rot = sum_fc @ row_true.T @ fit.row_loadings / scale / fit.row_eigenvalues
    col_rot = sum_fr @ col_true.T @ fit.col_loadings / scale / fit.col_eigenvalues
    return RotationPair(row_rotation=row_rot, col_rotation=col_rot)


def _orthonormal_basis(a: np.ndarray) -> np.ndarray:
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2:
        raise DimensionMismatch(f"expected a matrix, got shape {a.shape}")
    u, s, _ = np.linalg.svd(a, full_matrices=False)
    if s[0] == 0 or s[-1] <= max(a.shape) * np.finfo(np.float64).eps * s[0]:
        raise RankDeficientInput(f"matrix of shape {a.shape} is not full column rank")
    return u


def space_distance(a_hat: np.ndarray, a_true: np.ndarray, norm: str = "spectral") -> float:
    """Distance between the column spaces of two full-column-rank matrices.

    Norm of the difference of the orthogonal projectors onto the two spans;
    invariant to right-multiplication of either argument by any invertible
    matrix.  The spectral norm (default) lies in [0, 1] for equal ranks;
    ``norm="frobenius"`` is available for sensitivity checks.
    """
    u1 = _orthonormal_basis(a_hat)
    u2 = _orthonormal_basis(a_true)
    diff = u1 @ u1.T - u2 @ u2.T
    if norm == "spectral":
        return float(np.linalg.norm(diff, 2))
    if norm == "frobenius":
        return float(np.linalg.norm(diff, "fro"))
    raise ValueError(f"unknown norm {norm!r}")


def factor_error(
    fit: FactorFit, factors_true: np.ndarray, rot: RotationPair
) -> np.ndarray:
    """Per-period spectral norm of the rotated factor estimation error.

    Compares the fitted factors with ``inv(row_rotation) @ F_t @
    inv(col_rotation)'``; callers typically aggregate the returned values over
    periods and replications.
    """
    try:
        aligned = np.linalg.solve(rot.row_rotation, factors_true)
        aligned = np.linalg.solve(
            rot.col_rotation, aligned.transpose(0, 2, 1)
        ).transpose(0, 2, 1)
    except np.linalg.LinAlgError as exc:
        raise SingularRotation(str(exc)) from exc
    if aligned.shape != fit.factors.shape:
        raise DimensionMismatch(
            f"true factors shape {aligned.shape} != fitted {fit.factors.shape}"
        )
    return np.linalg.norm(fit.factors - aligned, ord=2, axis=(1, 2))


@dataclass(frozen=True)
class NormalitySummary:
    """Moment statistics and QQ data for loading-error draws.

    One column per coordinate of the first loading row; ``standardized`` holds
    the per-coordinate sorted standardized draws and ``theoretical_quantiles``
    the matching standard normal quantiles.
    """

    mean: np.ndarray
    sd: np.ndarray
    skewness: np.ndarray
    excess_kurtosis: np.ndarray
    standardized: np.ndarray
    theoretical_quantiles: np.ndarray

    @property
    def n_draws(self) -> int:
        return self.standardized.shape[0]


def normality_summary(draws: np.ndarray, min_reps: int = 30) -> NormalitySummary:
    """Moment diagnostics of replication draws (one row per replication)."""
    draws = np.asarray(draws, dtype=np.float64)
    if draws.ndim == 1:
        draws = draws[:, None]
    reps = draws.shape[0]
    if reps < min_reps:
        raise TooFewReplications(f"{reps} replications < required {min_reps}")
    mean = draws.mean(axis=0)
    sd = draws.std(axis=0, ddof=1)
    if (sd == 0).any():
        raise ValueError("degenerate draws: zero standard deviation")
    standardized = np.sort((draws - mean) / sd, axis=0)
    skew = stats.skew(draws, axis=0)
    kurt = stats.kurtosis(draws, axis=0)  # Fisher: excess kurtosis
    probs = (np.arange(1, reps + 1) - 0.5) / reps
    return NormalitySummary(
        mean=mean,
        sd=sd,
        skewness=np.atleast_1d(skew),
        excess_kurtosis=np.atleast_1d(kurt),
        standardized=standardized,
        theoretical_quantiles=stats.norm.ppf(probs),
    )
