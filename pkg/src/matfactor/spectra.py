"""Symmetric eigendecomposition, canonical orientation, and rank selection."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateSpectrum, NotSymmetric, RankDeficient

SYMMETRY_RTOL = 1e-10
DEFAULT_FLOOR_RATIO = 1e-12


@dataclass(frozen=True)
class EigenPairs:
    """Leading eigenvalues (descending) with unit-norm eigenvectors as columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.eigenvalues, dtype=np.float64)
        vecs = np.asarray(self.eigenvectors, dtype=np.float64)
        if vecs.ndim != 2 or vals.ndim != 1 or vecs.shape[1] != vals.shape[0]:
            raise ValueError(
                f"inconsistent shapes: eigenvalues {vals.shape}, eigenvectors {vecs.shape}"
            )
        vals.flags.writeable = False
        vecs.flags.writeable = False
        object.__setattr__(self, "eigenvalues", vals)
        object.__setattr__(self, "eigenvectors", vecs)


def canonical_sign(vectors: np.ndarray) -> np.ndarray:
    """Flip columns so the entry of largest magnitude is positive.

    Ties in magnitude are broken by the lowest row index (argmax picks the
    first maximum), making the orientation deterministic.
    """
    vectors = np.asarray(vectors, dtype=np.float64)
    pivot = np.argmax(np.abs(vectors), axis=0)
    signs = np.sign(vectors[pivot, np.arange(vectors.shape[1])])
    signs[signs == 0] = 1.0
    return vectors * signs


def top_eigenpairs(m: np.ndarray, q: int) -> EigenPairs:
    """The q largest eigenpairs of a symmetric matrix, canonically oriented."""
    m = np.asarray(m, dtype=np.float64)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"matrix must be square, got shape {m.shape}")
    n = m.shape[0]
    if q < 1:
        raise ValueError("q must be >= 1")
    if q > n:
        raise RankDeficient(f"requested {q} eigenpairs from a {n}x{n} matrix")
    scale = max(1.0, float(np.abs(m).max()))
    asym = float(np.abs(m - m.T).max())
    if asym > SYMMETRY_RTOL * scale:
        raise NotSymmetric(f"asymmetry {asym:.3e} exceeds {SYMMETRY_RTOL:.0e} * {scale:.3e}")
    sym = (m + m.T) / 2.0
    vals, vecs = np.linalg.eigh(sym)
    order = np.arange(n - 1, n - q - 1, -1)
    return EigenPairs(eigenvalues=vals[order], eigenvectors=canonical_sign(vecs[:, order]))


def select_rank(
    eigenvalues: np.ndarray,
    k_max: int,
    floor_ratio: float = DEFAULT_FLOOR_RATIO,
) -> int:
    """Eigen-ratio rank selection.

    Picks the smallest j in 1..k_max maximizing ``lam[j] / lam[j+1]``.
    Eigenvalues at or below ``floor_ratio * lam[1]`` are treated as
    numerically zero; the search truncates before the first such index, so
    ratios never divide by round-off (or by negative tail eigenvalues of an
    indefinite re-weighted covariance).
    """
    lam = np.asarray(eigenvalues, dtype=np.float64)
    if k_max < 1:
        raise ValueError("k_max must be >= 1")
    if lam.shape[0] < k_max + 1:
        raise ValueError(
            f"need at least k_max + 1 = {k_max + 1} eigenvalues, got {lam.shape[0]}"
        )
    if lam[0] <= 0:
        raise DegenerateSpectrum(f"leading eigenvalue {lam[0]} is not positive")
    floor = floor_ratio * lam[0]
    best_j, best_ratio = 1, -np.inf
    for j in range(1, k_max + 1):
        if lam[j] <= floor:
            break
        ratio = lam[j - 1] / lam[j]
        if ratio > best_ratio:
            best_j, best_ratio = j, ratio
    return best_j


def scaled_loading_from_eigenvectors(pairs: EigenPairs, dim_scale: int) -> np.ndarray:
    """Scale eigenvectors by sqrt(dim_scale) so (1/dim_scale) * L'L = I."""
    if dim_scale < 1:
        raise ValueError("dim_scale must be >= 1")
    return np.sqrt(float(dim_scale)) * pairs.eigenvectors
