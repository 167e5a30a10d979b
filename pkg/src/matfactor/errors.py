"""Exception types raised across the package.

Every failure mode that callers are expected to handle gets its own class so
the CLI can map it to a machine-readable error record.
"""

from __future__ import annotations


class MatfactorError(Exception):
    """Base class for all package-specific errors."""


class NeverObservedCell(MatfactorError):
    """A cell has no observed time point, so its mean is undefined."""

    def __init__(self, i: int, j: int):
        self.i = i
        self.j = j
        super().__init__(f"cell ({i}, {j}) is never observed; cannot demean it")


class InsufficientOverlap(MatfactorError):
    """A pair of rows/columns shares too few joint observations."""

    def __init__(self, axis: str, i: int, j: int, count: int):
        self.axis = axis
        self.i = i
        self.j = j
        self.count = count
        super().__init__(
            f"{axis} pair ({i}, {j}) has overlap count {count}; "
            "the re-weighted covariance entry is undefined"
        )


class NotSymmetric(MatfactorError):
    """Input matrix is not symmetric within tolerance."""


class RankDeficient(MatfactorError):
    """More eigenpairs requested than the matrix dimension allows."""


class DegenerateSpectrum(MatfactorError):
    """Leading eigenvalue is not strictly positive."""


class RankTooLarge(MatfactorError):
    """A forced factor rank exceeds the corresponding panel dimension."""


class DimensionMismatch(MatfactorError):
    """Array shapes are inconsistent with each other."""


class SingularEigenvalues(MatfactorError):
    """Eigenvalue diagonal contains entries at or below the floor."""


class RankDeficientInput(MatfactorError):
    """Matrix does not have full column rank."""


class SingularRotation(MatfactorError):
    """A rotation matrix is numerically singular."""


class TooFewReplications(MatfactorError):
    """Not enough replications for the requested summary."""


class InvalidPsi(MatfactorError):
    """Autoregressive coefficient outside the stationary region."""


class ParseError(MatfactorError):
    """A panel file line could not be parsed."""

    def __init__(self, line: int, message: str):
        self.line = line
        super().__init__(f"line {line}: {message}")


class DuplicateCell(MatfactorError):
    """The same (t, row, col) cell appears more than once in a panel file."""

    def __init__(self, t: int, row_id: str, col_id: str):
        self.t = t
        self.row_id = row_id
        self.col_id = col_id
        super().__init__(f"duplicate cell (t={t}, row={row_id!r}, col={col_id!r})")


class InconsistentVocabulary(MatfactorError):
    """Panel file identifiers do not match the declared orderings."""


class NonPositiveForLog(MatfactorError):
    """Log transform hit a non-positive observed value."""

    def __init__(self, t: int, i: int, j: int, value: float):
        self.t = t
        self.i = i
        self.j = j
        self.value = value
        super().__init__(
            f"observed value {value} at (t={t}, row={i}, col={j}) is not "
            "strictly positive; log transform undefined"
        )
