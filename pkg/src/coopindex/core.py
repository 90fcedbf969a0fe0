"""Dense nonnegative matrices over labeled concept / data-set spaces.

Matrices are plain float64 ``numpy`` arrays laid out as ``|D| x |H|``:
rows index data sets, columns index concepts.  Labels and data-set sizes
travel separately in a :class:`SpaceIndex`, optionally bundled with the
entries in a :class:`LabeledMatrix`.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray

#: Default absolute tolerance on row / column sums.
STOCHASTIC_TOL = 1e-9


class CoopIndexError(ValueError):
    """Base class for every error raised by this package."""


class DimensionError(CoopIndexError):
    """Operands have incompatible shapes."""


class InvalidMatrixError(CoopIndexError):
    """Entries violate a type invariant (negative, non-finite, out of range)."""


@dataclass(frozen=True)
class SpaceIndex:
    """Labels for the concept space and the data-set space.

    ``dataset_sizes[i]`` is the cardinality of data set ``i`` (the number of
    examples it contains), used by the teaching-dimension quantities.
    """

    concept_labels: tuple[str, ...]
    dataset_labels: tuple[str, ...]
    dataset_sizes: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "concept_labels", tuple(str(c) for c in self.concept_labels))
        object.__setattr__(self, "dataset_labels", tuple(str(d) for d in self.dataset_labels))
        object.__setattr__(self, "dataset_sizes", tuple(int(s) for s in self.dataset_sizes))
        if not self.concept_labels or not self.dataset_labels:
            raise InvalidMatrixError("concept and data-set spaces must be nonempty")
        if len(set(self.concept_labels)) != len(self.concept_labels):
            raise InvalidMatrixError("concept labels must be unique")
        if len(set(self.dataset_labels)) != len(self.dataset_labels):
            raise InvalidMatrixError("data-set labels must be unique")
        if len(self.dataset_sizes) != len(self.dataset_labels):
            raise InvalidMatrixError(
                f"expected {len(self.dataset_labels)} data-set sizes, got {len(self.dataset_sizes)}"
            )
        if any(s < 0 for s in self.dataset_sizes):
            raise InvalidMatrixError("data-set sizes must be nonnegative")

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.dataset_labels), len(self.concept_labels)

    @classmethod
    def default(cls, n_datasets: int, n_concepts: int, sizes: Sequence[int] | None = None) -> SpaceIndex:
        """Index with generated labels ``d0, d1, ...`` and ``h0, h1, ...``."""
        if sizes is None:
            sizes = [1] * n_datasets
        return cls(
            tuple(f"h{j}" for j in range(n_concepts)),
            tuple(f"d{i}" for i in range(n_datasets)),
            tuple(sizes),
        )


@dataclass(frozen=True)
class LabeledMatrix:
    """A ``|D| x |H|`` nonnegative matrix with an optional :class:`SpaceIndex`."""

    entries: NDArray[np.float64]
    index: SpaceIndex | None = None

    def __post_init__(self):
        entries = as_nonnegative(self.entries)
        entries.setflags(write=False)
        object.__setattr__(self, "entries", entries)
        if self.index is not None and self.index.shape != entries.shape:
            raise DimensionError(
                f"index describes a {self.index.shape} matrix, entries are {entries.shape}"
            )

    @property
    def shape(self) -> tuple[int, int]:
        return self.entries.shape


def as_nonnegative(M: ArrayLike) -> NDArray[np.float64]:
    """Return ``M`` as a fresh 2-D float64 array after checking it is finite and >= 0."""
    A = np.array(M, dtype=np.float64)
    if A.ndim != 2:
        raise InvalidMatrixError(f"expected a 2-D matrix, got ndim={A.ndim}")
    if A.shape[0] == 0 or A.shape[1] == 0:
        raise InvalidMatrixError("matrix must have at least one row and one column")
    if not np.all(np.isfinite(A)):
        raise InvalidMatrixError("matrix has non-finite entries")
    if np.any(A < 0):
        raise InvalidMatrixError("matrix has negative entries")
    return A


def as_square(M: ArrayLike) -> NDArray[np.float64]:
    A = as_nonnegative(M)
    if A.shape[0] != A.shape[1]:
        raise DimensionError(f"expected a square matrix, got {A.shape}")
    return A


def _safe_divide(A: NDArray[np.float64], sums: NDArray[np.float64], length: int) -> NDArray[np.float64]:
    # zero lines stay zero; lines already summing to 1 up to rounding are left
    # untouched so normalizing twice is a no-op
    done = np.abs(sums - 1.0) <= 4 * length * np.finfo(np.float64).eps
    sums = np.where(done, 1.0, sums)
    out = np.zeros_like(A)
    np.divide(A, sums, out=out, where=sums > 0)
    return out


def row_normalize(M: ArrayLike) -> NDArray[np.float64]:
    """Scale every nonzero row to sum to one; zero rows are kept as zero rows.

    >>> row_normalize([[1, 1], [0, 1]])
    array([[0.5, 0.5],
           [0. , 1. ]])
    """
    A = as_nonnegative(M)
    return _safe_divide(A, A.sum(axis=1, keepdims=True), A.shape[1])


def column_normalize(M: ArrayLike) -> NDArray[np.float64]:
    """Scale every nonzero column to sum to one; zero columns are kept."""
    A = as_nonnegative(M)
    return _safe_divide(A, A.sum(axis=0, keepdims=True), A.shape[0])


def _lines_ok(sums: NDArray[np.float64], tol: float) -> bool:
    return bool(np.all((np.abs(sums - 1.0) <= tol) | (sums == 0.0)))


def is_row_stochastic(M: ArrayLike, tol: float = STOCHASTIC_TOL) -> bool:
    """True if every row sums to 1 within ``tol`` or is entirely zero."""
    A = as_nonnegative(M)
    return bool(np.all(A <= 1.0 + tol)) and _lines_ok(A.sum(axis=1), tol)


def is_column_stochastic(M: ArrayLike, tol: float = STOCHASTIC_TOL) -> bool:
    """True if every column sums to 1 within ``tol`` or is entirely zero."""
    A = as_nonnegative(M)
    return bool(np.all(A <= 1.0 + tol)) and _lines_ok(A.sum(axis=0), tol)


def is_doubly_stochastic(M: ArrayLike, tol: float = STOCHASTIC_TOL) -> bool:
    """True iff ``M`` is square and every row and column sum is within ``tol`` of 1."""
    A = as_square(M)
    return bool(
        np.all(np.abs(A.sum(axis=1) - 1.0) <= tol) and np.all(np.abs(A.sum(axis=0) - 1.0) <= tol)
    )


def check_row_stochastic(L: ArrayLike, tol: float = STOCHASTIC_TOL) -> NDArray[np.float64]:
    A = as_nonnegative(L)
    if not is_row_stochastic(A, tol):
        raise InvalidMatrixError("learner matrix is not row-stochastic")
    return A


def check_column_stochastic(T: ArrayLike, tol: float = STOCHASTIC_TOL) -> NDArray[np.float64]:
    A = as_nonnegative(T)
    if not is_column_stochastic(A, tol):
        raise InvalidMatrixError("teacher matrix is not column-stochastic")
    return A


def _check_permutation(perm: Sequence[int], n: int, what: str) -> NDArray[np.intp]:
    p = np.asarray(perm, dtype=np.intp)
    if p.shape != (n,) or sorted(p.tolist()) != list(range(n)):
        raise DimensionError(f"{what} is not a permutation of 0..{n - 1}: {list(perm)}")
    return p


def joint_permute(M: ArrayLike, row_perm: Sequence[int], col_perm: Sequence[int]) -> NDArray[np.float64]:
    """Return ``out[i, j] = M[row_perm[i], col_perm[j]]``."""
    A = as_nonnegative(M)
    r = _check_permutation(row_perm, A.shape[0], "row_perm")
    c = _check_permutation(col_perm, A.shape[1], "col_perm")
    return A[np.ix_(r, c)]
