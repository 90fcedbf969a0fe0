"""Zero-pattern combinatorics of square nonnegative matrices.

A *positive diagonal* of an ``n x n`` matrix is a permutation ``sigma`` with
``M[i, sigma[i]] > 0`` for every ``i``, i.e. a perfect matching in the
bipartite graph of positive entries.  Only the support of ``M`` matters
here; values are never compared beyond ``> 0``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .core import CoopIndexError, as_square, joint_permute

PERMANENT_CAP = 20


class IntractableError(CoopIndexError):
    """Matrix too large for exact diagonal counting."""


def support(M: ArrayLike) -> NDArray[np.bool_]:
    return as_square(M) > 0


def _adjacency(S: NDArray[np.bool_]) -> list[list[int]]:
    return [np.flatnonzero(row).tolist() for row in S]


def perfect_matching(M: ArrayLike) -> list[int] | None:
    """A positive diagonal as ``match[row] = column``, or ``None`` if none exists.

    Kuhn's augmenting-path algorithm on the support graph, O(n * nnz).
    """
    S = support(M)
    return _matching(S)


def _matching(S: NDArray[np.bool_]) -> list[int] | None:
    n = S.shape[0]
    adj = _adjacency(S)
    if any(not a for a in adj) or not S.any(axis=0).all():
        return None
    col_owner = [-1] * n

    def augment(r: int, seen: list[bool]) -> bool:
        for c in adj[r]:
            if not seen[c]:
                seen[c] = True
                if col_owner[c] < 0 or augment(col_owner[c], seen):
                    col_owner[c] = r
                    return True
        return False

    for r in range(n):
        if not augment(r, [False] * n):
            return None
    match = [0] * n
    for c, r in enumerate(col_owner):
        match[r] = c
    return match


def has_positive_diagonal(M: ArrayLike) -> bool:
    """True iff the support of ``M`` has a perfect matching."""
    return _matching(support(M)) is not None


def count_positive_diagonals(M: ArrayLike, cap: int = PERMANENT_CAP) -> int:
    """Number of positive diagonals: the permanent of the 0/1 support.

    Ryser's inclusion-exclusion formula, walked in Gray-code order so each
    subset update touches a single column: O(2^n * n) integer operations.
    """
    S = support(M).astype(np.int64)
    n = S.shape[0]
    if n > cap:
        raise IntractableError(f"permanent of a {n}x{n} pattern exceeds the cap n <= {cap}")
    cols = [S[:, j].tolist() for j in range(n)]
    row_sums = [0] * n
    total = 0
    subset = 0
    for k in range(1, 1 << n):
        # column whose membership flips between Gray codes k-1 and k
        j = (k & -k).bit_length() - 1
        bit = 1 << j
        subset ^= bit
        sign_add = 1 if subset & bit else -1
        col = cols[j]
        prod = 1
        for i in range(n):
            row_sums[i] += sign_add * col[i]
            prod *= row_sums[i]
        if prod:
            total += -prod if (n - bin(subset).count("1")) & 1 else prod
    return total


def count_positive_diagonals_brute(M: ArrayLike) -> int:
    """Enumerate all ``n!`` permutations; for cross-checking small cases."""
    S = support(M)
    n = S.shape[0]
    return sum(all(S[i, p[i]] for i in range(n)) for p in itertools.permutations(range(n)))


def _peel(S: NDArray[np.bool_]) -> tuple[list[tuple[int, int, str]], NDArray[np.bool_], NDArray[np.bool_]]:
    """Repeatedly remove a forced entry: the only positive in its row or column.

    Returns the peeled ``(row, col, kind)`` triples, where ``kind`` says
    whether the entry was a row or a column singleton, plus masks of the rows
    and columns still alive when peeling stopped.  Rows are preferred over
    columns and lower indices first.
    """
    n = S.shape[0]
    rows = np.ones(n, dtype=bool)
    cols = np.ones(n, dtype=bool)
    peeled = []
    while rows.any():
        sub = S & rows[:, None] & cols[None, :]
        row_counts = sub.sum(axis=1)
        col_counts = sub.sum(axis=0)
        if np.any(row_counts[rows] == 0) or np.any(col_counts[cols] == 0):
            break
        r_single = np.flatnonzero(rows & (row_counts == 1))
        if r_single.size:
            i = int(r_single[0])
            j = int(np.flatnonzero(sub[i])[0])
            kind = "row"
        else:
            c_single = np.flatnonzero(cols & (col_counts == 1))
            if not c_single.size:
                break
            j = int(c_single[0])
            i = int(np.flatnonzero(sub[:, j])[0])
            kind = "col"
        peeled.append((i, j, kind))
        rows[i] = False
        cols[j] = False
    return peeled, rows, cols


def has_exactly_one_positive_diagonal(M: ArrayLike) -> bool:
    """Decide ``count_positive_diagonals(M) == 1`` without computing a permanent.

    An entry that is alone in its row (or column) lies on every positive
    diagonal, so deleting its row and column preserves the diagonal count.
    Peeling such forced entries consumes the whole matrix exactly when there
    is a unique diagonal; it stalls on a zero line (no diagonal) or on a
    residual where every line holds two or more positives (none, or several).
    """
    S = support(M)
    peeled, rows, _ = _peel(S)
    return not rows.any()


@dataclass(frozen=True)
class TriangularizationWitness:
    """Permutations taking ``M`` to upper-triangular form.

    ``joint_permute(M, row_perm, col_perm)`` has a positive main diagonal and
    zeros strictly below it.
    """

    row_perm: tuple[int, ...]
    col_perm: tuple[int, ...]

    def apply(self, M: ArrayLike) -> NDArray[np.float64]:
        return joint_permute(M, self.row_perm, self.col_perm)


def is_upper_triangular(M: ArrayLike) -> bool:
    """Positive main diagonal and zeros strictly below it."""
    A = as_square(M)
    return bool(np.all(np.diag(A) > 0) and not np.any(np.tril(A, -1)))


def triangularize(M: ArrayLike) -> TriangularizationWitness | None:
    """Witness permutations for a matrix with exactly one positive diagonal, else ``None``.

    Column singletons are placed front to back and row singletons back to
    front.  A row peeled as a singleton can only be positive in columns
    removed before it as row singletons, which sit later in the order; dually
    for columns.  That leaves every remaining positive above the diagonal.
    """
    S = support(M)
    n = S.shape[0]
    peeled, rows, _ = _peel(S)
    if rows.any():
        return None
    row_perm = [0] * n
    col_perm = [0] * n
    front, back = 0, n - 1
    for i, j, kind in peeled:
        if kind == "col":
            pos, front = front, front + 1
        else:
            pos, back = back, back - 1
        row_perm[pos] = i
        col_perm[pos] = j
    return TriangularizationWitness(tuple(row_perm), tuple(col_perm))


def diagonal_support_entry(M: ArrayLike, i: int, j: int) -> bool:
    """True iff some positive diagonal passes through the positive entry ``(i, j)``."""
    S = support(M)
    n = S.shape[0]
    if not (0 <= i < n and 0 <= j < n):
        raise IndexError(f"entry ({i}, {j}) outside a {n}x{n} matrix")
    if not S[i, j]:
        raise CoopIndexError(f"entry ({i}, {j}) is zero")
    keep_r = np.arange(n) != i
    keep_c = np.arange(n) != j
    rest = S[np.ix_(keep_r, keep_c)]
    return rest.size == 0 or _matching(rest) is not None
