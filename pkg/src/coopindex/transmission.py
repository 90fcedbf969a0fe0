"""Transmission Index, its optimality certificate, and related quantities.

``L`` is the learner's row-stochastic inference matrix (posterior of each
concept given a data set) and ``T`` the teacher's column-stochastic
selection matrix (probability of each data set given a concept).  Both are
``|D| x |H|``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal, Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .core import (
    STOCHASTIC_TOL,
    CoopIndexError,
    DimensionError,
    check_column_stochastic,
    check_row_stochastic,
)

TieRule = Literal["uniform-split", "lowest-index"]

# simulate_transmission draws this many episodes per vectorized batch
_EPISODE_CHUNK = 200_000


class UndefinedError(CoopIndexError):
    """The requested quantity is undefined for these inputs."""


def _pair(L: ArrayLike, T: ArrayLike, tol: float = STOCHASTIC_TOL):
    L = check_row_stochastic(L, tol)
    T = check_column_stochastic(T, tol)
    if L.shape != T.shape:
        raise DimensionError(f"L is {L.shape} but T is {T.shape}")
    return L, T


def transmission_index(L: ArrayLike, T: ArrayLike) -> float:
    """Average over concepts of the probability that the learner recovers the
    concept the teacher intended.

    >>> transmission_index([[0.5, 0.5], [0, 1]], [[1, 1/3], [0, 2/3]])
    0.6666666666666666
    """
    L, T = _pair(L, T)
    return float(np.sum(L * T) / L.shape[1])


@dataclass(frozen=True)
class TiCertificate:
    """Why the Transmission Index does or does not reach 1.

    Attributes
    ----------
    ti_value : float
        The Transmission Index.
    condition_i_holds : bool
        ``L[i, j] == 1`` wherever ``T[i, j] > 0``.
    condition_ii_holds : bool
        Neither ``L`` nor ``T`` has a zero column.
    violations : list of (row, column)
        Entries breaking the first condition.
    zero_columns : list of int
        Columns that are zero in ``L`` or in ``T``.
    """

    ti_value: float
    condition_i_holds: bool
    condition_ii_holds: bool
    violations: list[tuple[int, int]] = field(default_factory=list)
    zero_columns: list[int] = field(default_factory=list)

    @property
    def optimal(self) -> bool:
        return self.condition_i_holds and self.condition_ii_holds


def ti_certificate(L: ArrayLike, T: ArrayLike, tol: float = STOCHASTIC_TOL) -> TiCertificate:
    """Evaluate both optimality conditions entrywise, within ``tol``."""
    L, T = _pair(L, T)
    bad = (T > tol) & (np.abs(L - 1.0) > tol)
    violations = [(int(i), int(j)) for i, j in zip(*np.nonzero(bad))]
    zero_cols = (L.sum(axis=0) <= tol) | (T.sum(axis=0) <= tol)
    return TiCertificate(
        ti_value=float(np.sum(L * T) / L.shape[1]),
        condition_i_holds=not violations,
        condition_ii_holds=not zero_cols.any(),
        violations=violations,
        zero_columns=[int(j) for j in np.flatnonzero(zero_cols)],
    )


def expected_teaching_dimension(L: ArrayLike, T: ArrayLike, sizes: Sequence[float]) -> float:
    """Expected data-set size under the joint weight ``L * T``.

    Raises :class:`UndefinedError` when ``L * T`` is identically zero (TI = 0).
    """
    L, T = _pair(L, T)
    sizes = np.asarray(sizes, dtype=np.float64)
    if sizes.shape != (L.shape[0],):
        raise DimensionError(f"expected {L.shape[0]} data-set sizes, got {sizes.shape}")
    W = L * T
    total = W.sum()
    if total <= 0:
        raise UndefinedError("ETD undefined: L and T share no positive entry (TI = 0)")
    return float(sizes @ W.sum(axis=1) / total)


def machine_teaching_matrix(L: ArrayLike, tie_rule: TieRule = "uniform-split") -> NDArray[np.float64]:
    """Teacher that puts all mass on the data set maximizing ``L[:, h]``.

    Each concept column gets mass 1 on its argmax row.  Ties are shared
    equally (``"uniform-split"``) or go to the first row (``"lowest-index"``).
    """
    L = check_row_stochastic(L)
    if tie_rule not in ("uniform-split", "lowest-index"):
        raise ValueError(f"unknown tie_rule {tie_rule!r}")
    col_max = L.max(axis=0)
    unteachable = np.flatnonzero(col_max <= 0)
    if unteachable.size:
        raise UndefinedError(f"unteachable concept(s): column(s) {unteachable.tolist()} of L are zero")
    T = np.zeros_like(L)
    if tie_rule == "lowest-index":
        T[np.argmax(L, axis=0), np.arange(L.shape[1])] = 1.0
    else:
        winners = L == col_max
        T[winners] = 1.0
        T /= winners.sum(axis=0, keepdims=True)
    return T


def _sample_rows(cdf: NDArray[np.float64], u: NDArray[np.float64]) -> NDArray[np.intp]:
    # inverse-CDF draw per row of `cdf`; clip guards against cdf[-1] < 1 by rounding
    k = (u[:, None] >= cdf).sum(axis=1)
    return np.minimum(k, cdf.shape[1] - 1)


def simulate_transmission(L: ArrayLike, T: ArrayLike, episodes: int, seed: int = 0) -> float:
    """Monte Carlo estimate of the Transmission Index.

    Each episode draws a concept ``h`` uniformly, a data set ``d ~ T[:, h]``
    and a guess ``g ~ L[d, :]``, and scores ``g == h``.  Draws use
    ``numpy.random.Generator(PCG64(seed))`` by inverse-CDF sampling, so a
    given seed reproduces the same estimate on a given platform.
    """
    L, T = _pair(L, T)
    if episodes < 1:
        raise ValueError("episodes must be positive")
    n_d, n_h = L.shape
    if np.any(T.sum(axis=0) <= 0):
        raise UndefinedError("teacher matrix has a zero column: some concept cannot be taught")
    rng = np.random.Generator(np.random.PCG64(seed))
    teach_cdf = np.cumsum(T, axis=0).T  # row h: CDF over data sets
    learn_cdf = np.cumsum(L, axis=1)  # row d: CDF over concepts
    empty_rows = L.sum(axis=1) <= 0
    hits = 0
    remaining = episodes
    while remaining:
        m = min(remaining, _EPISODE_CHUNK)
        h = rng.integers(0, n_h, size=m)
        d = _sample_rows(teach_cdf[h], rng.random(m))
        if empty_rows[d].any():
            raise UndefinedError(
                f"undefined learner posterior: data set {int(d[empty_rows[d]][0])} has a zero row in L"
            )
        g = _sample_rows(learn_cdf[d], rng.random(m))
        hits += int(np.count_nonzero(g == h))
        remaining -= m
    return hits / episodes
