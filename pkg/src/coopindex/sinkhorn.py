"""Cooperative inference as alternating, prior-weighted normalization.

Starting from a shared likelihood ``M`` (``|D| x |H|``), each step runs

* learner update:  ``L = row_normalize(T @ diag(concept_prior))``
* teacher update:  ``T = column_normalize(diag(dataset_prior) @ L)``

beginning with the learner update on ``T = M``.  With uniform priors and a
square ``M`` this is Sinkhorn-Knopp scaling, and the Cooperative Index is the
Transmission Index of the limit pair.
"""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass, field
from typing import IO, Iterator, Literal, Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .core import (
    STOCHASTIC_TOL,
    CoopIndexError,
    DimensionError,
    InvalidMatrixError,
    _safe_divide,
    as_nonnegative,
    as_square,
)
from .structure import _matching, diagonal_support_entry, has_positive_diagonal

DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITER = 1_000_000

Start = Literal["learner", "teacher"]
CiMode = Literal["iterative", "structural"]


class NoPositiveDiagonalError(CoopIndexError):
    """The support of ``M`` has no perfect matching, so no Sinkhorn limit exists."""


@dataclass(frozen=True)
class Priors:
    """Learner prior over concepts and teacher prior over data sets."""

    concept_prior: NDArray[np.float64]
    dataset_prior: NDArray[np.float64]

    def __post_init__(self):
        for name in ("concept_prior", "dataset_prior"):
            v = np.array(getattr(self, name), dtype=np.float64)
            if v.ndim != 1 or v.size == 0:
                raise InvalidMatrixError(f"{name} must be a nonempty vector")
            if not np.all(np.isfinite(v)) or np.any(v < 0):
                raise InvalidMatrixError(f"{name} must be finite and nonnegative")
            if abs(v.sum() - 1.0) > STOCHASTIC_TOL:
                raise InvalidMatrixError(f"{name} must sum to 1, sums to {v.sum()!r}")
            v.setflags(write=False)
            object.__setattr__(self, name, v)

    @classmethod
    def uniform(cls, n_datasets: int, n_concepts: int) -> Priors:
        return cls(np.full(n_concepts, 1.0 / n_concepts), np.full(n_datasets, 1.0 / n_datasets))

    @property
    def is_uniform(self) -> bool:
        a, b = self.concept_prior, self.dataset_prior
        return bool(np.ptp(a) <= STOCHASTIC_TOL and np.ptp(b) <= STOCHASTIC_TOL)


@dataclass(frozen=True)
class TraceRow:
    step: int
    side: str
    residual: float
    diagonal_product: float


@dataclass(frozen=True)
class CooperativeResult:
    """Outcome of :func:`cooperative_iterate`.

    ``diagonal_trace`` holds the products of ``L`` and ``T`` along the
    reference diagonal in the order they were computed (learner first by
    default), and is empty when no reference diagonal was given.
    ``log_diagonal_trace`` carries the same values as natural logs.
    """

    L_limit: NDArray[np.float64]
    T_limit: NDArray[np.float64]
    iterations: int
    converged: bool
    residual: float
    log_diagonal_trace: tuple[float, ...] = ()
    trace: tuple[TraceRow, ...] = field(default=(), repr=False)

    @property
    def diagonal_trace(self) -> tuple[float, ...]:
        return tuple(math.exp(x) for x in self.log_diagonal_trace)


def _row_norm(A: NDArray) -> NDArray:
    return _safe_divide(A, A.sum(axis=1, keepdims=True), A.shape[1])


def _col_norm(A: NDArray) -> NDArray:
    return _safe_divide(A, A.sum(axis=0, keepdims=True), A.shape[0])


def _prepare(M: ArrayLike, priors: Priors | None) -> tuple[NDArray, Priors]:
    A = as_nonnegative(M)
    if not A.any():
        raise InvalidMatrixError("likelihood matrix is identically zero")
    n_d, n_h = A.shape
    if priors is None:
        priors = Priors.uniform(n_d, n_h)
    if priors.concept_prior.shape != (n_h,) or priors.dataset_prior.shape != (n_d,):
        raise DimensionError(
            f"priors have lengths ({priors.concept_prior.size}, {priors.dataset_prior.size}), "
            f"expected ({n_h}, {n_d}) for concepts and data sets"
        )
    return A, priors


def iterate_steps(
    M: ArrayLike, priors: Priors | None = None, start: Start = "learner"
) -> Iterator[tuple[NDArray[np.float64], NDArray[np.float64]]]:
    """Yield ``(L_k, T_k)`` for ``k = 1, 2, ...`` indefinitely.

    With ``start="teacher"`` the teacher update runs first on ``L = M``.
    """
    A, priors = _prepare(M, priors)
    if start not in ("learner", "teacher"):
        raise ValueError(f"start must be 'learner' or 'teacher', got {start!r}")
    # uniform weights cancel inside the normalizations
    a = None if np.ptp(priors.concept_prior) == 0 else priors.concept_prior[None, :]
    b = None if np.ptp(priors.dataset_prior) == 0 else priors.dataset_prior[:, None]
    T = A
    L = A
    while True:
        if start == "learner":
            L = _row_norm(T if a is None else T * a)
            T = _col_norm(L if b is None else b * L)
        else:
            T = _col_norm(L if b is None else b * L)
            L = _row_norm(T if a is None else T * a)
        yield L, T


def _log_diag(A: NDArray, rows: NDArray, cols: NDArray) -> float:
    vals = A[rows, cols]
    if np.any(vals <= 0):
        return -math.inf
    return float(np.log(vals).sum())


def _is_ds(A: NDArray, tol: float) -> bool:
    return bool(
        np.abs(A.sum(axis=1) - 1.0).max() <= tol and np.abs(A.sum(axis=0) - 1.0).max() <= tol
    )


def cooperative_iterate(
    M: ArrayLike,
    priors: Priors | None = None,
    max_iter: int = DEFAULT_MAX_ITER,
    tol: float = DEFAULT_TOL,
    reference_diagonal: Sequence[int] | None = None,
    start: Start = "learner",
    record_trace: bool = False,
) -> CooperativeResult:
    """Run the cooperative-inference fixed-point iteration.

    Stops once the largest entrywise change of both ``L`` and ``T`` over one
    step is at most ``tol``; for a square ``M`` with uniform priors and a
    positive diagonal the pair must in addition be doubly stochastic and
    agree within ``tol``.  The
    first step is measured against ``M`` itself, so a doubly stochastic
    ``M`` is recognized after one step.  Zero rows and columns of ``M`` stay
    zero throughout.

    Parameters
    ----------
    reference_diagonal : sequence of int, optional
        A permutation ``sigma`` with ``M[i, sigma[i]] > 0``.  When given,
        the products of ``L`` and ``T`` along it are recorded after every
        half-step.
    record_trace : bool
        Keep one :class:`TraceRow` per half-step (for the CSV dump).
    """
    A, priors = _prepare(M, priors)
    if max_iter < 1:
        raise ValueError("max_iter must be at least 1")
    if tol <= 0:
        raise ValueError("tol must be positive")
    n_d, n_h = A.shape
    # the doubly stochastic limit is only guaranteed with a positive diagonal
    check_ds = n_d == n_h and priors.is_uniform and has_positive_diagonal(A)

    rows = cols = None
    if reference_diagonal is not None:
        if n_d != n_h:
            raise DimensionError("a reference diagonal needs a square matrix")
        cols = np.asarray(reference_diagonal, dtype=np.intp)
        if sorted(cols.tolist()) != list(range(n_d)):
            raise DimensionError(f"reference diagonal is not a permutation: {list(reference_diagonal)}")
        rows = np.arange(n_d)
        if np.any(A[rows, cols] <= 0):
            raise InvalidMatrixError("reference diagonal passes through a zero entry of M")

    order = ("L", "T") if start == "learner" else ("T", "L")
    log_trace: list[float] = []
    trace: list[TraceRow] = []
    L_prev = T_prev = A
    L = T = A
    residual = math.inf
    converged = False
    k = 0
    for k, (L, T) in enumerate(iterate_steps(A, priors, start), start=1):
        dL = float(np.abs(L - L_prev).max())
        dT = float(np.abs(T - T_prev).max())
        residual = max(dL, dT)
        if rows is not None or record_trace:
            for side in order:
                X, d = (L, dL) if side == "L" else (T, dT)
                lg = _log_diag(X, rows, cols) if rows is not None else math.nan
                if rows is not None:
                    log_trace.append(lg)
                if record_trace:
                    trace.append(TraceRow(k, side, d, math.exp(lg) if rows is not None else math.nan))
        if residual <= tol and (
            not check_ds or (_is_ds(L, tol) and _is_ds(T, tol) and np.abs(L - T).max() <= tol)
        ):
            converged = True
            break
        if k >= max_iter:
            break
        L_prev, T_prev = L, T
    return CooperativeResult(
        L_limit=L,
        T_limit=T,
        iterations=k,
        converged=converged,
        residual=residual,
        log_diagonal_trace=tuple(log_trace),
        trace=tuple(trace),
    )


def write_trace_csv(result: CooperativeResult, fh: IO[str]) -> None:
    """Write ``step,side,residual,diagonal_product`` rows; needs ``record_trace=True``."""
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["step", "side", "residual", "diagonal_product"])
    for row in result.trace:
        dp = "" if math.isnan(row.diagonal_product) else repr(row.diagonal_product)
        w.writerow([row.step, row.side, repr(row.residual), dp])


def prune_to_diagonal_support(M: ArrayLike) -> NDArray[np.float64]:
    """Zero every entry of ``M`` that lies on no positive diagonal.

    The result keeps exactly the entries that survive in the Sinkhorn limit.
    """
    A = as_square(M)
    S = A > 0
    match = _matching(S)
    if match is None:
        raise NoPositiveDiagonalError("M has no positive diagonal")
    keep = np.zeros_like(S)
    keep[np.arange(A.shape[0]), match] = True
    for i, j in zip(*np.nonzero(S & ~keep)):
        keep[i, j] = diagonal_support_entry(S, int(i), int(j))
    return np.where(keep, A, 0.0)


@dataclass(frozen=True)
class CooperativeIndexReport:
    ci: float
    mode: str
    iterations: int
    converged: bool
    pruned: NDArray[np.float64] | None = None


def cooperative_index_report(
    M: ArrayLike,
    mode: CiMode = "structural",
    max_iter: int = DEFAULT_MAX_ITER,
    tol: float = DEFAULT_TOL,
    priors: Priors | None = None,
) -> CooperativeIndexReport:
    """Cooperative Index together with how it was obtained.

    ``"structural"`` first drops entries on no positive diagonal.  If what
    remains is a permutation pattern the index is exactly 1 and no
    iteration runs; otherwise the pruned matrix, which now has total
    support, is iterated.  ``"iterative"`` iterates ``M`` directly, which
    converges only like ``O(1/k)`` when ``M`` lacks total support.
    """
    A = as_square(M)
    if priors is not None and not priors.is_uniform:
        raise CoopIndexError("the Cooperative Index is defined for uniform priors only")
    if mode not in ("iterative", "structural"):
        raise ValueError(f"mode must be 'iterative' or 'structural', got {mode!r}")
    if not has_positive_diagonal(A):
        raise NoPositiveDiagonalError("Sinkhorn limit does not exist for this pattern: no positive diagonal")
    pruned = None
    target = A
    if mode == "structural":
        pruned = prune_to_diagonal_support(A)
        if np.all((pruned > 0).sum(axis=1) == 1):
            return CooperativeIndexReport(1.0, mode, 0, True, pruned)
        target = pruned
    res = cooperative_iterate(target, max_iter=max_iter, tol=tol)
    if not res.converged:
        warnings.warn(
            f"cooperative iteration stopped after {res.iterations} steps without converging "
            f"(residual {res.residual:.3g})",
            RuntimeWarning,
            stacklevel=2,
        )
    n = A.shape[1]
    ci = float(np.sum(res.L_limit * res.T_limit) / n)
    return CooperativeIndexReport(ci, mode, res.iterations, res.converged, pruned)


def cooperative_index(
    M: ArrayLike,
    mode: CiMode = "structural",
    max_iter: int = DEFAULT_MAX_ITER,
    tol: float = DEFAULT_TOL,
    priors: Priors | None = None,
) -> float:
    """Transmission Index of the cooperative-inference limit of ``M``."""
    return cooperative_index_report(M, mode, max_iter, tol, priors).ci
