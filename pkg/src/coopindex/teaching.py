"""Consistency matrices and the deterministic teaching-dimension measures.

A consistency matrix ``C`` is ``|D| x |H|`` with ``C[i, j] = 1`` when concept
``j`` is consistent with every example in data set ``i``.  Row ``i`` is a
teaching set for concept ``j`` when ``j`` is the only concept consistent
with it.

Teaching dimensions are reported as ``int``/``float`` values with
``math.inf`` for concepts that have no teaching set; ordinary float
arithmetic then gives the extended-real rules (``inf + x == inf``,
``min(inf, x) == x``).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .core import CoopIndexError, DimensionError, InvalidMatrixError, LabeledMatrix, SpaceIndex, as_nonnegative


def _probabilities(M: ArrayLike) -> NDArray[np.float64]:
    P = as_nonnegative(M)
    if np.any(P > 1.0):
        raise InvalidMatrixError("consistency probabilities must lie in [0, 1]")
    return P


def as_consistency(C: ArrayLike) -> NDArray[np.int8]:
    """Validate a 0/1 matrix and return it as ``int8``."""
    A = np.asarray(C)
    if A.ndim != 2 or A.size == 0:
        raise InvalidMatrixError("consistency matrix must be a nonempty 2-D array")
    if not np.all((A == 0) | (A == 1)):
        raise InvalidMatrixError("consistency matrix entries must be exactly 0 or 1")
    return A.astype(np.int8)


def sample_consistency(Mprob: ArrayLike, seed: int = 0) -> NDArray[np.int8]:
    """Draw each entry as an independent Bernoulli trial with probability ``Mprob[i, j]``."""
    P = _probabilities(Mprob)
    rng = np.random.Generator(np.random.PCG64(seed))
    return (rng.random(P.shape) < P).astype(np.int8)


def threshold_round(Mprob: ArrayLike, threshold: float) -> NDArray[np.int8]:
    """Round to 1 every probability strictly above ``threshold``, else 0."""
    if not 0.0 < threshold < 1.0:
        raise ValueError(f"threshold must lie in (0, 1), got {threshold}")
    P = _probabilities(Mprob)
    return (P > threshold).astype(np.int8)


def teaching_rows(C: ArrayLike) -> NDArray[np.intp]:
    """For each data set, the concept it teaches, or -1 if it teaches none.

    A row is a teaching set exactly when it contains a single 1, so each row
    serves at most one concept.
    """
    C = as_consistency(C)
    out = np.full(C.shape[0], -1, dtype=np.intp)
    single = C.sum(axis=1) == 1
    out[single] = np.argmax(C[single], axis=1)
    return out


def _sizes(C: NDArray, sizes: Sequence[int] | None) -> NDArray[np.int64]:
    if sizes is None:
        return np.ones(C.shape[0], dtype=np.int64)
    s = np.asarray(sizes, dtype=np.int64)
    if s.shape != (C.shape[0],):
        raise DimensionError(f"expected {C.shape[0]} data-set sizes, got {len(s)}")
    if np.any(s < 0):
        raise InvalidMatrixError("data-set sizes must be nonnegative")
    return s


def teaching_dimension(C: ArrayLike, concept_index: int, sizes: Sequence[int] | None = None) -> int | float:
    """Smallest size of a teaching set for one concept, ``math.inf`` if there is none.

    ``sizes`` defaults to 1 for every data set.
    """
    C = as_consistency(C)
    if not 0 <= concept_index < C.shape[1]:
        raise IndexError(f"concept index {concept_index} out of range for {C.shape[1]} concepts")
    s = _sizes(C, sizes)
    rows = np.flatnonzero(teaching_rows(C) == concept_index)
    if rows.size == 0:
        return math.inf
    return int(s[rows].min())


def average_teaching_dimension(C: ArrayLike, sizes: Sequence[int] | None = None) -> float:
    """Mean teaching dimension over all concepts; ``math.inf`` if any concept is unteachable."""
    C = as_consistency(C)
    s = _sizes(C, sizes)
    tds = [teaching_dimension(C, j, s) for j in range(C.shape[1])]
    return math.fsum(tds) / len(tds) if all(map(math.isfinite, tds)) else math.inf


@dataclass(frozen=True)
class ThresholdProblem:
    """Threshold classifiers ``h_theta(x) = '+' if x >= theta else '-'``."""

    thresholds: tuple[int, ...]
    instances: tuple[int, ...]

    def __post_init__(self):
        for name in ("thresholds", "instances"):
            vals = tuple(int(v) for v in getattr(self, name))
            if not vals:
                raise ValueError(f"{name} must be nonempty")
            if any(b <= a for a, b in zip(vals, vals[1:])):
                raise ValueError(f"{name} must be strictly increasing")
            object.__setattr__(self, name, vals)


class MalformedProblemError(CoopIndexError):
    pass


def build_threshold_learner(problem: ThresholdProblem) -> LabeledMatrix:
    """Version-space learner over two-example data sets ``{(x1, -), (x2, +)}``.

    Data sets are all pairs ``x1 < x2`` of instances, in lexicographic order.
    Each row spreads its mass uniformly over the thresholds consistent with
    it, i.e. ``x1 < theta <= x2``.
    """
    pairs = list(itertools.combinations(problem.instances, 2))
    if not pairs:
        raise MalformedProblemError("need at least two instances to form a data set")
    thetas = np.asarray(problem.thresholds)
    rows = []
    for x1, x2 in pairs:
        consistent = (x1 < thetas) & (thetas <= x2)
        if not consistent.any():
            raise MalformedProblemError(f"no threshold is consistent with {{{x1},-,{x2},+}}")
        rows.append(consistent / consistent.sum())
    index = SpaceIndex(
        concept_labels=tuple(f"h{t}" for t in problem.thresholds),
        dataset_labels=tuple(f"{{{x1},-,{x2},+}}" for x1, x2 in pairs),
        dataset_sizes=tuple(2 for _ in pairs),
    )
    return LabeledMatrix(np.array(rows, dtype=np.float64), index)
