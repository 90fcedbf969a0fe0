import math
from collections import Counter
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from coopindex.core import DimensionError, InvalidMatrixError, is_row_stochastic
from coopindex.teaching import (
    MalformedProblemError,
    ThresholdProblem,
    as_consistency,
    average_teaching_dimension,
    build_threshold_learner,
    sample_consistency,
    teaching_dimension,
    teaching_rows,
    threshold_round,
)

MPROB = np.array([[1.0, 0.5], [0.0, 0.5]])
C_A = ((1, 0), (0, 0))
C_B = ((1, 0), (0, 1))
C_C = ((1, 1), (0, 0))
C_D = ((1, 1), (0, 1))

EXAMPLE_TABLE = [
    ("{0,-,1,+}", [1, 0, 0]),
    ("{0,-,2,+}", [Fraction(1, 2), Fraction(1, 2), 0]),
    ("{0,-,3,+}", [Fraction(1, 3), Fraction(1, 3), Fraction(1, 3)]),
    ("{1,-,2,+}", [0, 1, 0]),
    ("{1,-,3,+}", [0, Fraction(1, 2), Fraction(1, 2)]),
    ("{2,-,3,+}", [0, 0, 1]),
]


def td_oracle(C, j, sizes):
    best = math.inf
    for i, row in enumerate(C):
        if row[j] == 1 and all(row[k] == 0 for k in range(len(row)) if k != j):
            best = min(best, sizes[i])
    return best


binary = st.tuples(st.integers(1, 5), st.integers(1, 5)).flatmap(
    lambda s: arrays(np.int8, s, elements=st.sampled_from([0, 1]))
)


class TestConsistency:
    def test_rejects_non_binary(self):
        with pytest.raises(InvalidMatrixError):
            as_consistency([[0.5, 1]])

    def test_sampling_deterministic(self):
        np.testing.assert_array_equal(sample_consistency(MPROB, 4), sample_consistency(MPROB, 4))

    def test_sampling_certain_entries(self):
        for seed in range(50):
            C = sample_consistency(MPROB, seed)
            assert C[0, 0] == 1 and C[1, 0] == 0

    def test_sampling_frequencies(self):
        n = 10_000
        counts = Counter(tuple(map(tuple, sample_consistency(MPROB, s).tolist())) for s in range(n))
        assert set(counts) == {C_A, C_B, C_C, C_D}
        for c in counts.values():
            assert abs(c / n - 0.25) <= 0.02

    def test_sampling_rejects_bad_probability(self):
        with pytest.raises(InvalidMatrixError):
            sample_consistency([[1.5]])

    def test_threshold_round(self):
        np.testing.assert_array_equal(threshold_round(MPROB, 0.6), C_A)
        np.testing.assert_array_equal(threshold_round(MPROB, 0.4), C_D)

    def test_threshold_is_strict(self):
        np.testing.assert_array_equal(threshold_round(MPROB, 0.5), C_A)

    @pytest.mark.parametrize("thr", [0.0, 1.0, -0.1])
    def test_threshold_range(self, thr):
        with pytest.raises(ValueError):
            threshold_round(MPROB, thr)


class TestTeachingDimension:
    def test_teaching_rows(self):
        np.testing.assert_array_equal(teaching_rows(C_D), [-1, 1])
        np.testing.assert_array_equal(teaching_rows(C_B), [0, 1])

    def test_no_teaching_set(self):
        assert teaching_dimension(C_D, 0, [2, 3]) == math.inf
        assert teaching_dimension(C_D, 1, [2, 3]) == 3

    def test_default_sizes(self):
        assert teaching_dimension(C_B, 1) == 1

    def test_concept_range(self):
        with pytest.raises(IndexError):
            teaching_dimension(C_B, 2)

    def test_size_count(self):
        with pytest.raises(DimensionError):
            teaching_dimension(C_B, 0, [1])

    def test_atd_identity(self):
        assert average_teaching_dimension(C_B, [2, 3]) == 2.5

    @pytest.mark.parametrize("C", [C_A, C_C, C_D])
    def test_atd_infinite(self, C):
        assert average_teaching_dimension(C, [2, 3]) == math.inf

    def test_smallest_teaching_set_wins(self):
        C = [[1, 0], [1, 0], [0, 1]]
        assert teaching_dimension(C, 0, [5, 2, 1]) == 2

    @given(binary, st.data())
    @settings(max_examples=200, deadline=None)
    def test_matches_oracle(self, C, data):
        sizes = data.draw(st.lists(st.integers(0, 9), min_size=C.shape[0], max_size=C.shape[0]))
        tds = [teaching_dimension(C, j, sizes) for j in range(C.shape[1])]
        assert tds == [td_oracle(C.tolist(), j, sizes) for j in range(C.shape[1])]
        atd = average_teaching_dimension(C, sizes)
        if all(map(math.isfinite, tds)):
            assert atd == pytest.approx(sum(tds) / len(tds))
        else:
            assert atd == math.inf


class TestThresholdLearner:
    def test_reproduces_table_exactly(self):
        M = build_threshold_learner(ThresholdProblem((1, 2, 3), (0, 1, 2, 3)))
        assert M.index.concept_labels == ("h1", "h2", "h3")
        assert M.index.dataset_labels == tuple(label for label, _ in EXAMPLE_TABLE)
        assert M.index.dataset_sizes == (2,) * 6
        np.testing.assert_array_equal(M.entries, [[float(v) for v in row] for _, row in EXAMPLE_TABLE])

    @given(
        st.lists(st.integers(-5, 5), min_size=1, max_size=5, unique=True),
        st.lists(st.integers(-5, 5), min_size=2, max_size=6, unique=True),
    )
    def test_rows_stochastic_or_malformed(self, thetas, xs):
        problem = ThresholdProblem(tuple(sorted(thetas)), tuple(sorted(xs)))
        try:
            M = build_threshold_learner(problem)
        except MalformedProblemError:
            return
        assert is_row_stochastic(M.entries, tol=1e-12)
        assert np.all(M.entries.sum(axis=1) > 0)

    def test_no_consistent_threshold(self):
        with pytest.raises(MalformedProblemError):
            build_threshold_learner(ThresholdProblem((5,), (0, 1)))

    def test_single_instance(self):
        with pytest.raises(MalformedProblemError):
            build_threshold_learner(ThresholdProblem((1,), (0,)))

    def test_unsorted_rejected(self):
        with pytest.raises(ValueError):
            ThresholdProblem((2, 1), (0, 1))
