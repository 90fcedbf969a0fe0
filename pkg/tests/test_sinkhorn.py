import io
import itertools
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from coopindex.core import CoopIndexError, DimensionError, InvalidMatrixError, is_doubly_stochastic
from coopindex.sinkhorn import (
    NoPositiveDiagonalError,
    Priors,
    cooperative_index,
    cooperative_index_report,
    cooperative_iterate,
    iterate_steps,
    prune_to_diagonal_support,
    write_trace_csv,
)
from coopindex.structure import count_positive_diagonals_brute
from coopindex.transmission import transmission_index

TRIANGLE = np.array([[1.0, 1.0], [0.0, 1.0]])


def closed_form(k):
    L = np.array([[1 - 1 / (2 * k), 1 / (2 * k)], [0, 1]])
    T = np.array([[1, 1 / (2 * k + 1)], [0, 1 - 1 / (2 * k + 1)]])
    return L, T


def prune_oracle(A):
    n = A.shape[0]
    keep = np.zeros(A.shape, dtype=bool)
    for p in itertools.permutations(range(n)):
        if all(A[i, p[i]] > 0 for i in range(n)):
            keep[np.arange(n), p] = True
    return np.where(keep, A, 0.0)


square_patterns = st.integers(1, 5).flatmap(
    lambda n: arrays(np.float64, (n, n), elements=st.sampled_from([0.0, 0.5, 1.0, 3.0]))
)


class TestTrajectory:
    def test_triangle_closed_form(self):
        for k, (L, T) in enumerate(itertools.islice(iterate_steps(TRIANGLE), 100), start=1):
            Lk, Tk = closed_form(k)
            np.testing.assert_allclose(L, Lk, rtol=0, atol=1e-12)
            np.testing.assert_allclose(T, Tk, rtol=0, atol=1e-12)

    def test_first_step_ti(self):
        L, T = next(iterate_steps(TRIANGLE))
        assert transmission_index(L, T) == pytest.approx(2 / 3, abs=1e-12)

    def test_teacher_first(self):
        L, T = next(iterate_steps(TRIANGLE, start="teacher"))
        np.testing.assert_allclose(T, [[1, 0.5], [0, 0.5]])
        np.testing.assert_allclose(L, [[2 / 3, 1 / 3], [0, 1]])

    def test_bad_start(self):
        with pytest.raises(ValueError):
            next(iterate_steps(TRIANGLE, start="both"))


class TestCooperativeIterate:
    def test_doubly_stochastic_input_one_step(self):
        A = np.full((3, 3), 1 / 3)
        r = cooperative_iterate(A)
        assert r.converged and r.iterations == 1
        np.testing.assert_array_equal(r.L_limit, A)

    def test_diagonal_trace_closed_form(self):
        r = cooperative_iterate(TRIANGLE, max_iter=5, reference_diagonal=[0, 1])
        expected = []
        for k in range(1, 6):
            Lk, Tk = closed_form(k)
            expected += [Lk[0, 0] * Lk[1, 1], Tk[0, 0] * Tk[1, 1]]
        np.testing.assert_allclose(r.diagonal_trace, expected, rtol=1e-12)
        assert not r.converged and r.iterations == 5

    def test_positive_matrices(self, rng):
        for _ in range(50):
            A = rng.uniform(0.01, 1.0, (4, 4))
            r = cooperative_iterate(A, reference_diagonal=rng.permutation(4))
            assert r.converged
            assert is_doubly_stochastic(r.L_limit, 1e-8) and is_doubly_stochastic(r.T_limit, 1e-8)
            assert np.abs(r.L_limit - r.T_limit).max() <= 1e-8
            assert np.all(np.diff(r.diagonal_trace) >= -1e-12)

    def test_rectangular(self, rng):
        A = rng.uniform(0.1, 1.0, (3, 5))
        r = cooperative_iterate(A)
        assert r.converged
        np.testing.assert_allclose(r.L_limit.sum(axis=1), 1.0)
        np.testing.assert_allclose(r.T_limit.sum(axis=0), 1.0)

    def test_nonuniform_priors(self):
        A = np.array([[1.0, 2.0], [3.0, 1.0]])
        p = Priors(np.array([0.25, 0.75]), np.array([0.5, 0.5]))
        r = cooperative_iterate(A, priors=p)
        assert r.converged
        # fixed point of the weighted updates
        a = p.concept_prior
        L = r.T_limit * a / (r.T_limit * a).sum(axis=1, keepdims=True)
        np.testing.assert_allclose(L, r.L_limit, atol=1e-9)

    def test_zero_lines_stay_zero(self):
        A = np.array([[1.0, 1.0, 0.0], [1.0, 2.0, 0.0], [0.0, 0.0, 0.0]])
        r = cooperative_iterate(A, max_iter=200)
        assert not r.L_limit[2].any() and not r.T_limit[:, 2].any()

    def test_trace_csv(self):
        r = cooperative_iterate(TRIANGLE, max_iter=2, reference_diagonal=[0, 1], record_trace=True)
        buf = io.StringIO()
        write_trace_csv(r, buf)
        lines = buf.getvalue().splitlines()
        assert lines[0] == "step,side,residual,diagonal_product"
        assert [ln.split(",")[:2] for ln in lines[1:]] == [["1", "L"], ["1", "T"], ["2", "L"], ["2", "T"]]
        assert float(lines[1].split(",")[3]) == pytest.approx(0.5)

    def test_reference_diagonal_checks(self):
        with pytest.raises(InvalidMatrixError):
            cooperative_iterate(TRIANGLE, reference_diagonal=[1, 0])
        with pytest.raises(DimensionError):
            cooperative_iterate(TRIANGLE, reference_diagonal=[0, 0])

    def test_argument_checks(self):
        with pytest.raises(ValueError):
            cooperative_iterate(TRIANGLE, max_iter=0)
        with pytest.raises(ValueError):
            cooperative_iterate(TRIANGLE, tol=0)
        with pytest.raises(InvalidMatrixError):
            cooperative_iterate(np.zeros((2, 2)))

    def test_prior_length(self):
        with pytest.raises(DimensionError):
            cooperative_iterate(TRIANGLE, priors=Priors.uniform(3, 3))


class TestPriors:
    def test_must_sum_to_one(self):
        with pytest.raises(InvalidMatrixError):
            Priors(np.array([0.5, 0.6]), np.array([1.0]))

    def test_uniform(self):
        p = Priors.uniform(2, 3)
        assert p.is_uniform
        assert p.concept_prior.shape == (3,) and p.dataset_prior.shape == (2,)

    def test_not_uniform(self):
        assert not Priors(np.array([0.2, 0.8]), np.array([1.0])).is_uniform


class TestPruning:
    def test_triangle(self):
        np.testing.assert_array_equal(prune_to_diagonal_support(TRIANGLE), np.eye(2))

    def test_no_diagonal(self):
        with pytest.raises(NoPositiveDiagonalError):
            prune_to_diagonal_support([[1, 1], [0, 0]])

    @given(square_patterns)
    @settings(max_examples=300, deadline=None)
    def test_matches_enumeration(self, A):
        if count_positive_diagonals_brute(A) == 0:
            return
        np.testing.assert_array_equal(prune_to_diagonal_support(A), prune_oracle(A))


class TestCooperativeIndex:
    def test_triangle_exact(self):
        rep = cooperative_index_report(TRIANGLE)
        assert rep.ci == 1.0 and rep.iterations == 0 and rep.converged

    def test_all_ones(self):
        assert cooperative_index(np.ones((3, 3))) == pytest.approx(1 / 3, abs=1e-10)

    def test_no_diagonal(self):
        with pytest.raises(NoPositiveDiagonalError):
            cooperative_index([[1, 1], [0, 0]])

    def test_non_uniform_priors_refused(self):
        with pytest.raises(CoopIndexError):
            cooperative_index(np.ones((2, 2)), priors=Priors(np.array([0.3, 0.7]), np.array([0.5, 0.5])))

    def test_uniform_priors_accepted(self):
        assert cooperative_index(np.ones((2, 2)), priors=Priors.uniform(2, 2)) == pytest.approx(0.5)

    def test_bad_mode(self):
        with pytest.raises(ValueError):
            cooperative_index(TRIANGLE, mode="fast")

    def test_requires_square(self):
        with pytest.raises(DimensionError):
            cooperative_index(np.ones((2, 3)))

    def test_warns_without_convergence(self):
        with pytest.warns(RuntimeWarning):
            ci = cooperative_index(TRIANGLE, mode="iterative", max_iter=10)
        assert ci < 1.0

    def test_iterative_slowly_approaches_one(self):
        # without total support the iteration only converges like 1/k
        with pytest.warns(RuntimeWarning):
            ci = cooperative_index(TRIANGLE, mode="iterative", max_iter=2000)
        assert 1 - 1e-3 < ci < 1.0

    def test_modes_agree(self, rng):
        # iterative mode needs a loose tolerance on patterns without total support
        checked = 0
        while checked < 30:
            A = (rng.random((4, 4)) < 0.55) * rng.uniform(0.5, 2.0, (4, 4))
            if count_positive_diagonals_brute(A) == 0:
                continue
            s = cooperative_index(A)
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", RuntimeWarning)
                it = cooperative_index(A, mode="iterative", tol=1e-9, max_iter=4000)
            assert it == pytest.approx(s, abs=2e-3)
            checked += 1

    @given(square_patterns, st.randoms(use_true_random=False))
    @settings(max_examples=60, deadline=None)
    def test_permutation_invariant(self, A, rnd):
        if count_positive_diagonals_brute(A) == 0:
            return
        n = A.shape[0]
        r, c = list(range(n)), list(range(n))
        rnd.shuffle(r)
        rnd.shuffle(c)
        assert cooperative_index(A[np.ix_(r, c)]) == pytest.approx(cooperative_index(A), abs=1e-9)

    @given(square_patterns)
    @settings(max_examples=60, deadline=None)
    def test_unit_interval(self, A):
        if count_positive_diagonals_brute(A) == 0:
            return
        ci = cooperative_index(A)
        assert 1 / A.shape[0] - 1e-9 <= ci <= 1.0

