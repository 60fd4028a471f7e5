import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from adaptedbw import (
    AR1Spec,
    BlockOrthogonal,
    GaussianProcess,
    LowerBlockFactor,
    ar1_factor,
    canonicalize,
    classes_equal,
    column_covariance,
    covariance,
    from_covariance,
    is_regular,
    truncated_column,
)
from adaptedbw.errors import (
    DimensionMismatch,
    DimensionNotMultiple,
    IndexOutOfRange,
    NonPositiveSigma,
    NotBlockLowerTriangular,
    NotPSD,
)
from adaptedbw.process import gram_diagonal_blocks

from conftest import random_block_lower, random_factor, random_spd


class TestLowerBlockFactor:
    def test_shape_properties(self, rng):
        L = random_factor(rng, 2, 3)
        assert (L.d, L.T, L.n) == (2, 3, 6)
        np.testing.assert_array_equal(L.block(2, 1), L.matrix[2:4, 0:2])
        assert L.diagonal_blocks().shape == (3, 2, 2)

    def test_upper_block_rejected(self):
        A = np.zeros((4, 4))
        A[1, 2] = 1.0
        with pytest.raises(NotBlockLowerTriangular):
            LowerBlockFactor(A, 2)

    def test_within_block_upper_entry_allowed(self):
        A = np.eye(4)
        A[0, 1] = 0.3
        assert LowerBlockFactor(A, 2).d == 2

    def test_not_multiple(self):
        with pytest.raises(DimensionNotMultiple):
            LowerBlockFactor(np.eye(3), 2)

    def test_read_only(self):
        L = LowerBlockFactor(np.eye(2))
        with pytest.raises(ValueError):
            L.matrix[0, 0] = 2.0

    def test_rotation_keeps_class(self, rng):
        L = random_factor(rng, 3, 3)
        O = BlockOrthogonal.random(3, 3, rng)
        LO = L.rotate(O)
        np.testing.assert_allclose(covariance(LO), covariance(L), atol=1e-12)
        assert classes_equal(L, LO)


class TestColumns:
    def test_truncated_column_and_covariance(self):
        L = LowerBlockFactor(np.array([[1.0, 0, 0], [2.0, 3.0, 0], [4.0, 5.0, 6.0]]))
        np.testing.assert_array_equal(truncated_column(L, 2), [[3.0], [5.0]])
        np.testing.assert_array_equal(column_covariance(L, 3), [[36.0]])

    def test_out_of_range(self):
        L = LowerBlockFactor(np.eye(2))
        with pytest.raises(IndexOutOfRange):
            truncated_column(L, 3)
        with pytest.raises(IndexOutOfRange):
            column_covariance(L, 0)

    def test_column_covariances_sum_to_covariance(self, rng):
        L = random_factor(rng, 2, 4)
        total = np.zeros((8, 8))
        for t in range(1, 5):
            S = column_covariance(L, t)
            k = S.shape[0]
            total[-k:, -k:] += S
        np.testing.assert_allclose(total, covariance(L), atol=1e-12)

    def test_gram_blocks_transpose_exactly(self, rng):
        L, M = random_factor(rng, 3, 2), random_factor(rng, 3, 2)
        A = gram_diagonal_blocks(L, M)
        B = gram_diagonal_blocks(M, L)
        np.testing.assert_array_equal(A, B.transpose(0, 2, 1))


class TestRegularity:
    def test_cholesky_factor_is_regular(self, rng):
        assert is_regular(random_factor(rng, 2, 4))

    def test_zero_column_is_not_regular(self):
        L = LowerBlockFactor(np.array([[1.0, 0.0], [1.0, 0.0]]))
        assert not is_regular(L)

    def test_zero_diagonal_but_regular(self):
        # (L^T L)_{11} = 1 even though L[1,1] = 0
        L = LowerBlockFactor(np.array([[0.0, 0.0], [1.0, 1.0]]))
        assert is_regular(L)


class TestFromCovariance:
    @settings(max_examples=40, deadline=None)
    @given(st.sampled_from([1, 2, 3]), st.integers(1, 4), st.integers(0, 2**32 - 1))
    def test_round_trip(self, d, T, seed):
        rng = np.random.default_rng(seed)
        S = random_spd(rng, d * T)
        L = from_covariance(S, d)
        np.testing.assert_allclose(covariance(L), S, atol=1e-10)

    def test_rank_one(self):
        v = np.array([1.0, 0.5])
        L = from_covariance(np.outer(v, v), 1)
        np.testing.assert_allclose(L.matrix, [[1.0, 0.0], [0.5, 0.0]], atol=1e-12)

    def test_singular_leading_block(self):
        S = np.diag([0.0, 2.0, 3.0])
        L = from_covariance(S, 1)
        np.testing.assert_allclose(covariance(L), S, atol=1e-12)

    def test_singular_block_case(self, rng):
        G = rng.standard_normal((6, 3))
        S = G @ G.T
        L = from_covariance(S, 2)
        np.testing.assert_allclose(covariance(L), S, atol=1e-9)

    def test_not_psd(self):
        with pytest.raises(NotPSD):
            from_covariance(np.diag([1.0, -1.0]))


class TestCanonicalize:
    def test_same_class_same_representative(self, rng):
        for d in (1, 2, 3):
            L = random_factor(rng, d, 3)
            LO = L.rotate(BlockOrthogonal.random(d, 3, rng))
            np.testing.assert_allclose(canonicalize(LO).matrix, canonicalize(L).matrix, atol=1e-10)

    def test_diagonal_blocks_symmetric_psd(self, rng):
        L = canonicalize(random_block_lower(rng, 2, 3))
        for B in L.diagonal_blocks():
            np.testing.assert_array_equal(B, B.T)
            assert np.linalg.eigvalsh(B).min() > -1e-12

    def test_scalar_zero_diagonal_uses_sub_diagonal(self):
        L = LowerBlockFactor(np.array([[0.0, 0.0], [-2.0, 1.0]]))
        np.testing.assert_array_equal(canonicalize(L).matrix, [[0.0, 0.0], [2.0, 1.0]])


class TestClassesEqual:
    def test_different_classes(self):
        L = LowerBlockFactor(np.array([[1.0, 0.0], [1.0, 1.0]]))
        M = LowerBlockFactor(np.array([[1.0, 0.0], [-1.0, 1.0]]))
        # same marginal variances, opposite correlation
        assert not classes_equal(L, M)

    def test_shape_mismatch(self):
        with pytest.raises(DimensionMismatch, match="T mismatch"):
            classes_equal(LowerBlockFactor(np.eye(2)), LowerBlockFactor(np.eye(3)))


class TestAR1:
    def test_entries(self):
        L = ar1_factor(AR1Spec((0.0, 0.5, -2.0), (1.0, 2.0, 3.0)))
        expected = [[1.0, 0, 0], [0.5, 2.0, 0], [-1.0, -4.0, 3.0]]
        np.testing.assert_allclose(L.matrix, expected)

    def test_matches_recursion(self, rng):
        T = 7
        alphas = rng.uniform(-1, 1, T)
        sigmas = rng.uniform(0.5, 2, T)
        g = rng.standard_normal(T)
        x = np.zeros(T)
        x[0] = sigmas[0] * g[0]
        for t in range(1, T):
            x[t] = alphas[t] * x[t - 1] + sigmas[t] * g[t]
        L = ar1_factor(AR1Spec(tuple(alphas), tuple(sigmas)))
        np.testing.assert_allclose(L.matrix @ g, x, atol=1e-12)

    def test_nonpositive_sigma(self):
        with pytest.raises(NonPositiveSigma):
            AR1Spec((0.0, 0.5), (1.0, 0.0))

    def test_length_mismatch(self):
        with pytest.raises(DimensionMismatch):
            AR1Spec((0.0,), (1.0, 1.0))


def test_gaussian_process_mean_length():
    with pytest.raises(DimensionMismatch):
        GaussianProcess(np.zeros(3), LowerBlockFactor(np.eye(2)))
