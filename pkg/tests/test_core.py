"""Matrix containers, inner products, and the Jacobi eigensolver."""

import numpy as np
import pytest

from ssgk import (
    EigenDecomposition,
    FactorSet,
    SymmetricMatrix,
    frobenius_residual,
    matrix_inner,
    rank_one_inner,
    reconstruct,
    symmetric_eig,
)


def random_symmetric(rng, n):
    e = rng.standard_normal((n, n))
    return SymmetricMatrix(0.5 * (e + e.T))


class TestSymmetricMatrix:
    def test_stores_symmetrized_values(self):
        x = SymmetricMatrix([[1.0, 2.0], [2.0, 3.0]])
        assert x.dim == 2
        np.testing.assert_array_equal(x.values, x.values.T)

    def test_symmetrizes_with_warning_on_large_asymmetry(self):
        with pytest.warns(UserWarning, match="input symmetrized"):
            x = SymmetricMatrix([[0.0, 1.0], [0.0, 0.0]])
        np.testing.assert_allclose(x.values, [[0.0, 0.5], [0.5, 0.0]])

    def test_tiny_asymmetry_is_silent(self):
        v = np.array([[1.0, 2.0], [2.0 + 1e-14, 3.0]])
        with np.testing.assert_no_warnings():
            SymmetricMatrix(v)

    def test_values_are_read_only(self):
        x = SymmetricMatrix(np.eye(2))
        with pytest.raises(ValueError):
            x.values[0, 0] = 5.0

    def test_rejects_non_square(self):
        with pytest.raises(ValueError, match="square"):
            SymmetricMatrix(np.ones((2, 3)))

    def test_rejects_non_finite(self):
        with pytest.raises(ValueError, match="finite"):
            SymmetricMatrix([[np.nan, 0.0], [0.0, 0.0]])

    def test_rejects_empty(self):
        with pytest.raises(ValueError):
            SymmetricMatrix(np.zeros((0, 0)))


class TestFactorSet:
    def test_rank_and_dim(self):
        f = FactorSet([[1.0, 0.0, 2.0], [0.0, 1.0, 0.0]])
        assert f.rank == 2
        assert f.dim == 3

    def test_rejects_empty_rank(self):
        with pytest.raises(ValueError, match="at least one"):
            FactorSet(np.zeros((0, 3)))

    def test_rejects_non_finite(self):
        with pytest.raises(ValueError, match="finite"):
            FactorSet([[np.inf, 0.0]])

    def test_canonical_flag_checks_sign_convention(self):
        FactorSet([[3.0, -1.0]], canonical_sign=True)
        with pytest.raises(ValueError, match="sign convention"):
            FactorSet([[-3.0, 1.0]], canonical_sign=True)


class TestMatrixInner:
    def test_identity_with_itself(self):
        assert matrix_inner(SymmetricMatrix(np.eye(2)), SymmetricMatrix(np.eye(2))) == 2.0

    def test_zero_annihilates(self):
        x = SymmetricMatrix([[1.0, 2.0], [2.0, 3.0]])
        assert matrix_inner(x, SymmetricMatrix(np.zeros((2, 2)))) == 0.0

    def test_direct_expansion(self):
        a = SymmetricMatrix([[1.0, 2.0], [2.0, 3.0]])
        b = SymmetricMatrix([[0.0, 1.0], [1.0, 0.0]])
        assert matrix_inner(a, b) == 4.0

    def test_accepts_plain_arrays(self):
        a = np.array([[1.0, 2.0], [3.0, 4.0]])
        assert matrix_inner(a, a) == pytest.approx(30.0)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError, match="shape mismatch"):
            matrix_inner(np.eye(2), np.eye(3))

    def test_symmetric_and_bilinear(self):
        rng = np.random.default_rng(1)
        for _ in range(30):
            a = rng.standard_normal((4, 4))
            b = rng.standard_normal((4, 4))
            c = rng.standard_normal((4, 4))
            s, t = rng.standard_normal(2)
            assert matrix_inner(a, b) == pytest.approx(matrix_inner(b, a), rel=1e-12)
            assert matrix_inner(a, s * b + t * c) == pytest.approx(
                s * matrix_inner(a, b) + t * matrix_inner(a, c), rel=1e-10, abs=1e-12
            )


class TestRankOneInner:
    def test_orthogonal_pair(self):
        assert rank_one_inner([1, 0], [0, 1], [1, 1], [1, 1]) == 1.0

    def test_direct_evaluation(self):
        assert rank_one_inner([1, 2], [3, 1], [0, 1], [1, 1]) == 8.0

    def test_zero_operand(self):
        assert rank_one_inner([1, 2], [3, 4], [0, 0], [1, 1]) == 0.0

    def test_length_mismatch(self):
        with pytest.raises(ValueError, match="mismatched lengths"):
            rank_one_inner([1, 2], [3, 4], [1, 2, 3], [1, 2])

    def test_matches_outer_product_inner(self):
        rng = np.random.default_rng(2)
        for _ in range(100):
            a, u = rng.standard_normal((2, 5))
            b, v = rng.standard_normal((2, 3))
            direct = rank_one_inner(a, b, u, v)
            expanded = matrix_inner(np.outer(a, b), np.outer(u, v))
            assert direct == pytest.approx(expanded, rel=1e-12, abs=1e-12)


class TestReconstruct:
    def test_identity_from_unit_vectors(self):
        f = FactorSet([[1.0, 0.0], [0.0, 1.0]])
        np.testing.assert_array_equal(reconstruct(f).values, np.eye(2))

    def test_single_outer_product(self):
        f = FactorSet([[3.0, 4.0]])
        np.testing.assert_array_equal(
            reconstruct(f).values, [[9.0, 12.0], [12.0, 16.0]]
        )

    def test_always_psd(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            f = FactorSet(rng.standard_normal((3, 5)))
            w = symmetric_eig(reconstruct(f)).eigenvalues
            assert w.min() >= -1e-8 * max(1.0, w.max())


class TestFrobeniusResidual:
    def test_exact_reconstruction(self):
        x = SymmetricMatrix(np.eye(2))
        assert frobenius_residual(x, FactorSet([[1.0, 0.0], [0.0, 1.0]])) == 0.0

    def test_unit_residual_from_zero_target(self):
        x = SymmetricMatrix(np.zeros((2, 2)))
        assert frobenius_residual(x, FactorSet([[1.0, 0.0]])) == 1.0

    def test_exact_rank_one(self):
        x = SymmetricMatrix([[9.0, 12.0], [12.0, 16.0]])
        assert frobenius_residual(x, FactorSet([[3.0, 4.0]])) == 0.0

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError, match="dimension"):
            frobenius_residual(SymmetricMatrix(np.eye(3)), FactorSet([[1.0, 0.0]]))


class TestSymmetricEig:
    def test_diagonal_matrix(self):
        eig = symmetric_eig(SymmetricMatrix(np.diag([3.0, 1.0])))
        np.testing.assert_allclose(eig.eigenvalues, [3.0, 1.0])
        np.testing.assert_allclose(np.abs(eig.eigenvectors), np.eye(2), atol=1e-12)

    def test_exchange_matrix_spectrum(self):
        eig = symmetric_eig(SymmetricMatrix([[0.0, 1.0], [1.0, 0.0]]))
        np.testing.assert_allclose(eig.eigenvalues, [1.0, -1.0], atol=1e-12)

    def test_tied_eigenvalues_keep_index_order(self):
        eig = symmetric_eig(SymmetricMatrix(2.0 * np.eye(3)))
        np.testing.assert_array_equal(eig.eigenvalues, [2.0, 2.0, 2.0])
        np.testing.assert_array_equal(eig.eigenvectors, np.eye(3))

    def test_reconstruction_and_orthonormality(self):
        rng = np.random.default_rng(4)
        for _ in range(20):
            x = random_symmetric(rng, 6)
            eig = symmetric_eig(x)
            v, w = eig.eigenvectors, eig.eigenvalues
            rebuilt = v @ np.diag(w) @ v.T
            scale = np.linalg.norm(x.values)
            assert np.linalg.norm(rebuilt - x.values) <= 1e-8 * max(1.0, scale)
            np.testing.assert_allclose(v.T @ v, np.eye(6), atol=1e-8)
            assert np.all(np.diff(w) <= 0)

    def test_trace_and_norm_identities(self):
        rng = np.random.default_rng(5)
        for _ in range(20):
            x = random_symmetric(rng, 5)
            w = symmetric_eig(x).eigenvalues
            trace = np.trace(x.values)
            assert w.sum() == pytest.approx(trace, rel=1e-8, abs=1e-10)
            assert np.sum(w * w) == pytest.approx(
                np.linalg.norm(x.values) ** 2, rel=1e-8
            )

    def test_zero_matrix(self):
        eig = symmetric_eig(SymmetricMatrix(np.zeros((3, 3))))
        np.testing.assert_array_equal(eig.eigenvalues, np.zeros(3))

    def test_decomposition_rejects_ascending_order(self):
        with pytest.raises(ValueError, match="descending"):
            EigenDecomposition(np.array([1.0, 2.0]), np.eye(2))
