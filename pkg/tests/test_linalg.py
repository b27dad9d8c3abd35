# tests/test_linalg.py
"""数値カーネルのテスト"""

import numpy as np
import pytest
from numpy.testing import assert_allclose

from app.core.errors import (
    DimensionMismatchError,
    NonFiniteError,
    NonSquareError,
    NotHermitianError,
    NotPositiveError,
    SingularBelowCutoffError,
)
from app.core.linalg import (
    expectation,
    hermitian_eig,
    hermitian_part,
    is_hermitian,
    kron,
    partial_trace,
    partial_transpose,
    pinv_symmetric,
    psd_inv_sqrt,
    psd_sqrt,
    svd_real,
    trace_norm,
)

SX = np.array([[0, 1], [1, 0]], dtype=complex)
SZ = np.diag([1.0, -1.0]).astype(complex)


class TestHermitian:
    def test_eig_sorted(self):
        """固有値は昇順"""
        evals, _ = hermitian_eig(np.diag([2.0, 1.0]))
        assert_allclose(evals, [1.0, 2.0])
        evals, _ = hermitian_eig(SX)
        assert_allclose(evals, [-1.0, 1.0], atol=1e-15)

    def test_eig_reconstructs(self, random_hermitian):
        H = random_hermitian(6)
        evals, evecs = hermitian_eig(H)
        assert_allclose((evecs * evals) @ evecs.conj().T, H, atol=1e-12)

    def test_rejects_non_square(self):
        with pytest.raises(NonSquareError):
            hermitian_part(np.zeros((2, 3)))

    def test_rejects_asymmetric(self):
        with pytest.raises(NotHermitianError):
            hermitian_eig(np.array([[0.0, 1.0], [0.0, 0.0]]))
        assert not is_hermitian(np.array([[0.0, 1.0], [0.0, 0.0]]))

    def test_rejects_nan(self):
        with pytest.raises(NonFiniteError):
            hermitian_part(np.array([[np.nan, 0.0], [0.0, 1.0]]))

    def test_symmetrizes_within_tolerance(self):
        H = np.array([[1.0, 1e-12], [0.0, 1.0]])
        out = hermitian_part(H)
        assert_allclose(out, out.conj().T)


class TestSvdAndTraceNorm:
    def test_identity(self):
        U, s, V = svd_real(np.eye(3))
        assert_allclose(s, np.ones(3))

    def test_sign_flip(self):
        """diag(1,−1,1) の特異値はすべて 1、トレースノルムは 3"""
        M = np.diag([1.0, -1.0, 1.0])
        _, s, _ = svd_real(M)
        assert_allclose(s, np.ones(3))
        assert trace_norm(M) == pytest.approx(3.0)

    def test_rectangular_reconstruction(self, rng):
        M = rng.normal(size=(4, 9))
        U, s, V = svd_real(M)
        assert U.shape == (4, 4) and V.shape == (9, 9)
        assert np.all(np.diff(s) <= 0)
        assert_allclose(U @ np.diag(s) @ V[:, :4].T, M, atol=1e-12)
        assert_allclose(V.T @ V, np.eye(9), atol=1e-12)

    def test_zero_matrix(self):
        assert trace_norm(np.zeros((3, 3))) == 0.0

    def test_bounds_trace(self, rng):
        M = rng.normal(size=(5, 5))
        assert trace_norm(M) >= abs(np.trace(M)) - 1e-12

    def test_methods_agree(self, rng):
        M = rng.normal(size=(6, 6)) + 1j * rng.normal(size=(6, 6))
        assert trace_norm(M, "svd") == pytest.approx(trace_norm(M, "eig"), abs=1e-8)

    def test_unknown_method(self):
        with pytest.raises(ValueError):
            trace_norm(np.eye(2), "qr")


class TestPsd:
    def test_sqrt(self):
        assert_allclose(psd_sqrt(np.eye(3)), np.eye(3), atol=1e-14)
        assert_allclose(psd_sqrt(np.diag([4.0, 9.0])), np.diag([2.0, 3.0]), atol=1e-14)

    def test_sqrt_squares_back(self, random_density):
        rho = random_density(5)
        root = psd_sqrt(rho)
        assert_allclose(root @ root, rho, atol=1e-12)

    def test_inv_sqrt(self, random_density):
        rho = random_density(4)
        g = psd_inv_sqrt(rho, cutoff=1e-10)
        assert_allclose(g @ rho @ g, np.eye(4), atol=1e-9)

    def test_inv_sqrt_singular(self):
        with pytest.raises(SingularBelowCutoffError):
            psd_inv_sqrt(np.diag([1.0, 0.0]), cutoff=1e-10)

    def test_negative_eigenvalue(self):
        with pytest.raises(NotPositiveError):
            psd_sqrt(np.diag([1.0, -0.5]))

    def test_clamp_tiny_negative(self):
        root = psd_sqrt(np.diag([1.0, -1e-12]))
        assert_allclose(root, np.diag([1.0, 0.0]), atol=1e-14)

    def test_pinv_penrose(self, rng):
        X = rng.normal(size=(5, 2))
        S = X @ X.T
        P = pinv_symmetric(S)
        assert_allclose(S @ P @ S, S, atol=1e-10)
        assert_allclose(P @ S @ P, P, atol=1e-10)


class TestTensor:
    def test_kron(self):
        assert_allclose(kron(SZ, SZ), np.diag([1.0, -1.0, -1.0, 1.0]))

    def test_trace_multiplicative(self, random_hermitian):
        X, Y = random_hermitian(2), random_hermitian(3)
        assert np.trace(kron(X, Y)) == pytest.approx(np.trace(X) * np.trace(Y))

    def test_partial_trace_product(self, random_density):
        ra, rb = random_density(2), random_density(3)
        rho = kron(ra, rb)
        assert_allclose(partial_trace(rho, 2, 3, "B"), ra, atol=1e-14)
        assert_allclose(partial_trace(rho, 2, 3, "A"), rb, atol=1e-14)

    def test_partial_trace_bell(self):
        psi = np.array([1, 0, 0, 1]) / np.sqrt(2)
        rho = np.outer(psi, psi)
        assert_allclose(partial_trace(rho, 2, 2, "B"), np.eye(2) / 2)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            partial_trace(np.eye(6), 2, 2, "A")
        with pytest.raises(ValueError):
            partial_trace(np.eye(4), 2, 2, "C")

    def test_partial_transpose_involution(self, random_density):
        rho = random_density(6)
        twice = partial_transpose(partial_transpose(rho, 2, 3, "B"), 2, 3, "B")
        assert_allclose(twice, rho)
        both = partial_transpose(partial_transpose(rho, 2, 3, "A"), 2, 3, "B")
        assert_allclose(both, rho.T)

    def test_singlet_partial_transpose(self):
        """一重項の部分転置の最小固有値は −1/2"""
        psi = np.array([0, 1, -1, 0]) / np.sqrt(2)
        pt = partial_transpose(np.outer(psi, psi), 2, 2, "B")
        assert np.linalg.eigvalsh(pt)[0] == pytest.approx(-0.5)

    def test_expectation(self):
        rho = np.diag([0.25, 0.75])
        assert expectation(rho, SZ) == pytest.approx(-0.5)
