# tests/test_bloch.py
"""生成子と Bloch 表示のテスト"""

import numpy as np
import pytest
from numpy.testing import assert_allclose

from app.core.bloch import (
    BlochState,
    bloch_to_observable,
    bloch_to_state,
    casimir,
    decompose_bipartite,
    extended_basis,
    observable_to_bloch,
    state_to_bloch,
    su_generators,
)
from app.core.errors import DimensionMismatchError, InvalidStateError, ParameterRangeError
from app.core.states import BipartiteState, max_entangled, product_state, werner


class TestGenerators:
    def test_pauli(self):
        """d=2 は (σx, σy, σz)"""
        g = su_generators(2).generators
        assert_allclose(g[0], [[0, 1], [1, 0]])
        assert_allclose(g[1], [[0, -1j], [1j, 0]])
        assert_allclose(g[2], [[1, 0], [0, -1]])

    @pytest.mark.parametrize("d", range(2, 10))
    def test_orthonormal_traceless(self, d):
        basis = su_generators(d)
        assert len(basis) == d * d - 1
        assert_allclose(basis.gram(), 2 * np.eye(d * d - 1), atol=1e-12)
        assert_allclose(np.trace(basis.generators, axis1=1, axis2=2), 0, atol=1e-12)
        for g in basis.generators:
            assert_allclose(g, g.conj().T)

    @pytest.mark.parametrize("d", [2, 3, 5])
    def test_casimir(self, d):
        assert_allclose(casimir(d), 2 * (d * d - 1) / d * np.eye(d), atol=1e-12)

    def test_extended_basis(self):
        pi = extended_basis(3)
        gram = np.einsum("mij,nji->mn", pi, pi).real
        assert pi.shape == (9, 3, 3)
        assert_allclose(gram, 2 * np.eye(9), atol=1e-12)

    def test_read_only(self):
        with pytest.raises(ValueError):
            su_generators(3).generators[0, 0, 0] = 5.0

    def test_rejects_small_dimension(self):
        with pytest.raises(ParameterRangeError):
            su_generators(1)


class TestSingleSystem:
    def test_maximally_mixed(self):
        assert_allclose(state_to_bloch(np.eye(3) / 3).r, 0, atol=1e-15)

    def test_qubit_up(self):
        assert_allclose(state_to_bloch(np.diag([1.0, 0.0])).r, [0, 0, 1], atol=1e-15)

    def test_pure_state_norm(self, rng):
        psi = rng.normal(size=3) + 1j * rng.normal(size=3)
        psi /= np.linalg.norm(psi)
        r = state_to_bloch(np.outer(psi, psi.conj()))
        assert r.norm == pytest.approx(np.sqrt(4 / 3))
        assert r.norm == pytest.approx(BlochState.max_norm(3))

    def test_round_trip(self, random_density):
        rho = random_density(4)
        assert_allclose(bloch_to_state(state_to_bloch(rho).r, 4), rho, atol=1e-12)

    def test_rejects_bad_trace(self):
        with pytest.raises(InvalidStateError):
            state_to_bloch(np.eye(2))

    def test_observable_identity(self):
        t, a = observable_to_bloch(np.eye(2))
        assert t == pytest.approx(2.0)
        assert_allclose(a, 0, atol=1e-15)

    def test_observable_sigma_z(self):
        t, a = observable_to_bloch(np.diag([1.0, -1.0]))
        assert t == pytest.approx(0.0)
        assert_allclose(a, [0, 0, 1], atol=1e-15)

    def test_observable_round_trip(self, random_hermitian):
        A = random_hermitian(3)
        t, a = observable_to_bloch(A)
        assert_allclose(bloch_to_observable(t, a, 3), A, atol=1e-12)

    def test_wrong_length(self):
        with pytest.raises(DimensionMismatchError):
            bloch_to_observable(0.0, np.zeros(4), 3)


class TestBipartite:
    def test_chi_corner(self):
        state = werner(3, 0.2)
        dec = decompose_bipartite(state)
        assert dec.chi[0, 0] == pytest.approx(2 / 3)

    def test_product_state(self, random_density):
        ra, rb = random_density(2), random_density(3)
        dec = decompose_bipartite(product_state(ra, rb))
        r_a, r_b = state_to_bloch(ra).r, state_to_bloch(rb).r
        assert_allclose(dec.a, r_a, atol=1e-12)
        assert_allclose(dec.b, r_b, atol=1e-12)
        assert_allclose(dec.T, np.outer(r_a, r_b), atol=1e-12)

    def test_werner_correlations(self):
        """Werner 状態: a = b = 0, T = c·𝟙"""
        d, phi = 3, -0.4
        dec = decompose_bipartite(werner(d, phi))
        c = 2 * (d * phi - 1) / (d * (d * d - 1))
        assert_allclose(dec.a, 0, atol=1e-12)
        assert_allclose(dec.b, 0, atol=1e-12)
        assert_allclose(dec.T, c * np.eye(d * d - 1), atol=1e-12)

    def test_bell(self):
        dec = decompose_bipartite(max_entangled(2))
        assert_allclose(dec.T, np.diag([1.0, -1.0, 1.0]), atol=1e-12)

    @pytest.mark.parametrize("dims", [(2, 2), (2, 3), (3, 2), (3, 4)])
    def test_reconstruct(self, random_density, dims):
        dA, dB = dims
        state = BipartiteState(dA, dB, random_density(dA * dB))
        assert_allclose(decompose_bipartite(state).reconstruct(), state.rho, atol=1e-12)
