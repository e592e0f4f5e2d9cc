import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from povmcert.qcore import (
    IDENTITY2,
    SIGMA_X,
    SIGMA_Z,
    TOL,
    DensityOp,
    Povm,
    bloch_effect,
    born,
    fidelity_with_pure,
    haar_state,
    haar_unitary,
    hermitian_eig,
    is_psd,
    kron,
    partial_trace,
    psi_plus,
)
from povmcert.scenarios import functional_catalog, ideal_strategy
from povmcert.seesaw import bell_operator


def psi_plus_prob(theta_a, theta_b):
    """P(00) for |psi+> with projectors P(theta_a), P(theta_b)."""
    return (1 - math.cos(theta_a + theta_b)) / 4


def charpoly_roots(m):
    """Eigenvalues through Faddeev-LeVerrier coefficients and polynomial roots."""
    n = m.shape[0]
    coeffs = [1.0 + 0j]
    mk = np.zeros_like(m)
    for k in range(1, n + 1):
        mk = m @ (mk + coeffs[-1] * np.eye(n))
        coeffs.append(-np.trace(mk) / k)
    return np.sort(np.roots(coeffs).real)[::-1]


@st.composite
def hermitian_matrices(draw, max_dim=6):
    n = draw(st.integers(1, max_dim))
    seed = draw(st.integers(0, 2**32 - 1))
    rng = np.random.default_rng(seed)
    z = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return (z + z.conj().T) / 2


class TestKron:
    def test_identities(self):
        np.testing.assert_array_equal(kron(IDENTITY2, IDENTITY2), np.eye(4))

    def test_pauli_z(self):
        np.testing.assert_array_equal(kron(SIGMA_Z, SIGMA_Z), np.diag([1, -1, -1, 1]))

    def test_born_through_kron(self):
        rho = DensityOp.pure(psi_plus(), (2, 2))
        assert born(rho, bloch_effect(0), bloch_effect(math.pi)) == pytest.approx(0.5, abs=1e-12)


class TestHermitianEig:
    def test_sigma_x(self):
        w, _ = hermitian_eig(SIGMA_X)
        np.testing.assert_allclose(w, [1, -1], atol=1e-14)

    @pytest.mark.parametrize("theta", np.linspace(0, 2 * np.pi, 7))
    def test_projector_spectrum(self, theta):
        w, _ = hermitian_eig(bloch_effect(theta))
        np.testing.assert_allclose(w, [1, 0], atol=1e-14)

    def test_ideal_bell_operator_against_charpoly(self):
        s = ideal_strategy("I_optimal")
        w_op = bell_operator(functional_catalog("I"), s.alice_povms, s.bob_povms)
        w, _ = hermitian_eig(w_op)
        oracle = charpoly_roots(w_op)
        np.testing.assert_allclose(w, oracle, atol=1e-9)
        assert w[0] == pytest.approx(3 * math.sqrt(3) / 4, abs=1e-12)

    def test_rejects_non_hermitian(self):
        with pytest.raises(ValueError):
            hermitian_eig(np.array([[0, 1], [0, 0]]))

    def test_phase_convention(self):
        rng = np.random.default_rng(3)
        u = haar_unitary(4, rng)
        m = u @ np.diag([3.0, 1.0, -1.0, -2.0]) @ u.conj().T
        _, v = hermitian_eig(m)
        for j in range(4):
            first = v[np.flatnonzero(np.abs(v[:, j]) > 1e-12)[0], j]
            assert abs(first.imag) < 1e-12 and first.real > 0

    def test_degenerate_order_is_deterministic(self):
        m = np.diag([1.0, 1.0, 0.0]).astype(complex)
        _, v1 = hermitian_eig(m)
        _, v2 = hermitian_eig(m.copy())
        np.testing.assert_array_equal(v1, v2)

    @settings(max_examples=60, deadline=None)
    @given(hermitian_matrices())
    def test_reconstruction(self, m):
        w, v = hermitian_eig(m)
        assert np.all(np.diff(w) <= 1e-12)
        np.testing.assert_allclose(v @ np.diag(w) @ v.conj().T, m, atol=TOL.spectral)
        np.testing.assert_allclose(v.conj().T @ v, np.eye(len(w)), atol=1e-10)


class TestBorn:
    def test_maximally_mixed(self):
        rho = DensityOp.maximally_mixed((2, 2))
        assert born(rho, bloch_effect(0.3), bloch_effect(2.1)) == pytest.approx(0.25, abs=1e-12)

    def test_ideal_chain_term(self):
        rho = DensityOp.pure(psi_plus(), (2, 2))
        p = born(rho, bloch_effect(3 * math.pi / 2), bloch_effect(-2 * math.pi / 3))
        assert p == pytest.approx((2 + math.sqrt(3)) / 8, abs=1e-12)
        assert p == pytest.approx(psi_plus_prob(3 * math.pi / 2, -2 * math.pi / 3), abs=1e-12)

    def test_vanishing_trine_term(self):
        rho = DensityOp.pure(psi_plus(), (2, 2))
        p = born(rho, 2 / 3 * bloch_effect(2 * math.pi / 3), bloch_effect(-2 * math.pi / 3))
        assert p == pytest.approx(0.0, abs=1e-12)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            born(DensityOp.maximally_mixed((2, 2)), np.eye(3), np.eye(2))

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_probabilities_sum_to_one(self, seed):
        rng = np.random.default_rng(seed)
        rho = DensityOp.pure(haar_state(4, rng), (2, 2))
        ma = Povm.projective(rng.uniform(0, 2 * np.pi))
        mb = Povm((2 / 3 * bloch_effect(0), 2 / 3 * bloch_effect(2 * np.pi / 3), 2 / 3 * bloch_effect(4 * np.pi / 3)))
        total = sum(born(rho, ea, eb) for ea in ma.effects for eb in mb.effects)
        assert total == pytest.approx(1.0, abs=1e-9)


class TestBlochEffect:
    def test_poles(self):
        np.testing.assert_allclose(bloch_effect(0), np.diag([1, 0]), atol=1e-15)
        np.testing.assert_allclose(bloch_effect(math.pi), np.diag([0, 1]), atol=1e-15)

    def test_two_pi_over_three(self):
        r3 = math.sqrt(3)
        np.testing.assert_allclose(bloch_effect(2 * math.pi / 3), [[0.25, r3 / 4], [r3 / 4, 0.75]], atol=1e-15)

    def test_idempotent_on_grid(self):
        for theta in np.linspace(0, 2 * np.pi, 100):
            p = bloch_effect(theta)
            np.testing.assert_allclose(p @ p, p, atol=1e-14)


class TestFidelity:
    def test_pure(self):
        phi = psi_plus()
        assert fidelity_with_pure(DensityOp.pure(phi), phi) == pytest.approx(1.0)

    def test_mixed(self):
        assert fidelity_with_pure(DensityOp.maximally_mixed((2, 2)), psi_plus()) == pytest.approx(0.25)

    def test_werner(self):
        rho = DensityOp.pure(psi_plus(), (2, 2)).mix(DensityOp.maximally_mixed((2, 2)), 0.9)
        assert fidelity_with_pure(rho, psi_plus()) == pytest.approx(0.925, abs=1e-12)

    def test_unnormalized_rejected(self):
        with pytest.raises(ValueError):
            fidelity_with_pure(DensityOp.maximally_mixed((2, 2)), 2 * psi_plus())


class TestValidation:
    def test_density_trace(self):
        with pytest.raises(ValueError):
            DensityOp(np.eye(2))

    def test_density_negative(self):
        with pytest.raises(ValueError):
            DensityOp(np.diag([1.5, -0.5]))

    def test_povm_completeness(self):
        with pytest.raises(ValueError):
            Povm((bloch_effect(0), bloch_effect(0)))

    def test_povm_positivity(self):
        with pytest.raises(ValueError):
            Povm((np.diag([1.2, 0]), np.diag([-0.2, 1])))

    def test_from_raw_repairs(self):
        rng = np.random.default_rng(1)
        raw = [e + 1e-6 * rng.standard_normal((2, 2)) for e in Povm.projective(0.4).effects]
        m = Povm.from_raw(raw)
        np.testing.assert_allclose(sum(m.effects), np.eye(2), atol=1e-12)
        assert all(is_psd(e) for e in m.effects)

    def test_partial_trace(self):
        rho = DensityOp.pure(psi_plus(), (2, 2)).matrix
        np.testing.assert_allclose(partial_trace(rho, (2, 2), 0), np.eye(2) / 2, atol=1e-15)
        np.testing.assert_allclose(partial_trace(rho, (2, 2), 1), np.eye(2) / 2, atol=1e-15)

    def test_values_are_immutable(self):
        rho = DensityOp.maximally_mixed((2,))
        with pytest.raises(ValueError):
            rho.matrix[0, 0] = 1
