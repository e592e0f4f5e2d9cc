import itertools
import json
import math

import numpy as np
import pytest

from povmcert import sagnac
from povmcert.qcore import DensityOp, Povm, bloch_effect, born, haar_state
from povmcert.scenarios import (
    QuantumStrategy,
    behavior_from_strategy,
    evaluate,
    functional_catalog,
    ideal_strategy,
    trine,
)
from povmcert.sagnac import SagnacConfig

R2 = math.sqrt(2) / 2
AH, AV, BH, BV = np.eye(4, dtype=complex)


@pytest.fixture(scope="module")
def trine_fit():
    return sagnac.fit_transmitted_angle(trine())


class TestPlates:
    def test_zero(self):
        np.testing.assert_allclose(sagnac.u_hwp(0), np.diag([1, -1]), atol=1e-15)

    def test_45(self):
        np.testing.assert_allclose(sagnac.u_hwp(45), [[0, 1], [1, 0]], atol=1e-15)

    def test_112_5(self):
        np.testing.assert_allclose(sagnac.u_hwp(112.5), [[-R2, -R2], [-R2, R2]], atol=1e-15)

    @pytest.mark.parametrize("g", [0.0, 17.3, 117.37, 200.0])
    def test_properties(self, g):
        u = sagnac.u_hwp(g)
        np.testing.assert_allclose(u, u.conj().T, atol=1e-15)
        np.testing.assert_allclose(u @ u, np.eye(2), atol=1e-15)
        assert np.linalg.det(u).real == pytest.approx(-1.0)

    def test_config_is_mod_180(self):
        assert SagnacConfig(gamma_t=297.37).gamma_t == pytest.approx(117.37)
        np.testing.assert_allclose(
            sagnac.implemented_effects(SagnacConfig(gamma_t=297.37)),
            sagnac.implemented_effects(SagnacConfig()),
            atol=1e-12,
        )


class TestBeamSplitter:
    def test_transmits_h(self):
        np.testing.assert_allclose(sagnac.u_pbs() @ AH, AH, atol=1e-15)
        np.testing.assert_allclose(sagnac.u_pbs() @ BH, BH, atol=1e-15)

    def test_reflects_v(self):
        np.testing.assert_allclose(sagnac.u_pbs() @ AV, 1j * BV, atol=1e-15)
        np.testing.assert_allclose(sagnac.u_pbs() @ BV, 1j * AV, atol=1e-15)

    def test_unitary(self):
        u = sagnac.u_pbs()
        np.testing.assert_allclose(u.conj().T @ u, np.eye(4), atol=1e-15)

    def test_mode_order(self):
        assert sagnac.mode(sagnac.PATH_B, sagnac.V) == 3
        assert sagnac.mode(sagnac.PATH_A, sagnac.H) == 0


class TestInterferometer:
    def test_zero_angles_by_hand(self):
        # each step written out: PBS, plates (diag(1,-1) on both paths), PBS
        pbs = np.zeros((4, 4), dtype=complex)
        pbs[0, 0] = pbs[2, 2] = 1
        pbs[3, 1] = pbs[1, 3] = 1j
        plates = np.diag([1, -1, 1, -1]).astype(complex)
        expected = pbs @ plates @ pbs
        np.testing.assert_allclose(sagnac.sagnac_unitary(SagnacConfig(0, 0, 0)), expected, atol=1e-15)
        # V leaves through path b, flips sign, and comes back to path a
        np.testing.assert_allclose(expected, np.eye(4), atol=1e-15)

    def test_random_angles_unitary(self):
        rng = np.random.default_rng(0)
        for gr, gt in rng.uniform(0, 180, size=(100, 2)):
            u = sagnac.sagnac_unitary(SagnacConfig(gr, gt, 0.0))
            np.testing.assert_allclose(u.conj().T @ u, np.eye(4), atol=1e-12)

    def test_a2_is_the_b_block(self):
        cfg = SagnacConfig()
        np.testing.assert_allclose(sagnac.kraus_operators(cfg)[2], sagnac.sagnac_unitary(cfg)[2:, :2], atol=1e-15)

    def test_zero_angles_route_v_to_outcome_0(self):
        a0, a1, a2 = sagnac.kraus_operators(SagnacConfig(0, 0, 0))
        np.testing.assert_allclose(a2, 0, atol=1e-15)
        pol = np.array([0.6, 0.8j])
        np.testing.assert_allclose(sagnac.outcome_probabilities(SagnacConfig(0, 0, 0), pol), [0.64, 0.36, 0.0], atol=1e-12)

    def test_rotated_return_plate_routes_v_to_outcome_2(self):
        pol = np.array([0.6, 0.8])
        p = sagnac.outcome_probabilities(SagnacConfig(45, 0, 0), pol)
        np.testing.assert_allclose(p, [0.0, 0.36, 0.64], atol=1e-12)

    def test_completeness_on_grid(self):
        for gr, gt, go in itertools.product(np.linspace(0, 180, 20), repeat=3):
            cfg = SagnacConfig(gr, gt, go)
            assert sagnac.completeness_error(cfg) <= 1e-10
            # the Povm constructor rejects non-PSD or incomplete effects
            sagnac.implemented_povm(cfg)

    def test_optical_probabilities_match_born(self):
        rng = np.random.default_rng(1)
        cfg = SagnacConfig()
        m = sagnac.implemented_povm(cfg)
        for _ in range(20):
            pol = haar_state(2, rng)
            p = sagnac.outcome_probabilities(cfg, pol)
            # a one-dimensional partner extends the qubit to a bipartite state
            rho = DensityOp.pure(pol, (2, 1))
            for k in range(3):
                assert p[k] == pytest.approx(born(rho, m.effects[k], np.eye(1)), abs=1e-12)

    def test_optical_state(self):
        s = sagnac.OpticalState.in_path_a([1, 1j])
        assert s.path_weights() == pytest.approx((1.0, 0.0))
        with pytest.raises(ValueError):
            sagnac.OpticalState(np.ones(4))


class TestTrine:
    def test_published_angle(self):
        d = sagnac.povm_distance(sagnac.implemented_effects(SagnacConfig()), trine())
        assert d <= 1e-3

    def test_fit(self, trine_fit):
        assert trine_fit.gamma_t == pytest.approx(117.37, abs=0.01)
        assert trine_fit.residual <= 1e-9
        assert trine_fit.reachable
        # frozen from this fit
        assert trine_fit.gamma_t == pytest.approx(117.3678052, abs=1e-6)

    def test_mirror_angle(self, trine_fit):
        mirror = SagnacConfig(gamma_t=180 - trine_fit.gamma_t)
        assert sagnac.povm_distance(sagnac.implemented_effects(mirror), trine()) <= 1e-9

    @pytest.mark.parametrize("gamma", [95.5, 133.0, 150.123, 179.2])
    def test_round_trip(self, gamma):
        target = sagnac.implemented_povm(SagnacConfig(gamma_t=gamma))
        fit = sagnac.fit_transmitted_angle(target)
        assert fit.residual <= 1e-9
        assert fit.gamma_t == pytest.approx(gamma, abs=1e-6)

    def test_padded_binary_target(self):
        p = bloch_effect(0.7)
        target = Povm((p, np.eye(2) - p, np.zeros((2, 2))))
        fit = sagnac.fit_transmitted_angle(target)
        assert fit.residual >= 0
        assert fit.reachable == (fit.residual <= sagnac.UNREACHABLE_RESIDUAL)

    def test_target_shape(self):
        with pytest.raises(ValueError):
            sagnac.fit_transmitted_angle(Povm.projective(0.0))

    def test_functional_barely_moves(self, trine_fit):
        s = ideal_strategy("I_optimal")
        f = functional_catalog("I")
        ideal = evaluate(f, behavior_from_strategy(s))
        for cfg in (SagnacConfig(), SagnacConfig(gamma_t=trine_fit.gamma_t)):
            alice = s.alice_povms[:3] + (sagnac.implemented_povm(cfg),)
            optical = evaluate(f, behavior_from_strategy(QuantumStrategy(s.state, alice, s.bob_povms)))
            assert abs(optical - ideal) <= 5e-4

    def test_report_json(self, trine_fit):
        d = json.loads(sagnac.report_json(SagnacConfig(), trine(), trine_fit))
        assert d["distance_to_target"] <= 1e-3
        assert d["completeness_error"] <= 1e-12
        assert len(d["kraus"]) == 3
        assert d["fit"]["gamma_t"] == pytest.approx(trine_fit.gamma_t)
