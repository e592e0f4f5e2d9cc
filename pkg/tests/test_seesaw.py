import json
import math

import numpy as np
import pytest
from scipy.optimize import minimize

from povmcert import seesaw
from povmcert.qcore import DensityOp, Povm, fidelity_with_pure, haar_state, psi_plus
from povmcert.scenarios import (
    I_QUANTUM_MAX,
    QuantumStrategy,
    behavior_from_strategy,
    evaluate,
    functional_catalog,
    ideal_strategy,
    restrictions,
    trine,
)


def random_hermitian(d, rng):
    z = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    return (z + z.conj().T) / 2


def qubit_dual_value(ops):
    """min Tr Y over Y >= R_k, by direct search over the traceless part of Y."""
    paulis = (np.array([[0, 1], [1, 0]]), np.array([[0, -1j], [1j, 0]]), np.diag([1.0, -1.0]))

    def trace_y(v):
        y0 = sum(c * p for c, p in zip(v, paulis))
        return 2 * max(np.linalg.eigvalsh(r - y0)[-1] for r in ops)

    res = minimize(trace_y, np.zeros(3), method="Nelder-Mead", options=dict(xatol=1e-12, fatol=1e-14, maxiter=20000))
    for _ in range(5):
        res = minimize(trace_y, res.x, method="Nelder-Mead", options=dict(xatol=1e-12, fatol=1e-14, maxiter=20000))
    return res.fun


def objective(effects, ops):
    return sum(float(np.real(np.trace(e @ r))) for e, r in zip(effects, ops))


class TestBellOperator:
    @pytest.mark.parametrize("name,strategy", [("I", "I_optimal"), ("chsh", "chsh_optimal")])
    def test_expectation_matches_evaluate(self, name, strategy):
        s = ideal_strategy(strategy)
        f = functional_catalog(name)
        w = seesaw.bell_operator(f, s.alice_povms, s.bob_povms)
        direct = float(np.real(np.trace(w @ s.state.matrix)))
        assert direct == pytest.approx(evaluate(f, behavior_from_strategy(s)), abs=1e-12)

    def test_random_strategy(self):
        rng = np.random.default_rng(2)
        f = functional_catalog("L")
        alice = [Povm(tuple(seesaw._random_projective(n, 2, rng))) for n in f.scenario.alice_outcomes]
        bob = [Povm(tuple(seesaw._random_projective(n, 2, rng))) for n in f.scenario.bob_outcomes]
        rho = DensityOp.pure(haar_state(4, rng), (2, 2))
        p = behavior_from_strategy(QuantumStrategy(rho, tuple(alice), tuple(bob)))
        w = seesaw.bell_operator(f, alice, bob)
        assert float(np.real(np.trace(w @ rho.matrix))) == pytest.approx(evaluate(f, p), abs=1e-12)

    def test_scenario_mismatch(self):
        s = ideal_strategy("chsh_optimal")
        with pytest.raises(ValueError):
            seesaw.bell_operator(functional_catalog("I"), s.alice_povms, s.bob_povms)


class TestStateStep:
    def test_top_eigenvector_is_ideal_state(self):
        s = ideal_strategy("chsh_optimal")
        w = seesaw.bell_operator(functional_catalog("chsh"), s.alice_povms, s.bob_povms)
        rho = seesaw.optimize_state(w)
        assert fidelity_with_pure(rho, psi_plus()) == pytest.approx(1.0, abs=1e-12)
        assert float(np.real(np.trace(w @ rho.matrix))) == pytest.approx(2 * math.sqrt(2), abs=1e-12)


class TestMeasurementStep:
    @pytest.mark.parametrize("seed", range(10))
    def test_binary_matches_spectral_oracle(self, seed):
        rng = np.random.default_rng(seed)
        d = int(rng.integers(2, 5))
        r0, r1 = random_hermitian(d, rng), random_hermitian(d, rng)
        eff = seesaw.best_response([r0, r1])
        w = np.linalg.eigvalsh(r0 - r1)
        oracle = float(np.real(np.trace(r1))) + float(w[w > 0].sum())
        assert objective(eff, [r0, r1]) == pytest.approx(oracle, abs=1e-10)
        np.testing.assert_allclose(eff[0] @ eff[0], eff[0], atol=1e-10)

    @pytest.mark.parametrize("seed", range(6))
    def test_three_outcomes_match_dual_oracle(self, seed):
        rng = np.random.default_rng(100 + seed)
        ops = [random_hermitian(2, rng) for _ in range(3)]
        eff = seesaw.best_response(ops)
        np.testing.assert_allclose(sum(eff), np.eye(2), atol=1e-10)
        value = objective(eff, ops)
        assert value == pytest.approx(qubit_dual_value(ops), abs=1e-8)
        # no merged two-outcome measurement does better
        for i, j in ((0, 1), (0, 2), (1, 2)):
            pair = seesaw.best_response([ops[i], ops[j]])
            assert value >= objective(pair, [ops[i], ops[j]]) - 1e-9

    def test_flat_objective(self):
        r = 0.7
        ops = [r * np.eye(2)] * 3
        eff = seesaw.best_response(ops)
        # every POVM gives the same value: sum_a Tr(R_a) / n_outcomes
        assert objective(eff, ops) == pytest.approx(sum(np.trace(o).real for o in ops) / 3, abs=1e-8)
        assert objective(eff, ops) == pytest.approx(2 * r, abs=1e-8)

    def test_single_outcome(self):
        np.testing.assert_array_equal(seesaw.best_response([np.eye(3)])[0], np.eye(3))

    def test_trine_is_a_fixed_point(self):
        s = ideal_strategy("I_optimal")
        m = seesaw.optimize_measurement(functional_catalog("I"), s.state, s.bob_povms, "A", 3)
        for e, t in zip(m.effects, trine().effects):
            np.testing.assert_allclose(e, t, atol=1e-7)

    def test_keeps_current_when_no_gain(self):
        s = ideal_strategy("I_optimal")
        cur = s.alice_povms[0]
        m = seesaw.optimize_measurement(functional_catalog("I"), s.state, s.bob_povms, "A", 0, current=cur)
        for e, t in zip(m.effects, cur.effects):
            np.testing.assert_allclose(e, t, atol=1e-9)

    def test_counterpart_mismatch(self):
        s = ideal_strategy("I_optimal")
        with pytest.raises(ValueError):
            seesaw.optimize_measurement(functional_catalog("I"), s.state, s.alice_povms, "A", 0)


@pytest.fixture(scope="module")
def result():
    return seesaw.run(functional_catalog("I"), seesaw.SeesawConfig(restarts=4, seed=3))


class TestRun:
    def test_reaches_quantum_max(self, result):
        assert result.best_value == pytest.approx(I_QUANTUM_MAX, abs=1e-6)

    def test_traces_are_monotone(self, result):
        for t in result.traces:
            assert np.all(np.diff(t) >= -1e-10)
        assert all(result.converged)

    def test_best_strategy_reproduces_value(self, result):
        p = behavior_from_strategy(result.best_strategy)
        assert evaluate(functional_catalog("I"), p) == pytest.approx(result.best_value, abs=1e-9)

    def test_json(self, result):
        d = json.loads(result.to_json())
        assert d["best_value"] == pytest.approx(result.best_value)
        assert len(d["final_values"]) == 4
        assert len(d["alice_povms"][3]) == 3
        assert d["schmidt_coefficients"][0] == pytest.approx(1 / math.sqrt(2), abs=1e-4)

    def test_seed_determinism(self, result):
        again = seesaw.run(functional_catalog("I"), seesaw.SeesawConfig(restarts=4, seed=3))
        assert again.to_json() == result.to_json()

    def test_binary_restriction(self):
        _, g = restrictions(functional_catalog("I"), "A", 3, 2)[2]
        res = seesaw.run(g, seesaw.SeesawConfig(restarts=5))
        assert res.best_value >= 1.27104 - 1e-4
        # the optimum uses a partially entangled state
        assert res.schmidt[0] > 0.72

    def test_product_dims_give_classical_value(self):
        res = seesaw.run(functional_catalog("I"), seesaw.SeesawConfig(local_dims=(1, 2), restarts=3))
        assert res.best_value <= 1.0 + 1e-9

    @pytest.mark.parametrize(
        "kwargs", [dict(restarts=0), dict(tol=0.0), dict(local_dims=(2, 9)), dict(max_iters=0)]
    )
    def test_config_validation(self, kwargs):
        with pytest.raises(ValueError):
            seesaw.SeesawConfig(**kwargs)


def test_result_independent_of_thread_count():
    f = functional_catalog("chsh")
    one = seesaw.run(f, seesaw.SeesawConfig(restarts=4, seed=8))
    many = seesaw.run(f, seesaw.SeesawConfig(restarts=4, seed=8, threads=3))
    assert one.best_value == many.best_value
    assert one.traces == many.traces


def test_rejects_zero_threads():
    with pytest.raises(ValueError):
        seesaw.SeesawConfig(threads=0)
