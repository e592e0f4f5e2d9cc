import math

import numpy as np
import pytest

from povmcert import npa, sdp
from povmcert.qcore import DensityOp, Povm, bloch_effect, haar_state
from povmcert.scenarios import (
    I_BINARY_BOUND,
    I_QUANTUM_MAX,
    QuantumStrategy,
    functional_catalog,
    ideal_strategy,
    restrictions,
)

SQRT3 = math.sqrt(3)
A00, A01, A10 = (0, 0, 0), (0, 0, 1), (0, 1, 0)
B00, B10 = (1, 0, 0), (1, 1, 0)


def random_projective_strategy(scenario, rng):
    state = DensityOp.pure(haar_state(4, rng), (2, 2))

    def meas(n):
        p = bloch_effect(rng.uniform(0, 2 * np.pi))
        eff = [np.zeros((2, 2), dtype=complex) for _ in range(n)]
        i, j = rng.choice(n, size=2, replace=False)
        eff[i], eff[j] = p, np.eye(2) - p
        return Povm(tuple(eff))

    return QuantumStrategy(
        state,
        tuple(meas(n) for n in scenario.alice_outcomes),
        tuple(meas(n) for n in scenario.bob_outcomes),
    )


class TestWords:
    def test_idempotent(self):
        assert npa.canonicalize([A00, A00]).word == (A00,)

    def test_orthogonal(self):
        assert npa.canonicalize([A00, A01]) is None

    def test_parties_commute(self):
        assert npa.canonicalize([B00, A00, B10, A10]).word == (A00, A10, B00, B10)

    def test_collapse_after_reordering(self):
        assert npa.canonicalize([A00, B00, A00]).word == (A00, B00)

    def test_adjoint_reverses_each_party(self):
        m = npa.canonicalize([A00, A10, B00, B10])
        assert npa.adjoint(m).word == (A10, A00, B10, B00)
        assert npa.adjoint(npa.adjoint(m)) == m

    def test_conjugate_symmetry_random_pairs(self):
        scenario = functional_catalog("I").scenario
        alice, bob = npa.symbols(scenario)
        syms = alice + bob
        rng = np.random.default_rng(0)
        checked = 0
        for _ in range(1000):
            u = [syms[k] for k in rng.integers(len(syms), size=rng.integers(0, 4))]
            v = [syms[k] for k in rng.integers(len(syms), size=rng.integers(0, 4))]
            # <u|v> and <v|u> are conjugate moments
            uv = npa.canonicalize(u[::-1] + v)
            vu = npa.canonicalize(v[::-1] + u)
            assert (uv is None) == (vu is None)
            if uv is not None:
                checked += 1
                assert npa.moment_key(uv) == npa.moment_key(vu)
        assert checked > 100

    def test_basis_sizes(self):
        chsh = functional_catalog("chsh").scenario
        assert npa.moment_matrix(chsh, 1).size == 5
        assert npa.moment_matrix(chsh, 2).size == 13
        assert npa.moment_matrix(chsh, "1+AB").size == 9

    def test_entry_map_symmetric(self):
        mm = npa.moment_matrix(functional_catalog("I").scenario, 2)
        np.testing.assert_array_equal(mm.entry_map, mm.entry_map.T)
        assert mm.entry_map[0, 0] == 0

    def test_bad_level(self):
        with pytest.raises(ValueError):
            npa.generating_basis(functional_catalog("chsh").scenario, 7)

    def test_basis_limit(self):
        with pytest.raises(ValueError):
            npa.moment_matrix(functional_catalog("L").scenario, 4)


class TestMomentsFromStrategies:
    @pytest.mark.parametrize("seed", range(5))
    def test_psd_and_consistent(self, seed):
        rng = np.random.default_rng(seed)
        f = functional_catalog("I")
        mm = npa.moment_matrix(f.scenario, 2)
        g = npa.moment_matrix_from_strategy(mm, random_projective_strategy(f.scenario, rng))
        assert np.linalg.eigvalsh((g + g.conj().T) / 2)[0] >= -1e-10
        assert g[0, 0] == pytest.approx(1.0)
        zero = mm.entry_map < 0
        assert np.max(np.abs(g[zero]), initial=0.0) <= 1e-12
        for k in range(1, len(mm.variables)):
            vals = g[mm.entry_map == k]
            # one variable per word and its adjoint: real parts agree
            assert np.ptp(vals.real) <= 1e-10

    def test_functional_from_moments(self):
        s = ideal_strategy("chsh_optimal")
        f = functional_catalog("chsh")
        mm = npa.moment_matrix(f.scenario, 1)
        g = npa.moment_matrix_from_strategy(mm, s)
        value = 0.0
        for w, c in npa.functional_moments(f).items():
            k = mm.variables.index(w)
            value += c * g[mm.entry_map == k][0].real
        assert value == pytest.approx(2 * math.sqrt(2), abs=1e-12)


class TestBounds:
    def test_chsh_tsirelson(self):
        r = npa.solve_relaxation(functional_catalog("chsh"), 1)
        assert r.status == sdp.OPTIMAL
        assert r.bound == pytest.approx(2 * math.sqrt(2), abs=1e-6)

    def test_I_level2(self):
        assert npa.upper_bound(functional_catalog("I"), 2) == pytest.approx(I_QUANTUM_MAX, abs=1e-6)

    @pytest.mark.parametrize("k", range(3))
    def test_I_binary_restrictions(self, k):
        _, g = restrictions(functional_catalog("I"), "A", 3, 2)[k]
        bound = npa.upper_bound(g, 2)
        # frozen from this relaxation, matched from below by the seesaw
        assert bound == pytest.approx(1.2710447, abs=1e-6)
        assert bound <= I_BINARY_BOUND  # the published bound is rounded up

    def test_chain_does_not_exceed_tight_value(self):
        assert npa.upper_bound(functional_catalog("chain3"), 2) <= 3 * SQRT3 / 4 + 1e-6

    def test_beta_el(self):
        assert npa.upper_bound(functional_catalog("beta_el"), 2) == pytest.approx(4 * SQRT3, abs=1e-6)

    def test_monotone_in_level(self):
        f = functional_catalog("I")
        b1 = npa.upper_bound(f, 1)
        bab = npa.upper_bound(f, "1+AB")
        b2 = npa.upper_bound(f, 2)
        assert b1 >= bab - 1e-7 >= b2 - 2e-7

    def test_gap_small(self):
        r = npa.solve_relaxation(functional_catalog("I"), 2)
        assert abs(r.duality_gap) <= 1e-6
        assert r.lower <= r.bound + 1e-8

    def test_failure_raises(self, monkeypatch):
        real = sdp.solve

        def stalled(problem, tol=1e-8, max_iter=200):
            return real(problem, tol=tol, max_iter=1)

        monkeypatch.setattr(sdp, "solve", stalled)
        with pytest.raises(npa.NpaFailure):
            npa.upper_bound(functional_catalog("I"), 2)


class TestCertifiedBound:
    @pytest.mark.parametrize("iterations", [1, 3, 6, 10, 200])
    def test_valid_at_any_iterate(self, iterations):
        # a truncated solve still certifies a bound above the true optimum
        rel = npa.build_relaxation(functional_catalog("I"), 2)
        sol = sdp.solve(rel.problem, max_iter=iterations)
        assert npa.certified_bound(rel, sol) >= I_QUANTUM_MAX - 1e-9

    def test_tight_when_optimal(self):
        rel = npa.build_relaxation(functional_catalog("chsh"), 1)
        sol = sdp.solve(rel.problem)
        assert npa.certified_bound(rel, sol) == pytest.approx(rel.offset + sol.primal_value, abs=1e-7)

    def test_stalled_result_accepted_only_when_gap_small(self):
        base = dict(level=3, basis_size=1, n_variables=1, lower=1.0, iterations=1, seconds=0.0)
        near = npa.NpaResult(bound=1.0 + 1e-7, status=sdp.NUMERICAL_FAILURE, duality_gap=1e-7, **base)
        far = npa.NpaResult(bound=1.1, status=sdp.NUMERICAL_FAILURE, duality_gap=0.1, **base)
        infeasible = npa.NpaResult(bound=1.0 + 1e-7, status=sdp.INFEASIBLE, duality_gap=1e-7, **base)
        assert near.accepted
        assert not far.accepted
        assert not infeasible.accepted
