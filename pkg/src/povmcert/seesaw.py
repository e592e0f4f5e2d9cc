"""Lower bounds on quantum values by alternating over state and measurements.

With everything but one setting fixed the value is linear in that setting's
effects, and with all measurements fixed it is linear in the state, so each
partial step is solved exactly: a spectral projector for two outcomes, a
small SDP otherwise, and the top eigenvector of the Bell operator for the
state.
"""
from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import sdp
from .qcore import DensityOp, Povm, haar_state, haar_unitary, hermitian_eig, partial_trace
from .scenarios import BellFunctional, QuantumStrategy, _party

ASCENT_SLACK = 1e-10


@dataclass(frozen=True)
class SeesawConfig:
    local_dims: tuple[int, int] = (2, 2)
    restarts: int = 50
    max_iters: int = 500
    tol: float = 1e-10
    seed: int = 0
    threads: int = 1  # restarts are independent; the result does not depend on this

    def __post_init__(self):
        if self.threads < 1:
            raise ValueError("threads must be at least 1")
        if self.restarts < 1:
            raise ValueError("restarts must be at least 1")
        if self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        dims = tuple(int(d) for d in self.local_dims)
        if len(dims) != 2 or min(dims) < 1 or max(dims) > 8:
            raise ValueError("local_dims must be two sizes between 1 and 8")
        object.__setattr__(self, "local_dims", dims)


@dataclass
class SeesawResult:
    best_value: float
    best_strategy: QuantumStrategy
    traces: list[list[float]]
    iterations: list[int]
    converged: list[bool]
    schmidt: np.ndarray = field(default_factory=lambda: np.zeros(0))

    @property
    def final_values(self) -> list[float]:
        return [t[-1] for t in self.traces]

    def to_dict(self) -> dict:
        s = self.best_strategy
        w, v = hermitian_eig(s.state.matrix)
        psi = v[:, 0]
        return {
            "best_value": self.best_value,
            "final_values": self.final_values,
            "iterations": list(self.iterations),
            "converged": list(self.converged),
            "schmidt_coefficients": [float(c) for c in self.schmidt],
            "local_dims": list(s.local_dims),
            "state": _complex_list(psi),
            "alice_povms": [[_complex_list(e) for e in m.effects] for m in s.alice_povms],
            "bob_povms": [[_complex_list(e) for e in m.effects] for m in s.bob_povms],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def _complex_list(a: np.ndarray):
    a = np.asarray(a)
    if a.ndim == 1:
        return [[float(z.real), float(z.imag)] for z in a]
    return [_complex_list(row) for row in a]


def _effects(povms) -> list[list[np.ndarray]]:
    return [list(m.effects) if isinstance(m, Povm) else [np.asarray(e) for e in m] for m in povms]


def _check_scenario(f: BellFunctional, alice, bob):
    sc = f.scenario
    if tuple(len(m) for m in alice) != sc.alice_outcomes or tuple(len(m) for m in bob) != sc.bob_outcomes:
        raise ValueError("measurements do not match the functional's scenario")


def bell_operator(f: BellFunctional, alice_povms, bob_povms) -> np.ndarray:
    """``W = sum c_abxy A_a|x (x) B_b|y``; ``Tr(W rho)`` is the functional's value."""
    alice, bob = _effects(alice_povms), _effects(bob_povms)
    _check_scenario(f, alice, bob)
    da, db = alice[0][0].shape[0], bob[0][0].shape[0]
    w = np.zeros((da * db, da * db), dtype=complex)
    for a, b, x, y, c in f.terms:
        w += c * np.kron(alice[x][a], bob[y][b])
    return (w + w.conj().T) / 2


def optimize_state(w: np.ndarray) -> DensityOp:
    """Pure state on the top eigenvector of ``w`` (canonical phase and tie order)."""
    _, v = hermitian_eig(w)
    return DensityOp.pure(v[:, 0])


def effective_operators(f: BellFunctional, rho: np.ndarray, dims: tuple[int, int], other_povms, party, setting: int) -> list[np.ndarray]:
    """``R_k`` with the value equal to ``sum_k Tr(E_k R_k)`` plus a constant."""
    pi = _party(party)
    other = _effects(other_povms)
    sc = f.scenario
    n_out = sc.outcomes(pi)[setting]
    d_other = dims[1 - pi]
    mixers = [np.zeros((d_other, d_other), dtype=complex) for _ in range(n_out)]
    for a, b, x, y, c in f.terms:
        if pi == 0 and x == setting:
            mixers[a] += c * other[y][b]
        elif pi == 1 and y == setting:
            mixers[b] += c * other[x][a]
    d_own = dims[pi]
    eye = np.eye(d_own)
    out = []
    for m in mixers:
        lifted = np.kron(eye, m) if pi == 0 else np.kron(m, eye)
        r = partial_trace(lifted @ rho, dims, keep=pi)
        out.append((r + r.conj().T) / 2)
    return out


def _objective(effects: Sequence[np.ndarray], ops: Sequence[np.ndarray]) -> float:
    return float(sum(np.real(np.vdot(r, e)) for e, r in zip(effects, ops)))


def _binary_update(r0: np.ndarray, r1: np.ndarray) -> list[np.ndarray]:
    w, v = hermitian_eig(r0 - r1)
    scale = max(1.0, float(np.max(np.abs(w))))
    pos = w > 1e-12 * scale
    kernel = np.flatnonzero(np.abs(w) <= 1e-12 * scale)
    pick = pos.copy()
    pick[kernel[: kernel.size // 2]] = True
    vs = v[:, pick]
    e0 = vs @ vs.conj().T
    return [e0, np.eye(r0.shape[0]) - e0]


def _sdp_update(ops: Sequence[np.ndarray]) -> list[np.ndarray]:
    d = ops[0].shape[0]
    bld = sdp.SdpBuilder()
    blocks = [bld.add_block(d, hermitian=True) for _ in ops]
    bld.add_hermitian_equality({k: 1.0 for k in blocks}, np.eye(d))
    bld.set_objective({k: r for k, r in zip(blocks, ops)}, sense="max")
    sol = sdp.solve(bld.build(), tol=1e-10)
    if sol.status != sdp.OPTIMAL and not sol.x:
        raise sdp.SdpFailure(f"measurement update SDP ended with {sol.status}")
    return list(Povm.from_raw([sol.x[k] for k in blocks]).effects)


def best_response(ops: Sequence[np.ndarray]) -> list[np.ndarray]:
    """Effects maximizing ``sum_k Tr(E_k R_k)`` over POVMs."""
    if len(ops) == 1:
        return [np.eye(ops[0].shape[0], dtype=complex)]
    if len(ops) == 2:
        return _binary_update(ops[0], ops[1])
    return _sdp_update(ops)


def optimize_measurement(
    f: BellFunctional,
    state: DensityOp,
    other_party_povms,
    party,
    setting: int,
    current: Povm | None = None,
) -> Povm:
    """Best POVM for one setting with the state and the other party held fixed.

    With ``current`` given, the update replaces it only if it loses no value,
    so the objective never decreases through numerical error.
    """
    pi = _party(party)
    other = _effects(other_party_povms)
    if tuple(len(m) for m in other) != f.scenario.outcomes(1 - pi):
        raise ValueError("counterpart measurements do not match the functional's scenario")
    d_other = other[0][0].shape[0]
    if state.dim % d_other:
        raise ValueError("state dimension is not a multiple of the counterpart dimension")
    d_own = state.dim // d_other
    dims = (d_own, d_other) if pi == 0 else (d_other, d_own)
    ops = effective_operators(f, state.matrix, dims, other, pi, setting)
    new = Povm(tuple(best_response(ops)))
    if current is not None and _objective(new.effects, ops) < _objective(current.effects, ops):
        return current
    return new


def _random_projective(n_out: int, d: int, rng: np.random.Generator) -> list[np.ndarray]:
    u = haar_unitary(d, rng)
    effects = [np.zeros((d, d), dtype=complex) for _ in range(n_out)]
    for i in range(d):
        effects[i % n_out] += np.outer(u[:, i], u[:, i].conj())
    return effects


def schmidt_coefficients(psi: np.ndarray, dims: tuple[int, int]) -> np.ndarray:
    return np.linalg.svd(np.asarray(psi).reshape(dims), compute_uv=False)


def _value(w: np.ndarray, psi: np.ndarray) -> float:
    return float(np.real(np.vdot(psi, w @ psi)))


def _restart(f: BellFunctional, cfg: SeesawConfig, index: int):
    rng = np.random.default_rng([cfg.seed, index])
    da, db = cfg.local_dims
    sc = f.scenario
    psi = haar_state(da * db, rng)
    alice = [_random_projective(n, da, rng) for n in sc.alice_outcomes]
    bob = [_random_projective(n, db, rng) for n in sc.bob_outcomes]
    value = _value(bell_operator(f, alice, bob), psi)
    trace = [value]
    converged = False
    it = 0
    for it in range(1, cfg.max_iters + 1):
        rho = np.outer(psi, psi.conj())
        for pi, own, other in ((0, alice, bob), (1, bob, alice)):
            for s in range(len(own)):
                ops = effective_operators(f, rho, (da, db), other, pi, s)
                cand = best_response(ops)
                if _objective(cand, ops) >= _objective(own[s], ops):
                    own[s] = cand
        w = bell_operator(f, alice, bob)
        _, vecs = hermitian_eig(w)
        cand_psi = vecs[:, 0]
        if _value(w, cand_psi) >= _value(w, psi):
            psi = cand_psi
        new = _value(w, psi)
        trace.append(new)
        if abs(new - value) < cfg.tol:
            converged = True
            break
        value = new
    return trace, it, converged, psi, alice, bob


def run(f: BellFunctional, cfg: SeesawConfig = SeesawConfig()) -> SeesawResult:
    traces, iterations, converged = [], [], []
    best = None
    if cfg.threads > 1:
        with ThreadPoolExecutor(cfg.threads) as pool:
            outcomes = list(pool.map(lambda k: _restart(f, cfg, k), range(cfg.restarts)))
    else:
        outcomes = (_restart(f, cfg, k) for k in range(cfg.restarts))
    for trace, it, conv, psi, alice, bob in outcomes:
        traces.append(trace)
        iterations.append(it)
        converged.append(conv)
        if best is None or trace[-1] > best[0]:
            best = (trace[-1], psi, alice, bob)
    value, psi, alice, bob = best
    strategy = QuantumStrategy(
        DensityOp.pure(psi, cfg.local_dims),
        tuple(Povm(tuple(m)) for m in alice),
        tuple(Povm(tuple(m)) for m in bob),
    )
    return SeesawResult(
        best_value=value,
        best_strategy=strategy,
        traces=traces,
        iterations=iterations,
        converged=converged,
        schmidt=schmidt_coefficients(psi, cfg.local_dims),
    )
