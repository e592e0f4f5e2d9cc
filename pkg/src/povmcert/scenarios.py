"""Bipartite Bell scenarios, behaviors and the functional catalog.

Probability tables are padded arrays ``P[a, b, x, y]`` of shape
``(max_a, max_b, n_x, n_y)``; entries for outcomes a setting does not have
are zero. Functionals carry the matching coefficient tensor ``c[a, b, x, y]``.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import sdp
from .qcore import (
    DensityOp,
    Povm,
    bloch_effect,
    born,
    psi_plus,
)

SQRT3 = math.sqrt(3.0)
I_QUANTUM_MAX = 3 * SQRT3 / 4
I_BINARY_BOUND = 1.2711
I_BINARY_NPA = 1.271045
L_QUANTUM_MAX = 4 * SQRT3
L_BINARY_BOUND = 6.6876
L_THREE_OUTCOME_BOUND = 6.8489

_PARTIES = {0: 0, 1: 1, "A": 0, "B": 1, "alice": 0, "bob": 1}


def _party(p) -> int:
    try:
        return _PARTIES[p.lower() if isinstance(p, str) and len(p) > 1 else p]
    except KeyError:
        raise ValueError(f"unknown party {p!r}") from None


@dataclass(frozen=True)
class Scenario:
    alice_outcomes: tuple[int, ...]
    bob_outcomes: tuple[int, ...]

    def __post_init__(self):
        a = tuple(int(n) for n in self.alice_outcomes)
        b = tuple(int(n) for n in self.bob_outcomes)
        if not a or not b:
            raise ValueError("each party needs at least one setting")
        if min(a + b) < 2:
            raise ValueError("every setting needs at least two outcomes")
        object.__setattr__(self, "alice_outcomes", a)
        object.__setattr__(self, "bob_outcomes", b)

    @property
    def n_x(self) -> int:
        return len(self.alice_outcomes)

    @property
    def n_y(self) -> int:
        return len(self.bob_outcomes)

    @property
    def shape(self) -> tuple[int, int, int, int]:
        return (max(self.alice_outcomes), max(self.bob_outcomes), self.n_x, self.n_y)

    def outcomes(self, party) -> tuple[int, ...]:
        return self.alice_outcomes if _party(party) == 0 else self.bob_outcomes

    def mask(self) -> np.ndarray:
        m = np.zeros(self.shape, dtype=bool)
        for x, na in enumerate(self.alice_outcomes):
            for y, nb in enumerate(self.bob_outcomes):
                m[:na, :nb, x, y] = True
        return m

    def settings(self) -> Iterable[tuple[int, int]]:
        return itertools.product(range(self.n_x), range(self.n_y))

    def uniform(self) -> "Behavior":
        t = np.zeros(self.shape)
        for x, na in enumerate(self.alice_outcomes):
            for y, nb in enumerate(self.bob_outcomes):
                t[:na, :nb, x, y] = 1.0 / (na * nb)
        return Behavior(self, t)

    def deterministic(self, alice: Sequence[int], bob: Sequence[int]) -> "Behavior":
        t = np.zeros(self.shape)
        for x, y in self.settings():
            t[alice[x], bob[y], x, y] = 1.0
        return Behavior(self, t)

    def strategy_count(self) -> int:
        return math.prod(self.alice_outcomes) * math.prod(self.bob_outcomes)

    def to_dict(self) -> dict:
        return {"alice": list(self.alice_outcomes), "bob": list(self.bob_outcomes)}

    @classmethod
    def from_dict(cls, d: Mapping) -> "Scenario":
        return cls(tuple(d["alice"]), tuple(d["bob"]))


@dataclass(frozen=True, eq=False)
class Behavior:
    """Conditional probabilities ``P(ab|xy)``.

    ``totals`` (coincidences per setting pair) enables multinomial error
    propagation in :func:`evaluate_with_sigma`; ``sigma`` holds per-entry
    standard errors.
    """

    scenario: Scenario
    table: np.ndarray
    sigma: np.ndarray | None = None
    totals: np.ndarray | None = None
    degenerate: tuple[tuple[int, int], ...] = ()

    def __post_init__(self):
        t = np.array(self.table, dtype=float)
        if t.shape != self.scenario.shape:
            raise ValueError(f"table shape {t.shape} != scenario shape {self.scenario.shape}")
        mask = self.scenario.mask()
        if np.any(t[~mask] != 0):
            raise ValueError("probability assigned to a nonexistent outcome")
        if t.min() < -1e-9 or t.max() > 1 + 1e-9:
            raise ValueError("probabilities must lie in [0, 1]")
        sums = t.sum(axis=(0, 1))
        if np.max(np.abs(sums - 1)) > 1e-8:
            raise ValueError("each setting pair must be normalized")
        t.setflags(write=False)
        object.__setattr__(self, "table", t)
        if self.sigma is not None:
            s = np.array(self.sigma, dtype=float)
            s.setflags(write=False)
            object.__setattr__(self, "sigma", s)
        if self.totals is not None:
            n = np.array(self.totals, dtype=float)
            if n.shape != (self.scenario.n_x, self.scenario.n_y):
                raise ValueError("totals must have shape (n_x, n_y)")
            object.__setattr__(self, "totals", n)

    def __getitem__(self, key):
        a, b, x, y = key
        return self.table[a, b, x, y]

    def mix(self, other: "Behavior", weight: float) -> "Behavior":
        return Behavior(self.scenario, weight * self.table + (1 - weight) * other.table)


@dataclass(frozen=True, eq=False)
class BellFunctional:
    scenario: Scenario
    terms: tuple[tuple[int, int, int, int, float], ...]
    name: str = ""
    known_bounds: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self):
        merged: dict[tuple[int, int, int, int], float] = {}
        for a, b, x, y, c in self.terms:
            a, b, x, y = int(a), int(b), int(x), int(y)
            if not (0 <= x < self.scenario.n_x and 0 <= y < self.scenario.n_y):
                raise ValueError(f"setting ({x},{y}) outside the scenario")
            if not (0 <= a < self.scenario.alice_outcomes[x] and 0 <= b < self.scenario.bob_outcomes[y]):
                raise ValueError(f"outcome ({a},{b}) outside setting ({x},{y})")
            merged[(a, b, x, y)] = merged.get((a, b, x, y), 0.0) + float(c)
        terms = tuple((*k, v) for k, v in merged.items() if v != 0.0)
        object.__setattr__(self, "terms", terms)
        object.__setattr__(self, "known_bounds", dict(self.known_bounds))

    @property
    def coefficients(self) -> np.ndarray:
        c = np.zeros(self.scenario.shape)
        for a, b, x, y, v in self.terms:
            c[a, b, x, y] = v
        return c

    def __len__(self):
        return len(self.terms)

    def to_dict(self) -> dict:
        return {
            "kind": "bell_functional",
            "name": self.name,
            "scenario": self.scenario.to_dict(),
            "terms": [[a, b, x, y, c] for a, b, x, y, c in self.terms],
            "known_bounds": dict(self.known_bounds),
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "BellFunctional":
        if d.get("kind", "bell_functional") != "bell_functional":
            raise ValueError("not a serialized Bell functional")
        return cls(
            Scenario.from_dict(d["scenario"]),
            tuple(tuple(t) for t in d["terms"]),
            d.get("name", ""),
            d.get("known_bounds", {}),
        )


def behavior_to_dict(p: Behavior) -> dict:
    """Settings in row-major ``(x, y)`` order, each table row-major in ``(a, b)``."""
    sc = p.scenario
    settings = []
    for x, y in sc.settings():
        na, nb = sc.alice_outcomes[x], sc.bob_outcomes[y]
        entry = {"x": x, "y": y, "p": p.table[:na, :nb, x, y].ravel().tolist()}
        if p.sigma is not None:
            entry["sigma"] = p.sigma[:na, :nb, x, y].ravel().tolist()
        if p.totals is not None:
            entry["total"] = float(p.totals[x, y])
        settings.append(entry)
    return {"kind": "behavior", "scenario": sc.to_dict(), "settings": settings}


def behavior_from_dict(d: Mapping) -> Behavior:
    sc = Scenario.from_dict(d["scenario"])
    table = np.zeros(sc.shape)
    sigma = np.zeros(sc.shape) if all("sigma" in s for s in d["settings"]) else None
    totals = np.zeros((sc.n_x, sc.n_y)) if all("total" in s for s in d["settings"]) else None
    for s in d["settings"]:
        x, y = s["x"], s["y"]
        na, nb = sc.alice_outcomes[x], sc.bob_outcomes[y]
        table[:na, :nb, x, y] = np.reshape(s["p"], (na, nb))
        if sigma is not None:
            sigma[:na, :nb, x, y] = np.reshape(s["sigma"], (na, nb))
        if totals is not None:
            totals[x, y] = s["total"]
    return Behavior(sc, table, sigma, totals)


# ---------------------------------------------------------------------------
# the catalog


def _chain_terms():
    plus = [(0, 0, 0, 0, 1.0), (0, 0, 1, 1, 1.0), (0, 0, 2, 2, 1.0)]
    minus = [(0, 0, 0, 1, -1.0), (0, 0, 1, 2, -1.0), (0, 0, 2, 0, -1.0)]
    return plus + minus


def _beta_el_terms():
    t = []
    for x, y in [(0, 2), (0, 3), (1, 1), (1, 3), (2, 1), (2, 2)]:
        t.append((1, 0, x, y, 1.0))
    for x, y in [(0, 0), (1, 0), (2, 0)]:
        t.append((0, 0, x, y, 2.0))
    for x, y in [(0, 1), (1, 2), (2, 3)]:
        t.append((0, 0, x, y, 4.0))
    for x, y in [(0, 0), (1, 0), (2, 0)]:
        t.append((1, 0, x, y, -2.0))
    for x, y in [(0, 2), (0, 3), (1, 1), (1, 3), (2, 1), (2, 2)]:
        t.append((0, 0, x, y, -3.0))
    return t


def _chsh_terms():
    t = []
    for x, y in itertools.product(range(2), range(2)):
        s = -1.0 if (x, y) == (1, 1) else 1.0
        for a, b in itertools.product(range(2), range(2)):
            t.append((a, b, x, y, s * (-1.0) ** (a + b)))
    return t


CATALOG = ("I", "chain3", "chsh", "beta_el", "L")
_ALIASES = {"chsh_correlator_as_probabilities": "chsh", "I_chain": "chain3", "chain": "chain3"}


def functional_catalog(name: str) -> BellFunctional:
    key = _ALIASES.get(name, name)
    if key == "I":
        terms = _chain_terms() + [(0, 0, 3, 0, -1.0), (1, 0, 3, 1, -1.0), (2, 0, 3, 2, -1.0)]
        return BellFunctional(
            Scenario((2, 2, 2, 3), (2, 2, 2)),
            tuple(terms),
            "I",
            {"uniform": -0.5, "classical": 1.0, "binary_quantum": I_BINARY_BOUND, "quantum_max": I_QUANTUM_MAX},
        )
    if key == "chain3":
        return BellFunctional(
            Scenario((2, 2, 2), (2, 2, 2)),
            tuple(_chain_terms()),
            "chain3",
            {"classical": 1.0, "quantum_max": I_QUANTUM_MAX},
        )
    if key == "chsh":
        return BellFunctional(
            Scenario((2, 2), (2, 2)),
            tuple(_chsh_terms()),
            "chsh",
            {"classical": 2.0, "quantum_max": 2 * math.sqrt(2)},
        )
    if key == "beta_el":
        return BellFunctional(
            Scenario((2, 2, 2), (2, 2, 2, 2)),
            tuple(_beta_el_terms()),
            "beta_el",
            {"classical": 6.0, "quantum_max": L_QUANTUM_MAX},
        )
    if key == "L":
        terms = _beta_el_terms() + [(i, 0, 3, i, -8.0) for i in range(4)]
        return BellFunctional(
            Scenario((2, 2, 2, 4), (2, 2, 2, 2)),
            tuple(terms),
            "L",
            {
                "uniform": -4.0,
                "binary_quantum": L_BINARY_BOUND,
                "three_outcome_quantum": L_THREE_OUTCOME_BOUND,
                "quantum_max": L_QUANTUM_MAX,
            },
        )
    raise ValueError(f"unknown functional {name!r}; choose from {CATALOG}")


# ---------------------------------------------------------------------------
# evaluation


def _check_scenario(f: BellFunctional, p: Behavior):
    if f.scenario != p.scenario:
        raise ValueError(f"scenario mismatch: functional {f.scenario} vs behavior {p.scenario}")


def evaluate(f: BellFunctional, p: Behavior) -> float:
    _check_scenario(f, p)
    return float(sum(c * p.table[a, b, x, y] for a, b, x, y, c in f.terms))


def evaluate_with_sigma(f: BellFunctional, p: Behavior) -> tuple[float, float]:
    """Value and standard error.

    With per-setting totals the multinomial covariance is used
    (``var = (sum c^2 P - (sum c P)^2) / N`` per setting, settings
    independent); otherwise per-entry sigmas are combined as independent.
    """
    value = evaluate(f, p)
    c = f.coefficients
    if p.totals is not None:
        var = 0.0
        for x, y in p.scenario.settings():
            cs = c[:, :, x, y]
            if not np.any(cs):
                continue
            ps = p.table[:, :, x, y]
            var += (np.sum(cs**2 * ps) - np.sum(cs * ps) ** 2) / p.totals[x, y]
        return value, math.sqrt(max(var, 0.0))
    if p.sigma is not None:
        return value, math.sqrt(float(np.sum((c * p.sigma) ** 2)))
    raise ValueError("behavior carries no error information")


def restrict_outcome(f: BellFunctional, party, setting: int, dropped: int) -> BellFunctional:
    """Remove one outcome of one setting, renumbering the later outcomes."""
    pi = _party(party)
    counts = list(f.scenario.outcomes(pi))
    if counts[setting] < 3:
        raise ValueError("cannot drop below two outcomes")
    if not 0 <= dropped < counts[setting]:
        raise ValueError("dropped outcome out of range")
    counts[setting] -= 1
    sc = (
        Scenario(tuple(counts), f.scenario.bob_outcomes)
        if pi == 0
        else Scenario(f.scenario.alice_outcomes, tuple(counts))
    )
    terms = []
    for a, b, x, y, c in f.terms:
        s, o = (x, a) if pi == 0 else (y, b)
        if s == setting:
            if o == dropped:
                continue
            o = o - 1 if o > dropped else o
        terms.append((o, b, x, y, c) if pi == 0 else (a, o, x, y, c))
    return BellFunctional(sc, tuple(terms), f"{f.name}|{'AB'[pi]}{setting}-{dropped}")


def restrictions(f: BellFunctional, party, setting: int, keep: int) -> list[tuple[tuple[int, ...], BellFunctional]]:
    """All ways of cutting ``setting`` down to ``keep`` outcomes.

    Returns ``(dropped_outcomes, functional)`` pairs.
    """
    n = f.scenario.outcomes(party)[setting]
    out = []
    for dropped in itertools.combinations(range(n), n - keep):
        g = f
        for o in sorted(dropped, reverse=True):
            g = restrict_outcome(g, party, setting, o)
        out.append((dropped, g))
    return out


def classical_bound(f: BellFunctional, max_strategies: int = 10**7) -> float:
    """Exact local maximum over deterministic strategies.

    Alice's assignments are enumerated; for each one Bob's best response
    decouples per setting, which is the same maximum as enumerating both.
    """
    sc = f.scenario
    if sc.strategy_count() > max_strategies:
        raise ValueError(f"{sc.strategy_count()} deterministic strategies exceed the limit {max_strategies}")
    c = f.coefficients
    best = -math.inf
    xs = np.arange(sc.n_x)
    for alice in itertools.product(*(range(n) for n in sc.alice_outcomes)):
        # g[b, y] = sum_x c[a_x, b, x, y]
        g = c[np.asarray(alice), :, xs, :].sum(axis=0)
        total = 0.0
        for y, nb in enumerate(sc.bob_outcomes):
            total += g[:nb, y].max()
        best = max(best, total)
    return float(best)


def visibility_threshold(max_quantum: float, restricted_bound: float, noise_value: float) -> float:
    """Visibility at which the noisy optimum drops to ``restricted_bound``."""
    if not max_quantum > restricted_bound > noise_value:
        raise ValueError("need max_quantum > restricted_bound > noise_value")
    return (restricted_bound - noise_value) / (max_quantum - noise_value)


# ---------------------------------------------------------------------------
# quantum strategies


@dataclass(frozen=True, eq=False)
class QuantumStrategy:
    state: DensityOp
    alice_povms: tuple[Povm, ...]
    bob_povms: tuple[Povm, ...]

    def __post_init__(self):
        object.__setattr__(self, "alice_povms", tuple(self.alice_povms))
        object.__setattr__(self, "bob_povms", tuple(self.bob_povms))
        da = {m.dim for m in self.alice_povms}
        db = {m.dim for m in self.bob_povms}
        if len(da) != 1 or len(db) != 1:
            raise ValueError("all POVMs of one party must share a dimension")
        if da.pop() * db.pop() != self.state.dim:
            raise ValueError("POVM dimensions do not match the state")

    @property
    def local_dims(self) -> tuple[int, int]:
        return self.alice_povms[0].dim, self.bob_povms[0].dim

    @property
    def scenario(self) -> Scenario:
        return Scenario(
            tuple(m.n_outcomes for m in self.alice_povms),
            tuple(m.n_outcomes for m in self.bob_povms),
        )

    def with_state(self, state: DensityOp) -> "QuantumStrategy":
        return QuantumStrategy(state, self.alice_povms, self.bob_povms)


def ideal_strategy(name: str) -> QuantumStrategy:
    state = DensityOp.pure(psi_plus(), (2, 2))
    if name == "I_optimal":
        alphas = (3 * math.pi / 2, math.pi / 6, 5 * math.pi / 6)
        gammas = (2 * math.pi / 3, 4 * math.pi / 3, 0.0)
        alice = [Povm.projective(a) for a in alphas]
        alice.append(Povm(tuple(2 * bloch_effect(g) / 3 for g in gammas)))
        bob = [Povm.projective(-g) for g in gammas]
        return QuantumStrategy(state, tuple(alice), tuple(bob))
    if name == "chsh_optimal":
        # for |psi+>, <sigma(a) (x) sigma(b)> = -cos(a + b)
        alice = (Povm.projective(0.0), Povm.projective(math.pi / 2))
        bob = (Povm.projective(3 * math.pi / 4), Povm.projective(-3 * math.pi / 4))
        return QuantumStrategy(state, alice, bob)
    raise ValueError(f"unknown strategy {name!r}")


def behavior_from_strategy(s: QuantumStrategy) -> Behavior:
    sc = s.scenario
    t = np.zeros(sc.shape)
    for x, ma in enumerate(s.alice_povms):
        for y, mb in enumerate(s.bob_povms):
            for a, ea in enumerate(ma.effects):
                for b, eb in enumerate(mb.effects):
                    t[a, b, x, y] = born(s.state, ea, eb)
    return Behavior(sc, t)


def white_noise(s: QuantumStrategy, v: float) -> DensityOp:
    if not 0 <= v <= 1:
        raise ValueError("visibility must lie in [0, 1]")
    return s.state.mix(DensityOp.maximally_mixed(s.state.dims if len(s.state.dims) == 2 else s.local_dims), v)


def noisy_behavior(s: QuantumStrategy, v: float) -> Behavior:
    """Behavior of ``v rho + (1 - v) 1/d`` under the same measurements."""
    return behavior_from_strategy(s.with_state(white_noise(s, v)))


@dataclass(frozen=True)
class NoSignalingReport:
    max_discrepancy: float
    worst: tuple[str, int, int] | None
    tol: float

    @property
    def ok(self) -> bool:
        return self.max_discrepancy <= self.tol


def check_no_signaling(p: Behavior, tol: float = 1e-9) -> NoSignalingReport:
    """Largest spread of a local marginal across the counterpart's settings."""
    t = p.table
    worst, where = 0.0, None
    alice = t.sum(axis=1)  # [a, x, y]
    spread = alice.max(axis=2) - alice.min(axis=2)
    if spread.size and spread.max() > worst:
        a, x = np.unravel_index(np.argmax(spread), spread.shape)
        worst, where = float(spread.max()), ("A", int(x), int(a))
    bob = t.sum(axis=0)  # [b, x, y]
    spread = bob.max(axis=1) - bob.min(axis=1)
    if spread.size and spread.max() > worst:
        b, y = np.unravel_index(np.argmax(spread), spread.shape)
        worst, where = float(spread.max()), ("B", int(y), int(b))
    return NoSignalingReport(worst, where, tol)


# ---------------------------------------------------------------------------
# reducibility


@dataclass(frozen=True, eq=False)
class ReducibilityDecomposition:
    weights: np.ndarray
    sub_povms: Mapping[int, Povm]
    reconstruction_error: float

    def reconstruct(self) -> list[np.ndarray]:
        n = len(self.weights)
        d = next(iter(self.sub_povms.values())).dim
        out = [np.zeros((d, d), dtype=complex) for _ in range(n)]
        for j, m in self.sub_povms.items():
            for k in range(n):
                out[k] = out[k] + self.weights[j] * m.effects[k]
        return out


@dataclass(frozen=True)
class Irreducible:
    margin: float


@dataclass(frozen=True)
class Inconclusive:
    margin: float
    reconstruction_error: float


SdpFailure = sdp.SdpFailure


RECONSTRUCTION_TOL = 1e-7
IRREDUCIBLE_MARGIN = 1e-6


def reducibility_problem(m: Povm) -> tuple[sdp.SdpProblem, dict]:
    """Feasibility SDP for writing ``m`` as a mixture of POVMs missing one outcome.

    Blocks: ``F_k^(j) >= 0`` for every dropped outcome ``j`` and ``k != j``,
    plus the weights ``p_j >= 0``. Constraints: ``sum_k F_k^(j) = p_j 1``,
    ``sum_j F_k^(j) = E_k`` and ``sum_j p_j = 1``.
    """
    n, d = m.n_outcomes, m.dim
    bld = sdp.SdpBuilder()
    fblk = {(j, k): bld.add_block(d, hermitian=True) for j in range(n) for k in range(n) if k != j}
    pblk = [bld.add_block(1) for _ in range(n)]
    one = np.ones((1, 1))
    for j in range(n):
        for r in range(d):
            for c in range(r, d):
                unit = np.zeros((d, d), dtype=complex)
                unit[r, c] = 1
                terms = {fblk[j, k]: unit for k in range(n) if k != j}
                if r == c:
                    terms[pblk[j]] = -one
                bld.add_constraint(terms, 0.0)
                if c > r:
                    bld.add_constraint({fblk[j, k]: 1j * unit for k in range(n) if k != j}, 0.0)
    for k in range(n):
        bld.add_hermitian_equality({fblk[j, k]: 1.0 for j in range(n) if j != k}, m.effects[k])
    bld.add_constraint({pb: one for pb in pblk}, 1.0)
    return bld.build(), {"f": fblk, "p": pblk}


def decompose_into_fewer_outcomes(m: Povm, tol: float = 1e-8):
    """Return a :class:`ReducibilityDecomposition`, :class:`Irreducible` or
    :class:`Inconclusive`; raise :class:`SdpFailure` if the solver fails."""
    n, d = m.n_outcomes, m.dim
    if n < 3:
        raise ValueError("reducibility needs at least three outcomes")
    problem, index = reducibility_problem(m)
    sol = sdp.feasibility(problem, tol=tol)
    if sol.status == sdp.INFEASIBLE:
        if sol.margin >= IRREDUCIBLE_MARGIN:
            return Irreducible(float(sol.margin))
        return Inconclusive(float(sol.margin), math.inf)
    if sol.status != sdp.OPTIMAL:
        raise SdpFailure(f"reducibility SDP ended with status {sol.status}")
    p = np.array([max(float(sol.x[b][0, 0]), 0.0) for b in index["p"]])
    p = p / p.sum()
    subs = {}
    for j in range(n):
        if p[j] <= 1e-9:
            continue
        raw = [np.zeros((d, d), dtype=complex) if k == j else sol.x[index["f"][j, k]] / p[j] for k in range(n)]
        subs[j] = Povm.from_raw(raw)
    weights = np.array([p[j] if j in subs else 0.0 for j in range(n)])
    weights = weights / weights.sum()
    dec = ReducibilityDecomposition(weights, subs, math.nan)
    err = max(float(np.max(np.abs(r - e))) for r, e in zip(dec.reconstruct(), m.effects))
    dec = ReducibilityDecomposition(weights, subs, err)
    if err <= RECONSTRUCTION_TOL:
        return dec
    return Inconclusive(float(sol.margin), err)


def trine() -> Povm:
    return Povm(tuple(2 * bloch_effect(g) / 3 for g in (2 * math.pi / 3, 4 * math.pi / 3, 0.0)))


def uniform_effect_povm(n: int, d: int = 2) -> Povm:
    return Povm(tuple(np.eye(d, dtype=complex) / n for _ in range(n)))


__all__ = [
    "Scenario",
    "Behavior",
    "BellFunctional",
    "QuantumStrategy",
    "ReducibilityDecomposition",
    "Irreducible",
    "Inconclusive",
    "SdpFailure",
    "CATALOG",
    "functional_catalog",
    "evaluate",
    "evaluate_with_sigma",
    "restrict_outcome",
    "restrictions",
    "classical_bound",
    "ideal_strategy",
    "behavior_from_strategy",
    "noisy_behavior",
    "visibility_threshold",
    "check_no_signaling",
    "decompose_into_fewer_outcomes",
    "behavior_to_dict",
    "behavior_from_dict",
    "trine",
]
