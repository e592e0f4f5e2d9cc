"""Monte Carlo coincidence counts and the statistics applied to them.

Counts are drawn per setting pair from a counter-based generator keyed by
``(seed, setting index)``, with settings indexed row-major in ``(x, y)``;
any subset of settings can therefore be regenerated in any order with
identical results. Detection efficiency only scales the number of
registered pairs (fair sampling).
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass
from typing import Mapping

import numpy as np

from .qcore import IDENTITY2, SIGMA_X, SIGMA_Y, SIGMA_Z, DensityOp
from .scenarios import (
    I_BINARY_BOUND,
    I_QUANTUM_MAX,
    Behavior,
    QuantumStrategy,
    Scenario,
    behavior_from_strategy,
    evaluate,
    evaluate_with_sigma,
    functional_catalog,
    white_noise,
)

MAX_ACCIDENTAL_PROB = 0.01
FIDELITY_SLOPE = 2.2


@dataclass(frozen=True)
class NoiseModel:
    """Noise applied before sampling.

    ``visibility`` mixes the state with white noise. ``basis_visibility``,
    when given as ``(v_zz, v_xx)``, additionally dephases Alice's qubit so
    that ``ZZ`` and ``XX`` correlations shrink by those factors separately.
    """

    visibility: float = 1.0
    efficiency: float = 1.0
    accidental_prob: float = 0.0
    basis_visibility: tuple[float, float] | None = None

    def __post_init__(self):
        for name in ("visibility", "efficiency", "accidental_prob"):
            v = float(getattr(self, name))
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1]")
            object.__setattr__(self, name, v)
        if self.accidental_prob > MAX_ACCIDENTAL_PROB:
            raise ValueError(f"accidental_prob above {MAX_ACCIDENTAL_PROB}")
        if self.basis_visibility is not None:
            pair = tuple(float(v) for v in self.basis_visibility)
            if len(pair) != 2 or not all(0.0 <= v <= 1.0 for v in pair):
                raise ValueError("basis_visibility must be two values in [0, 1]")
            object.__setattr__(self, "basis_visibility", pair)


def dephase_alice(rho: DensityOp, v_zz: float, v_xx: float) -> DensityOp:
    """Pauli channel on the first qubit shrinking its X and Z components by
    ``v_xx`` and ``v_zz`` (and Y by their product)."""
    if rho.dims[0] != 2:
        raise ValueError("basis visibilities need a qubit on Alice's side")
    db = rho.dim // 2
    probs = {
        "i": (1 + v_xx) * (1 + v_zz) / 4,
        "x": (1 + v_xx) * (1 - v_zz) / 4,
        "z": (1 - v_xx) * (1 + v_zz) / 4,
        "y": (1 - v_xx) * (1 - v_zz) / 4,
    }
    paulis = {"i": IDENTITY2, "x": SIGMA_X, "y": SIGMA_Y, "z": SIGMA_Z}
    out = np.zeros_like(rho.matrix)
    for k, p in probs.items():
        u = np.kron(paulis[k], np.eye(db))
        out = out + p * (u @ rho.matrix @ u.conj().T)
    return DensityOp((out + out.conj().T) / 2, rho.dims)


def noisy_state(s: QuantumStrategy, noise: NoiseModel) -> DensityOp:
    rho = white_noise(s, noise.visibility)
    if noise.basis_visibility is not None:
        rho = dephase_alice(rho, *noise.basis_visibility)
    return rho


def model_behavior(s: QuantumStrategy, noise: NoiseModel) -> Behavior:
    """Exact behavior the simulator samples from, accidentals included."""
    p = behavior_from_strategy(s.with_state(noisy_state(s, noise)))
    if noise.accidental_prob == 0:
        return p
    sc = p.scenario
    mask = sc.mask()
    flat = np.where(mask, 1.0, 0.0) / mask.sum(axis=(0, 1), keepdims=True)
    q = noise.accidental_prob
    return Behavior(sc, (p.table + q * flat) / (1 + q))


@dataclass(frozen=True, eq=False)
class CountsRecord:
    scenario: Scenario
    counts: np.ndarray  # padded [a, b, x, y]
    pairs_per_setting: float = 0.0
    seed: int | None = None

    def __post_init__(self):
        c = np.array(self.counts)
        if c.shape != self.scenario.shape:
            raise ValueError(f"counts shape {c.shape} != scenario shape {self.scenario.shape}")
        if np.any(c < 0) or np.any(c != np.round(c)):
            raise ValueError("counts must be non-negative integers")
        if np.any(c[~self.scenario.mask()]):
            raise ValueError("counts recorded for a nonexistent outcome")
        c = c.astype(np.int64)
        c.setflags(write=False)
        object.__setattr__(self, "counts", c)

    @property
    def totals(self) -> np.ndarray:
        return self.counts.sum(axis=(0, 1))

    def rows(self):
        sc = self.scenario
        for x, y in sc.settings():
            for a in range(sc.alice_outcomes[x]):
                for b in range(sc.bob_outcomes[y]):
                    yield x, y, a, b, int(self.counts[a, b, x, y])

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["x", "y", "a", "b", "count"])
        w.writerows(self.rows())
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, scenario: Scenario | None = None) -> "CountsRecord":
        reader = csv.DictReader(io.StringIO(text))
        if reader.fieldnames is None or set(reader.fieldnames) != {"x", "y", "a", "b", "count"}:
            raise ValueError("counts CSV needs exactly the columns x, y, a, b, count")
        rows = [tuple(int(r[k]) for k in ("x", "y", "a", "b", "count")) for r in reader]
        if not rows:
            raise ValueError("counts CSV has no rows")
        if scenario is None:
            na: dict[int, int] = {}
            nb: dict[int, int] = {}
            for x, y, a, b, _ in rows:
                na[x] = max(na.get(x, 0), a + 1)
                nb[y] = max(nb.get(y, 0), b + 1)
            if sorted(na) != list(range(len(na))) or sorted(nb) != list(range(len(nb))):
                raise ValueError("settings in the counts CSV are not contiguous")
            scenario = Scenario(tuple(na[x] for x in range(len(na))), tuple(nb[y] for y in range(len(nb))))
        counts = np.zeros(scenario.shape, dtype=np.int64)
        for x, y, a, b, n in rows:
            if not (0 <= x < scenario.n_x and 0 <= y < scenario.n_y):
                raise ValueError(f"setting ({x}, {y}) outside the scenario")
            if not (0 <= a < scenario.alice_outcomes[x] and 0 <= b < scenario.bob_outcomes[y]):
                raise ValueError(f"outcome ({a}, {b}) outside setting ({x}, {y})")
            counts[a, b, x, y] += n
        return cls(scenario, counts)

    def to_dict(self) -> dict:
        return {
            "kind": "counts",
            "scenario": self.scenario.to_dict(),
            "pairs_per_setting": self.pairs_per_setting,
            "seed": self.seed,
            "rows": [list(r) for r in self.rows()],
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "CountsRecord":
        if d.get("kind", "counts") != "counts":
            raise ValueError("not a counts record")
        sc = Scenario.from_dict(d["scenario"])
        counts = np.zeros(sc.shape, dtype=np.int64)
        for x, y, a, b, n in d["rows"]:
            counts[a, b, x, y] = n
        return cls(sc, counts, float(d.get("pairs_per_setting", 0.0)), d.get("seed"))

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def setting_generator(seed: int, index: int) -> np.random.Generator:
    """Philox stream for one setting pair."""
    return np.random.Generator(np.random.Philox(key=np.array([seed, index], dtype=np.uint64)))


def simulate_counts(s: QuantumStrategy, noise: NoiseModel, pairs_per_setting: float, seed: int) -> CountsRecord:
    if not pairs_per_setting > 0:
        raise ValueError("pairs_per_setting must be positive")
    p = behavior_from_strategy(s.with_state(noisy_state(s, noise)))
    sc = p.scenario
    counts = np.zeros(sc.shape, dtype=np.int64)
    mean = noise.efficiency**2 * pairs_per_setting
    for k, (x, y) in enumerate(sc.settings()):
        rng = setting_generator(seed, k)
        na, nb = sc.alice_outcomes[x], sc.bob_outcomes[y]
        probs = p.table[:na, :nb, x, y].ravel()
        probs = probs / probs.sum()
        total = int(rng.poisson(mean))
        block = rng.multinomial(total, probs)
        n_acc = int(rng.poisson(noise.accidental_prob * total))
        if n_acc:
            block = block + rng.multinomial(n_acc, np.full(na * nb, 1.0 / (na * nb)))
        counts[:na, :nb, x, y] = block.reshape(na, nb)
    return CountsRecord(sc, counts, float(pairs_per_setting), seed)


def estimate_behavior(c: CountsRecord) -> Behavior:
    """Relative frequencies with multinomial standard errors.

    Settings where every count falls in one outcome are listed in
    ``degenerate``; their standard errors are zero.
    """
    sc = c.scenario
    totals = c.totals.astype(float)
    for x, y in sc.settings():
        if totals[x, y] <= 0:
            raise ValueError(f"setting ({x}, {y}) has no coincidences")
    table = c.counts / totals[None, None]
    sigma = np.sqrt(table * (1 - table) / totals[None, None])
    degenerate = tuple((x, y) for x, y in sc.settings() if np.max(c.counts[:, :, x, y]) == totals[x, y])
    return Behavior(sc, table, sigma, totals, degenerate)


@dataclass(frozen=True)
class SignificanceReport:
    value: float
    sigma: float
    bound: float
    z: float
    p_value: float

    def to_dict(self) -> dict:
        return asdict(self)


def upper_tail(z: float) -> float:
    """One-sided Gaussian tail probability ``P(N(0,1) > z)``."""
    return 0.5 * math.erfc(z / math.sqrt(2))


def significance(value: float, sigma: float, bound: float) -> SignificanceReport:
    if not sigma > 0:
        raise ValueError("sigma must be positive")
    z = (value - bound) / sigma
    return SignificanceReport(float(value), float(sigma), float(bound), float(z), upper_tail(z))


@dataclass(frozen=True)
class ChshReport:
    s: float
    violation: float
    epsilon: float
    sigma: float | None = None

    def to_dict(self) -> dict:
        return asdict(self)


def _sub_behavior(p: Behavior, settings: tuple[int, int, int, int]) -> Behavior:
    x0, x1, y0, y1 = settings
    sc = p.scenario
    xs, ys = (x0, x1), (y0, y1)
    for x in xs:
        if not 0 <= x < sc.n_x:
            raise ValueError(f"Alice has no setting {x}")
        if sc.alice_outcomes[x] != 2:
            raise ValueError(f"Alice setting {x} is not binary")
    for y in ys:
        if not 0 <= y < sc.n_y:
            raise ValueError(f"Bob has no setting {y}")
        if sc.bob_outcomes[y] != 2:
            raise ValueError(f"Bob setting {y} is not binary")
    table = p.table[:2, :2][:, :, list(xs)][:, :, :, list(ys)]
    sigma = None if p.sigma is None else p.sigma[:2, :2][:, :, list(xs)][:, :, :, list(ys)]
    totals = None if p.totals is None else p.totals[np.ix_(xs, ys)]
    return Behavior(Scenario((2, 2), (2, 2)), table, sigma, totals)


def chsh_violation(p: Behavior, settings: tuple[int, int, int, int] = (0, 1, 0, 1)) -> ChshReport:
    """CHSH value from the binary settings ``(x0, x1, y0, y1)``.

    ``S = E00 + E01 + E10 - E11`` with ``E = sum (-1)^(a+b) P(ab|xy)``;
    ``epsilon`` is the shortfall from ``2 sqrt 2``.
    """
    sub = _sub_behavior(p, settings)
    f = functional_catalog("chsh")
    if sub.totals is None and sub.sigma is None:
        s, sig = evaluate(f, sub), None
    else:
        s, sig = evaluate_with_sigma(f, sub)
    return ChshReport(float(s), float(s - 2), float(2 * math.sqrt(2) - s), sig)


def fidelity_lower_bound(epsilon: float) -> float:
    if epsilon < 0:
        raise ValueError("epsilon must be non-negative")
    return max(0.0, 1.0 - FIDELITY_SLOPE * epsilon)


def mixed_binary_bound(fidelity: float) -> float:
    """Largest value of the functional reachable when only the fraction
    ``1 - fidelity`` of runs may use the three-outcome measurement."""
    if not 0.0 <= fidelity <= 1.0:
        raise ValueError("fidelity must lie in [0, 1]")
    return fidelity * I_BINARY_BOUND + (1 - fidelity) * I_QUANTUM_MAX
