"""Jones-calculus model of the two-path polarization interferometer that
realizes a three-outcome qubit measurement.

Modes are ordered path-major: index ``2 * path + pol`` with path ``a = 0``,
``b = 1`` and polarization ``H = 0``, ``V = 1``. The photon enters in path
``a``; leaving in path ``b`` is outcome 2, while path ``a`` passes a final
half-wave plate and beam splitter whose two ports are outcomes 0 and 1.
Angles are in degrees at the interface.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy import optimize

from .qcore import Povm

PATH_A, PATH_B = 0, 1
H, V = 0, 1
UNREACHABLE_RESIDUAL = 1e-2
FIT_DOMAIN = (90.0, 180.0)
GRID_STEP = 0.01

_PA = np.diag([1.0, 0.0]).astype(complex)
_PB = np.diag([0.0, 1.0]).astype(complex)
_SWAP = np.array([[0, 1], [1, 0]], dtype=complex)


def mode(path: int, pol: int) -> int:
    return 2 * path + pol


@dataclass(frozen=True, eq=False)
class OpticalState:
    amplitudes: np.ndarray

    def __post_init__(self):
        amp = np.asarray(self.amplitudes, dtype=complex).ravel()
        if amp.shape != (4,):
            raise ValueError("optical state needs four mode amplitudes")
        if abs(np.linalg.norm(amp) - 1) > 1e-12:
            raise ValueError("optical state is not normalized")
        object.__setattr__(self, "amplitudes", amp)

    @classmethod
    def in_path_a(cls, polarization) -> "OpticalState":
        pol = np.asarray(polarization, dtype=complex)
        return cls(np.concatenate([pol / np.linalg.norm(pol), np.zeros(2)]))

    def path_weights(self) -> tuple[float, float]:
        p = np.abs(self.amplitudes) ** 2
        return float(p[0] + p[1]), float(p[2] + p[3])


@dataclass(frozen=True)
class SagnacConfig:
    gamma_r: float = 0.0
    gamma_t: float = 117.37
    gamma_o: float = 112.5

    def __post_init__(self):
        for name in ("gamma_r", "gamma_t", "gamma_o"):
            val = float(getattr(self, name))
            if not math.isfinite(val):
                raise ValueError(f"{name} must be finite")
            object.__setattr__(self, name, val % 180.0)

    def with_gamma_t(self, gamma_t: float) -> "SagnacConfig":
        return SagnacConfig(self.gamma_r, gamma_t, self.gamma_o)


def u_hwp(gamma_deg: float) -> np.ndarray:
    """Half-wave plate with its fast axis at ``gamma_deg`` from H."""
    t = math.radians(2 * gamma_deg)
    c, s = math.cos(t), math.sin(t)
    return np.array([[c, s], [s, -c]], dtype=complex)


def u_pbs() -> np.ndarray:
    """H is transmitted in place; V is reflected to the other path with phase ``i``."""
    return np.kron(np.eye(2), np.diag([1.0, 0.0])) + 1j * np.kron(_SWAP, np.diag([0.0, 1.0]))


def _plates(cfg: SagnacConfig) -> np.ndarray:
    return np.kron(_PA, u_hwp(cfg.gamma_t)) + np.kron(_PB, u_hwp(cfg.gamma_r))


def sagnac_unitary(cfg: SagnacConfig) -> np.ndarray:
    pbs = u_pbs()
    return pbs @ _plates(cfg) @ pbs


def _output_circuit(cfg: SagnacConfig) -> tuple[np.ndarray, np.ndarray]:
    us = sagnac_unitary(cfg)
    tail = u_pbs() @ np.kron(np.eye(2), u_hwp(cfg.gamma_o)) @ np.kron(_PA, np.eye(2))
    return us, tail @ us


def kraus_operators(cfg: SagnacConfig) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Kraus operators mapping the input polarization to each outcome's mode."""
    us, out = _output_circuit(cfg)
    a0 = out[2:, :2]
    a1 = out[:2, :2]
    a2 = us[2:, :2]
    return a0, a1, a2


def implemented_effects(cfg: SagnacConfig) -> list[np.ndarray]:
    return [k.conj().T @ k for k in kraus_operators(cfg)]


def implemented_povm(cfg: SagnacConfig) -> Povm:
    return Povm(tuple((e + e.conj().T) / 2 for e in implemented_effects(cfg)))


def outcome_probabilities(cfg: SagnacConfig, polarization) -> np.ndarray:
    psi = np.asarray(polarization, dtype=complex)
    psi = psi / np.linalg.norm(psi)
    return np.array([float(np.linalg.norm(k @ psi) ** 2) for k in kraus_operators(cfg)])


def _grid_effects(cfg: SagnacConfig, gammas: np.ndarray) -> np.ndarray:
    """Implemented effects for many transmitted-plate angles, shape ``(n, 3, 2, 2)``."""
    t = np.radians(2 * np.asarray(gammas, dtype=float))
    hwp = np.zeros((t.size, 2, 2), dtype=complex)
    hwp[:, 0, 0], hwp[:, 0, 1] = np.cos(t), np.sin(t)
    hwp[:, 1, 0], hwp[:, 1, 1] = np.sin(t), -np.cos(t)
    plates = np.kron(_PB, u_hwp(cfg.gamma_r))[None] + np.einsum("ij,nkl->nikjl", _PA, hwp).reshape(-1, 4, 4)
    pbs = u_pbs()
    us = pbs @ plates @ pbs
    tail = u_pbs() @ np.kron(np.eye(2), u_hwp(cfg.gamma_o)) @ np.kron(_PA, np.eye(2))
    out = tail @ us
    kraus = np.stack([out[:, 2:, :2], out[:, :2, :2], us[:, 2:, :2]], axis=1)
    return np.conj(np.swapaxes(kraus, -1, -2)) @ kraus


def povm_distance(effects, target: Povm) -> float:
    """Largest entrywise deviation between two effect lists."""
    return float(max(np.max(np.abs(np.asarray(e) - t)) for e, t in zip(effects, target.effects)))


@dataclass(frozen=True)
class AngleFit:
    gamma_t: float
    residual: float
    reachable: bool


def fit_transmitted_angle(target: Povm, cfg: SagnacConfig = SagnacConfig()) -> AngleFit:
    """Fit the transmitted-path plate angle to ``target`` with the others fixed.

    ``gamma_t`` and ``180 - gamma_t`` implement the same measurement, so the
    search runs over ``(90, 180]``: a grid scan at 0.01 degree followed by a
    golden-section refinement around the best grid point.
    """
    if target.n_outcomes != 3 or target.dim != 2:
        raise ValueError("target must be a three-outcome qubit POVM")

    def cost(g: float) -> float:
        return povm_distance(implemented_effects(cfg.with_gamma_t(g)), target)

    lo, hi = FIT_DOMAIN
    n = int(round((hi - lo) / GRID_STEP))
    grid = lo + GRID_STEP * np.arange(1, n + 1)
    targets = np.stack(target.effects)[None]
    values = np.max(np.abs(_grid_effects(cfg, grid) - targets), axis=(1, 2, 3))
    k = int(np.argmin(values))
    g0 = float(grid[k])
    best = (g0, float(values[k]))
    try:
        res = optimize.minimize_scalar(cost, bracket=(g0 - GRID_STEP, g0, g0 + GRID_STEP), method="golden", tol=1e-12)
        if res.fun < best[1]:
            best = (float(res.x), float(res.fun))
    except ValueError:
        pass  # flat cost around the grid point: keep the grid answer
    gamma = best[0] % 180.0
    if gamma <= lo:
        gamma = 180.0 - gamma if gamma > 0 else 180.0
    return AngleFit(gamma, best[1], best[1] <= UNREACHABLE_RESIDUAL)


def _complex_list(m: np.ndarray):
    return [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(m)]


def report(cfg: SagnacConfig, target: Povm | None = None, fit: AngleFit | None = None) -> dict:
    kraus = kraus_operators(cfg)
    effects = implemented_effects(cfg)
    out = {
        "config": asdict(cfg),
        "kraus": [_complex_list(k) for k in kraus],
        "implemented_povm": [_complex_list(e) for e in effects],
        "completeness_error": float(np.max(np.abs(sum(effects) - np.eye(2)))),
    }
    if target is not None:
        out["distance_to_target"] = povm_distance(effects, target)
    if fit is not None:
        out["fit"] = asdict(fit)
    return out


def report_json(cfg: SagnacConfig, target: Povm | None = None, fit: AngleFit | None = None) -> str:
    return json.dumps(report(cfg, target, fit), indent=2, sort_keys=True)


def completeness_error(cfg: SagnacConfig) -> float:
    effects = implemented_effects(cfg)
    return float(np.max(np.abs(sum(effects) - np.eye(2))))


__all__ = [
    "AngleFit",
    "OpticalState",
    "SagnacConfig",
    "completeness_error",
    "fit_transmitted_angle",
    "implemented_effects",
    "implemented_povm",
    "kraus_operators",
    "mode",
    "outcome_probabilities",
    "povm_distance",
    "report",
    "report_json",
    "sagnac_unitary",
    "u_hwp",
    "u_pbs",
]
