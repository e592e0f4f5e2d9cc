"""Dense complex linear algebra and the quantum primitives built on it.

Matrices are plain ``numpy`` complex arrays. States and POVMs are thin,
validated, immutable wrappers around them.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np


@dataclass(frozen=True)
class Tolerances:
    structural: float = 1e-10  # hermiticity, PSD, trace, completeness
    spectral: float = 1e-9  # eigen-reconstruction, probability sums
    hermitian_flag: float = 1e-12


TOL = Tolerances()

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
IDENTITY2 = np.eye(2, dtype=complex)


def as_cmatrix(m) -> np.ndarray:
    a = np.array(m, dtype=complex)
    if a.ndim != 2:
        raise ValueError(f"expected a 2-d matrix, got shape {a.shape}")
    a.setflags(write=False)
    return a


def is_hermitian(m: np.ndarray, tol: float = TOL.structural) -> bool:
    m = np.asarray(m)
    return m.shape[0] == m.shape[1] and bool(np.max(np.abs(m - m.conj().T), initial=0.0) <= tol)


def kron(a, b) -> np.ndarray:
    return np.kron(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex))


def _fix_phase(v: np.ndarray) -> np.ndarray:
    """Rotate each column so its first non-negligible entry is real positive."""
    v = v.copy()
    for j in range(v.shape[1]):
        col = v[:, j]
        idx = np.flatnonzero(np.abs(col) > 1e-12)
        if idx.size:
            z = col[idx[0]]
            v[:, j] = col * (abs(z) / z)
    return v


def hermitian_eig(m, tol: float = TOL.structural) -> tuple[np.ndarray, np.ndarray]:
    """Eigen-decomposition of a Hermitian matrix.

    Returns ``(w, v)`` with eigenvalues in descending order and orthonormal
    eigenvectors as columns, so that ``m = v @ diag(w) @ v.conj().T``. Each
    eigenvector is phase-fixed (first nonzero component real positive);
    within a numerically degenerate eigenvalue cluster vectors are ordered
    lexicographically on their components.
    """
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError("hermitian_eig needs a square matrix")
    if not is_hermitian(m, tol):
        raise ValueError("hermitian_eig: matrix is not Hermitian")
    w, v = np.linalg.eigh((m + m.conj().T) / 2)
    w, v = w[::-1], _fix_phase(v[:, ::-1])
    # deterministic order inside degenerate clusters
    scale = max(1.0, float(np.max(np.abs(w), initial=0.0)))
    order = list(range(len(w)))
    start = 0
    while start < len(w):
        stop = start + 1
        while stop < len(w) and abs(w[stop] - w[start]) <= 1e-12 * scale:
            stop += 1
        if stop - start > 1:
            cluster = sorted(
                range(start, stop),
                key=lambda j: tuple(np.round(np.column_stack([v[:, j].real, v[:, j].imag]).ravel(), 12)),
                reverse=True,
            )
            order[start:stop] = cluster
        start = stop
    return w[order].copy(), v[:, order].copy()


def min_eigenvalue(m) -> float:
    return float(np.linalg.eigvalsh((np.asarray(m) + np.asarray(m).conj().T) / 2)[0])


def is_psd(m, tol: float = TOL.structural) -> bool:
    return is_hermitian(m, max(tol, TOL.hermitian_flag)) and min_eigenvalue(m) >= -tol


def psd_sqrt_inv(m) -> np.ndarray:
    w, v = np.linalg.eigh((m + m.conj().T) / 2)
    if w[0] <= 0:
        raise ValueError("matrix is not positive definite")
    return (v / np.sqrt(w)) @ v.conj().T


def bloch_effect(theta: float) -> np.ndarray:
    """Rank-one projector ``(1 + cos(theta) Z + sin(theta) X) / 2``."""
    return (IDENTITY2 + np.cos(theta) * SIGMA_Z + np.sin(theta) * SIGMA_X) / 2


@dataclass(frozen=True, eq=False)
class DensityOp:
    matrix: np.ndarray
    dims: tuple[int, ...] = field(default=())

    def __post_init__(self):
        m = as_cmatrix(self.matrix)
        d = m.shape[0]
        if m.shape != (d, d):
            raise ValueError("density operator must be square")
        if not is_hermitian(m, TOL.structural):
            raise ValueError("density operator must be Hermitian")
        if abs(np.trace(m).real - 1) > TOL.structural:
            raise ValueError(f"density operator trace {np.trace(m).real!r} != 1")
        if min_eigenvalue(m) < -TOL.structural:
            raise ValueError("density operator is not positive semidefinite")
        dims = tuple(self.dims) or (d,)
        if int(np.prod(dims)) != d:
            raise ValueError(f"local dims {dims} do not multiply to {d}")
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "dims", dims)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @classmethod
    def pure(cls, psi, dims: Sequence[int] = ()) -> "DensityOp":
        psi = np.asarray(psi, dtype=complex).ravel()
        nrm = np.linalg.norm(psi)
        if nrm == 0:
            raise ValueError("zero vector is not a state")
        psi = psi / nrm
        return cls(np.outer(psi, psi.conj()), tuple(dims))

    @classmethod
    def maximally_mixed(cls, dims: Sequence[int]) -> "DensityOp":
        d = int(np.prod(dims))
        return cls(np.eye(d, dtype=complex) / d, tuple(dims))

    def mix(self, other: "DensityOp", weight: float) -> "DensityOp":
        """``weight * self + (1 - weight) * other``."""
        return DensityOp(weight * self.matrix + (1 - weight) * other.matrix, self.dims)


@dataclass(frozen=True, eq=False)
class Povm:
    effects: tuple[np.ndarray, ...]

    def __post_init__(self):
        effects = tuple(as_cmatrix(e) for e in self.effects)
        if len(effects) < 1:
            raise ValueError("POVM needs at least one effect")
        d = effects[0].shape[0]
        for e in effects:
            if e.shape != (d, d):
                raise ValueError("all effects must share one square shape")
            if not is_psd(e, TOL.structural):
                raise ValueError("POVM effect is not positive semidefinite")
        if np.max(np.abs(sum(effects) - np.eye(d))) > TOL.structural:
            raise ValueError("POVM effects do not sum to identity")
        object.__setattr__(self, "effects", effects)

    @property
    def dim(self) -> int:
        return self.effects[0].shape[0]

    @property
    def n_outcomes(self) -> int:
        return len(self.effects)

    def __len__(self):
        return len(self.effects)

    def __getitem__(self, k):
        return self.effects[k]

    @classmethod
    def projective(cls, theta: float) -> "Povm":
        p = bloch_effect(theta)
        return cls((p, IDENTITY2 - p))

    @classmethod
    def from_raw(cls, effects: Sequence[np.ndarray]) -> "Povm":
        """Project nearly valid effects onto an exact POVM.

        Hermitises, clips negative eigenvalues and re-normalises with
        ``S^{-1/2} E S^{-1/2}`` where ``S`` is the effect sum.
        """
        cleaned = []
        for e in effects:
            e = np.asarray(e, dtype=complex)
            e = (e + e.conj().T) / 2
            w, v = np.linalg.eigh(e)
            cleaned.append((v * np.clip(w, 0, None)) @ v.conj().T)
        s_inv = psd_sqrt_inv(sum(cleaned))
        fixed = [s_inv @ e @ s_inv for e in cleaned]
        return cls(tuple((e + e.conj().T) / 2 for e in fixed))


def born(state: DensityOp, effect_a, effect_b, tol: float = TOL.structural) -> float:
    """Joint probability ``Tr[(E_A (x) E_B) rho]``."""
    effect_a = np.asarray(effect_a)
    effect_b = np.asarray(effect_b)
    if effect_a.shape[0] * effect_b.shape[0] != state.dim:
        raise ValueError(
            f"effect dims {effect_a.shape[0]}x{effect_b.shape[0]} do not match state dim {state.dim}"
        )
    p = float(np.real(np.trace(kron(effect_a, effect_b) @ state.matrix)))
    if p < -tol or p > 1 + tol:
        raise ValueError(f"probability {p} outside [0, 1]")
    return min(max(p, 0.0), 1.0)


def fidelity_with_pure(rho: DensityOp, phi) -> float:
    phi = np.asarray(phi, dtype=complex).ravel()
    if phi.shape[0] != rho.dim:
        raise ValueError("dimension mismatch")
    if abs(np.linalg.norm(phi) - 1) > TOL.structural:
        raise ValueError("reference vector is not normalized")
    return float(np.real(phi.conj() @ rho.matrix @ phi))


def psi_plus() -> np.ndarray:
    """``(|01> + |10>) / sqrt(2)``."""
    return np.array([0, 1, 1, 0], dtype=complex) / np.sqrt(2)


def partial_trace(rho: np.ndarray, dims: tuple[int, int], keep: int) -> np.ndarray:
    da, db = dims
    r = np.asarray(rho).reshape(da, db, da, db)
    if keep == 0:
        return np.einsum("ijkj->ik", r)
    return np.einsum("ijil->jl", r)


def haar_state(dim: int, rng: np.random.Generator) -> np.ndarray:
    z = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return z / np.linalg.norm(z)


def haar_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))
