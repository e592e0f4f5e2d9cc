"""Moment-matrix (NPA) relaxations of two-party Bell functionals.

Measurements are taken projective (any POVM dilates to one) and the last
outcome of every setting is eliminated through completeness, so a setting
with ``n`` outcomes contributes ``n - 1`` projectors. Since all catalog
functionals are real, the relaxation uses a real symmetric moment matrix:
a word and its reverse share one variable.
"""
from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import sparse

from . import sdp
from .scenarios import BellFunctional, QuantumStrategy, Scenario

Symbol = tuple[int, int, int]  # (party, setting, outcome)
Word = tuple[Symbol, ...]

MAX_BASIS = 1200
LEVELS = (1, 2, 3, "1+AB")
NEAR_OPTIMAL_GAP = 1e-5  # relative certified gap accepted when the solver stalls


@dataclass(frozen=True)
class Monomial:
    word: Word
    canonical: bool = True

    def __len__(self):
        return len(self.word)

    def __str__(self):
        if not self.word:
            return "1"
        return " ".join(f"{'AB'[p]}{o}|{s}" for p, s, o in self.word)


def _reduce(ops: Sequence[Symbol]) -> list[Symbol] | None:
    out: list[Symbol] = []
    for s in ops:
        if out and out[-1][1] == s[1]:
            if out[-1][2] == s[2]:
                continue  # idempotence
            return None  # orthogonal projectors of one setting
        out.append(s)
    return out


def canonicalize(word: Sequence[Symbol]) -> Monomial | None:
    """Normal form of an operator word, or ``None`` for the zero operator.

    Alice's symbols are moved before Bob's (keeping each party's order),
    then repeated projectors collapse and distinct outcomes of one setting
    annihilate.
    """
    alice = _reduce([s for s in word if s[0] == 0])
    if alice is None:
        return None
    bob = _reduce([s for s in word if s[0] == 1])
    if bob is None:
        return None
    return Monomial(tuple(alice + bob))


def adjoint(m: Monomial) -> Monomial:
    alice = [s for s in m.word if s[0] == 0]
    bob = [s for s in m.word if s[0] == 1]
    return Monomial(tuple(alice[::-1] + bob[::-1]))


def moment_key(m: Monomial) -> Word:
    """Variable label shared by a word and its adjoint."""
    return min(m.word, adjoint(m).word)


def symbols(scenario: Scenario) -> tuple[list[Symbol], list[Symbol]]:
    alice = [(0, x, a) for x, n in enumerate(scenario.alice_outcomes) for a in range(n - 1)]
    bob = [(1, y, b) for y, n in enumerate(scenario.bob_outcomes) for b in range(n - 1)]
    return alice, bob


def generating_basis(scenario: Scenario, level) -> list[Monomial]:
    """Canonical words of length at most ``level`` (or the ``"1+AB"`` set)."""
    alice, bob = symbols(scenario)
    allsyms = alice + bob
    seen: dict[Word, Monomial] = {(): Monomial(())}
    if level == "1+AB":
        words = [(s,) for s in allsyms] + [(a, b) for a in alice for b in bob]
    elif level in (1, 2, 3, 4):
        words = [w for k in range(1, level + 1) for w in itertools.product(allsyms, repeat=k)]
    else:
        raise ValueError(f"unsupported level {level!r}")
    for w in words:
        m = canonicalize(w)
        if m is not None and m.word not in seen:
            seen[m.word] = m
    basis = sorted(seen.values(), key=lambda m: (len(m), m.word))
    return basis


@dataclass(eq=False)
class MomentMatrix:
    basis: list[Monomial]
    entry_map: np.ndarray  # variable index per entry; -1 for zero, 0 for identity
    variables: list[Word]  # variables[0] is the identity word

    @property
    def size(self) -> int:
        return len(self.basis)

    @property
    def n_variables(self) -> int:
        """Free moments (identity excluded)."""
        return len(self.variables) - 1


def moment_matrix(scenario: Scenario, level) -> MomentMatrix:
    basis = generating_basis(scenario, level)
    n = len(basis)
    if n > MAX_BASIS:
        raise ValueError(f"moment matrix basis of {n} words exceeds the {MAX_BASIS} limit")
    index: dict[Word, int] = {(): 0}
    variables: list[Word] = [()]
    entry = np.full((n, n), -1, dtype=np.int64)
    adj = [adjoint(u).word for u in basis]
    for i in range(n):
        for j in range(i, n):
            m = canonicalize(adj[i] + basis[j].word)
            if m is None:
                continue
            key = moment_key(m)
            k = index.get(key)
            if k is None:
                k = index[key] = len(variables)
                variables.append(key)
            entry[i, j] = entry[j, i] = k
    return MomentMatrix(basis, entry, variables)


def _expand_projector(party: int, setting: int, outcome: int, n_out: int) -> list[tuple[float, Word]]:
    if outcome < n_out - 1:
        return [(1.0, ((party, setting, outcome),))]
    return [(1.0, ())] + [(-1.0, ((party, setting, o),)) for o in range(n_out - 1)]


def functional_moments(f: BellFunctional) -> dict[Word, float]:
    """Coefficients of ``f`` on canonical moments (``()`` is the constant)."""
    sc = f.scenario
    out: dict[Word, float] = {}
    for a, b, x, y, c in f.terms:
        for ca, wa in _expand_projector(0, x, a, sc.alice_outcomes[x]):
            for cb, wb in _expand_projector(1, y, b, sc.bob_outcomes[y]):
                key = moment_key(canonicalize(wa + wb))
                out[key] = out.get(key, 0.0) + c * ca * cb
    return out


@dataclass(eq=False)
class NpaRelaxation:
    problem: sdp.SdpProblem
    moments: MomentMatrix
    offset: float
    level: object


def build_relaxation(f: BellFunctional, level) -> NpaRelaxation:
    """LMI ``max offset + c.y  s.t.  Gamma(y) >= 0`` with ``Gamma(1,1) = 1``."""
    mm = moment_matrix(f.scenario, level)
    n = mm.size
    nvar = mm.n_variables
    coeffs = functional_moments(f)
    index = {w: k for k, w in enumerate(mm.variables)}
    c = np.zeros(nvar)
    offset = 0.0
    for w, v in coeffs.items():
        if w == ():
            offset += v
            continue
        k = index.get(w)
        if k is None:
            raise ValueError(f"moment {w} missing from the level-{level} matrix")
        c[k - 1] += v
    flat = mm.entry_map.ravel()
    f0 = (mm.entry_map == 0).astype(float)
    pos = np.flatnonzero(flat > 0)
    fmat = sparse.csr_matrix((np.ones(pos.size), (flat[pos] - 1, pos)), shape=(nvar, n * n))
    problem = sdp.SdpProblem.from_lmi([f0], fmat, c)
    return NpaRelaxation(problem, mm, offset, level)


@dataclass
class NpaResult:
    level: object
    basis_size: int
    n_variables: int
    bound: float
    lower: float
    status: str
    duality_gap: float
    iterations: int
    seconds: float

    @property
    def accepted(self) -> bool:
        """Optimal, or stalled with the certified bound close to the dual value."""
        if self.status == sdp.OPTIMAL:
            return True
        return (
            self.status == sdp.NUMERICAL_FAILURE
            and math.isfinite(self.bound)
            and self.duality_gap <= NEAR_OPTIMAL_GAP * (1 + abs(self.bound))
        )

    def to_dict(self) -> dict:
        return {
            "level": self.level,
            "basis_size": self.basis_size,
            "variable_count": self.n_variables,
            "bound": self.bound,
            "status": self.status,
            "duality_gap": self.duality_gap,
            "iterations": self.iterations,
            "seconds": self.seconds,
        }


def _bound_at(rel: NpaRelaxation, x: np.ndarray) -> float:
    problem = rel.problem
    residual = problem.a @ x.ravel() - problem.b
    lam = float(np.linalg.eigvalsh((x + x.T) / 2)[0])
    value = float(np.vdot(problem.c[0], x))
    return rel.offset + value + float(np.abs(residual).sum()) + x.shape[0] * max(0.0, -lam)


def certified_bound(rel: NpaRelaxation, sol: sdp.SdpSolution) -> float:
    """Upper bound on the relaxation implied by the primal point ``sol.x``.

    For moments ``y`` with ``Gamma(y) >= 0`` and any symmetric ``X``,
    ``Tr(X Gamma) = <F0, X> - y.(A(X))``. Every moment of a PSD moment
    matrix has modulus at most 1 and ``Tr Gamma <= n``, so the equality
    residual and any negative eigenvalue of ``X`` enter only through those
    bounds. The result holds whether or not the solver converged.

    The estimate is also taken at ``X`` moved back onto ``A(X) = b``, which
    trades many small residuals for one small eigenvalue shift; the smaller
    of the two is returned.
    """
    if not sol.x:
        return math.inf
    x = sol.x[0]
    a = rel.problem.a
    residual = a @ x.ravel() - rel.problem.b
    # moment variables own disjoint entries, so A A^T is diagonal
    norms = np.asarray(a.multiply(a).sum(axis=1)).ravel()
    projected = x - (a.T @ (residual / np.where(norms > 0, norms, 1.0))).reshape(x.shape)
    return min(_bound_at(rel, x), _bound_at(rel, projected))


def solve_relaxation(f: BellFunctional, level, tol: float = 1e-8, max_iter: int = 200) -> NpaResult:
    t0 = time.perf_counter()
    rel = build_relaxation(f, level)
    sol = sdp.solve(rel.problem, tol=tol, max_iter=max_iter)
    bound = certified_bound(rel, sol) if sol.status != sdp.INFEASIBLE else math.nan
    lower = rel.offset + sol.dual_value
    return NpaResult(
        level=level,
        basis_size=rel.moments.size,
        n_variables=rel.moments.n_variables,
        bound=bound,
        lower=lower,
        status=sol.status,
        duality_gap=bound - lower,
        iterations=sol.iterations,
        seconds=time.perf_counter() - t0,
    )


class NpaFailure(RuntimeError):
    pass


def upper_bound(f: BellFunctional, level, tol: float = 1e-8) -> float:
    res = solve_relaxation(f, level, tol=tol)
    if not res.accepted:
        raise NpaFailure(f"level-{level} relaxation of {f.name or 'functional'} ended with {res.status}")
    return res.bound


def moment_matrix_from_strategy(mm: MomentMatrix, s: QuantumStrategy) -> np.ndarray:
    """``Gamma_ij = Tr(rho u_i^dagger u_j)`` for a projective strategy."""
    da, db = s.local_dims
    ops = {}
    for x, m in enumerate(s.alice_povms):
        for a, e in enumerate(m.effects):
            ops[(0, x, a)] = np.kron(e, np.eye(db))
    for y, m in enumerate(s.bob_povms):
        for b, e in enumerate(m.effects):
            ops[(1, y, b)] = np.kron(np.eye(da), e)
    eye = np.eye(da * db, dtype=complex)

    def op(word):
        out = eye
        for sym in word:
            out = out @ ops[sym]
        return out

    vecs = [op(u.word) for u in mm.basis]
    rho = s.state.matrix
    n = mm.size
    g = np.zeros((n, n), dtype=complex)
    for i in range(n):
        for j in range(n):
            g[i, j] = np.trace(rho @ vecs[i].conj().T @ vecs[j])
    return g
