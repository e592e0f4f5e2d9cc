"""Small dense semidefinite programming.

Problems are stored in standard primal form::

    optimise  <C, X>   s.t.  <A_i, X> = b_i,   X = diag(X_1, ..., X_k) >= 0

over real symmetric blocks. A complex Hermitian block of size ``d`` is carried
as the real ``2d x 2d`` block ``[[Re, -Im], [Im, Re]]``; :class:`SdpBuilder`
handles the embedding and :func:`solve` undoes it in the returned solution.

The solver is an infeasible-start primal-dual path-following method using the
HKM search direction with a Mehrotra predictor-corrector, and a dense Schur
complement factorised by Cholesky.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np
import scipy.linalg as sla
from scipy import sparse
from scipy.sparse import linalg as spla

log = logging.getLogger(__name__)

STALL_ITERS = 8  # iterations allowed without halving the merit

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
NUMERICAL_FAILURE = "numerical_failure"


class SdpFailure(RuntimeError):
    """A solve ended without a usable optimum."""


@dataclass(frozen=True, eq=False)
class SdpProblem:
    blocks: tuple[int, ...]
    c: tuple[np.ndarray, ...]
    a: sparse.csr_matrix
    b: np.ndarray
    sense: str = "min"
    hermitian: tuple[bool, ...] = ()

    def __post_init__(self):
        if self.sense not in ("min", "max"):
            raise ValueError("sense must be 'min' or 'max'")
        blocks = tuple(int(n) for n in self.blocks)
        herm = tuple(self.hermitian) or (False,) * len(blocks)
        a = sparse.csr_matrix(self.a, dtype=float)
        b = np.asarray(self.b, dtype=float).ravel()
        c = tuple(np.asarray(ci, dtype=float) for ci in self.c)
        if len(c) != len(blocks) or len(herm) != len(blocks):
            raise ValueError("one objective matrix and one hermitian flag per block")
        for n, ci, h in zip(blocks, c, herm):
            if ci.shape != (n, n):
                raise ValueError("objective block has the wrong shape")
            if h and n % 2:
                raise ValueError("embedded Hermitian blocks have even size")
        if a.shape != (b.size, sum(n * n for n in blocks)):
            raise ValueError(f"constraint matrix shape {a.shape} inconsistent with blocks/rhs")
        object.__setattr__(self, "blocks", blocks)
        object.__setattr__(self, "hermitian", herm)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "c", c)

    @property
    def n_constraints(self) -> int:
        return self.b.size

    @property
    def offsets(self) -> np.ndarray:
        return np.concatenate([[0], np.cumsum([n * n for n in self.blocks])])

    def constraint_block(self, i: int, k: int) -> np.ndarray:
        """Dense constraint matrix ``A_i`` restricted to block ``k``."""
        off = self.offsets
        n = self.blocks[k]
        return self.a[i, off[k]:off[k + 1]].toarray().reshape(n, n)

    @classmethod
    def from_lmi(cls, f0: Sequence[np.ndarray], f: sparse.spmatrix, c: np.ndarray) -> "SdpProblem":
        """Wrap ``max c.y  s.t.  F0 + sum_i y_i F_i >= 0`` as a primal problem.

        ``f`` holds one row per ``F_i`` (vectorised blocks). The primal is
        ``min <F0, X>  s.t.  <-F_i, X> = c_i``, whose dual is the LMI above,
        so the LMI optimum is ``dual_value`` and every primal feasible point
        certifies an upper bound.
        """
        return cls(
            blocks=tuple(m.shape[0] for m in f0),
            c=tuple(np.asarray(m, dtype=float) for m in f0),
            a=-sparse.csr_matrix(f),
            b=np.asarray(c, dtype=float),
            sense="min",
        )


@dataclass(eq=False)
class SdpSolution:
    status: str
    primal_value: float
    dual_value: float
    x: list[np.ndarray]
    y: np.ndarray
    z: list[np.ndarray]
    iterations: int
    primal_infeasibility: float = math.nan
    dual_infeasibility: float = math.nan
    relative_gap: float = math.nan
    margin: float = math.nan
    certificate: np.ndarray | None = None
    history: list[tuple[float, float, float, float]] = field(default_factory=list)

    @property
    def value(self) -> float:
        return self.primal_value


def embed(h: np.ndarray) -> np.ndarray:
    h = np.asarray(h, dtype=complex)
    return np.block([[h.real, -h.imag], [h.imag, h.real]])


def unembed(x: np.ndarray) -> np.ndarray:
    d = x.shape[0] // 2
    re = (x[:d, :d] + x[d:, d:]) / 2
    im = (x[d:, :d] - x[:d, d:]) / 2
    h = re + 1j * im
    return (h + h.conj().T) / 2


class SdpBuilder:
    """Assemble an :class:`SdpProblem` from per-block coefficient matrices.

    For a Hermitian block the functional of a coefficient matrix ``G`` is
    ``Re Tr(G^dagger H)``; for a real block it is ``sum(G * X)`` with ``G``
    symmetrised.
    """

    def __init__(self):
        self._dims: list[int] = []
        self._herm: list[bool] = []
        self._rows: list[dict[int, np.ndarray]] = []
        self._rhs: list[float] = []
        self._obj: dict[int, np.ndarray] = {}
        self._sense = "min"

    def add_block(self, dim: int, hermitian: bool = False) -> int:
        self._dims.append(int(dim))
        self._herm.append(bool(hermitian))
        return len(self._dims) - 1

    def _real_coeff(self, k: int, g) -> np.ndarray:
        g = np.atleast_2d(np.asarray(g))
        if g.shape != (self._dims[k], self._dims[k]):
            raise ValueError(f"block {k} expects a {self._dims[k]}x{self._dims[k]} coefficient")
        if self._herm[k]:
            g = 0.5 * embed(g.astype(complex))
        else:
            if np.iscomplexobj(g) and np.any(g.imag):
                raise ValueError("complex coefficient on a real block")
            g = np.real(g)
        return (g + g.T) / 2

    def add_constraint(self, terms: Mapping[int, np.ndarray], rhs: float) -> None:
        self._rows.append({k: self._real_coeff(k, g) for k, g in terms.items()})
        self._rhs.append(float(rhs))

    def add_hermitian_equality(self, terms: Mapping[int, np.ndarray], rhs: np.ndarray) -> None:
        """Impose ``sum_k T_k(H_k) = rhs`` entrywise for a Hermitian ``d x d`` rhs.

        ``terms`` maps block index to a scalar weight; every block involved
        must have the same size as ``rhs``. Adds ``d*d`` real equations.
        """
        rhs = np.asarray(rhs, dtype=complex)
        d = rhs.shape[0]
        for r in range(d):
            for c in range(r, d):
                unit = np.zeros((d, d), dtype=complex)
                unit[r, c] = 1
                self.add_constraint({k: w * unit for k, w in terms.items()}, rhs[r, c].real)
                if c > r and any(self._herm[k] for k in terms):
                    self.add_constraint({k: w * 1j * unit for k, w in terms.items()}, rhs[r, c].imag)

    def set_objective(self, terms: Mapping[int, np.ndarray], sense: str = "min") -> None:
        self._obj = {k: self._real_coeff(k, g) for k, g in terms.items()}
        self._sense = sense

    def build(self) -> SdpProblem:
        real_dims = [2 * d if h else d for d, h in zip(self._dims, self._herm)]
        offsets = np.concatenate([[0], np.cumsum([n * n for n in real_dims])]).astype(int)
        rows, cols, vals = [], [], []
        for i, row in enumerate(self._rows):
            for k, g in row.items():
                nz = np.flatnonzero(g)
                rows.extend([i] * nz.size)
                cols.extend((offsets[k] + nz).tolist())
                vals.extend(g.ravel()[nz].tolist())
        a = sparse.csr_matrix((vals, (rows, cols)), shape=(len(self._rows), int(offsets[-1])))
        c = tuple(self._obj.get(k, np.zeros((n, n))) for k, n in enumerate(real_dims))
        return SdpProblem(tuple(real_dims), c, a, np.array(self._rhs), self._sense, tuple(self._herm))


# ---------------------------------------------------------------------------
# solver internals


class _Operator:
    """Constraint map ``X -> A(X)``, its adjoint, and the HKM Schur complement."""

    dense_limit = 4_000_000
    symmetrize_limit = 4000
    chunk = 64

    def __init__(self, blocks: Sequence[int], a: sparse.csr_matrix):
        self.blocks = list(blocks)
        self.a = a
        self.at = a.T.tocsr()
        self.m = a.shape[0]
        self.offsets = np.concatenate([[0], np.cumsum([n * n for n in blocks])]).astype(int)
        self.parts = []
        csc = a.tocsc()
        for k, n in enumerate(self.blocks):
            sub = csc[:, self.offsets[k]:self.offsets[k + 1]].tocsr()
            rows = np.flatnonzero(np.diff(sub.indptr))
            sub = sub[rows]
            if rows.size * n * n <= self.dense_limit:
                self.parts.append(("dense", rows, sub.toarray().reshape(rows.size, n, n)))
            else:
                self.parts.append(("sparse", rows, sub))

    def forward(self, xs: Sequence[np.ndarray]) -> np.ndarray:
        return self.a @ np.concatenate([x.ravel() for x in xs])

    def adjoint(self, y: np.ndarray) -> list[np.ndarray]:
        v = self.at @ y
        return [v[self.offsets[k]:self.offsets[k + 1]].reshape(n, n) for k, n in enumerate(self.blocks)]

    def schur(self, xs, zinvs) -> np.ndarray:
        m = np.zeros((self.m, self.m))
        for (kind, rows, data), x, zi, n in zip(self.parts, xs, zinvs, self.blocks):
            if rows.size == 0:
                continue
            if kind == "dense":
                t = x @ data @ zi
                m[np.ix_(rows, rows)] += data.reshape(rows.size, -1) @ t.reshape(rows.size, -1).T
                continue
            sub = data
            cols = np.empty((n * n, self.chunk))
            for start in range(0, rows.size, self.chunk):
                stop = min(start + self.chunk, rows.size)
                for j in range(start, stop):
                    lo, hi = sub.indptr[j], sub.indptr[j + 1]
                    r, c = np.divmod(sub.indices[lo:hi], n)
                    g = x[:, r] @ (sub.data[lo:hi, None] * zi[c, :])
                    cols[:, j - start] = g.ravel()
                blockcols = sub @ cols[:, : stop - start]
                m[np.ix_(rows, rows[start:stop])] += blockcols
        if self.m > self.symmetrize_limit:
            return m  # exact symmetry holds up to rounding; skip the temporaries
        return (m + m.T) / 2


def _sym(x):
    return (x + x.T) / 2


def _inner(xs, zs) -> float:
    return float(sum(np.vdot(x, z) for x, z in zip(xs, zs)))


def _norm(xs) -> float:
    return math.sqrt(sum(float(np.vdot(x, x)) for x in xs))


def _max_step(x: np.ndarray, dx: np.ndarray, chol: np.ndarray) -> float:
    li = sla.solve_triangular(chol, np.eye(x.shape[0]), lower=True)
    w = np.linalg.eigvalsh(_sym(li @ dx @ li.T))
    return math.inf if w[0] >= 0 else -1.0 / w[0]


def _prune(a: sparse.csr_matrix, b: np.ndarray, tol: float = 1e-9):
    """Drop linearly dependent constraints; report inconsistency.

    Returns ``(keep, consistent)`` where ``keep`` indexes retained rows.
    """
    m = a.shape[0]
    if m == 0:
        return np.arange(0), True
    gram = (a @ a.T).tocsr()
    if gram.nnz == m and np.all(gram.diagonal() > 0):
        return np.arange(m), True
    g = gram.toarray()
    _, r, piv = sla.qr(g, pivoting=True, mode="economic")
    diag = np.abs(np.diag(r))
    rank = int(np.sum(diag > tol * max(diag[0], 1.0))) if diag.size else 0
    keep = np.sort(piv[:rank])
    if rank == m:
        return keep, True
    drop = np.setdiff1d(np.arange(m), keep)
    ak = a[keep].toarray()
    coef, *_ = np.linalg.lstsq(ak.T, a[drop].toarray().T, rcond=None)
    consistent = bool(np.max(np.abs(coef.T @ b[keep] - b[drop])) <= 1e-8 * (1 + np.abs(b).max()))
    return keep, consistent


def _chol(mat):
    try:
        return np.linalg.cholesky(mat)
    except np.linalg.LinAlgError:
        return None


class _Schur:
    """Cholesky of the Schur complement.

    Systems up to ``in_place_limit`` keep the matrix for one step of
    iterative refinement; larger ones are factored in place to halve peak
    memory and rebuilt if a regularized retry is needed. ``build`` returns a
    fresh copy of the matrix.
    """

    in_place_limit = 12000
    lstsq_limit = 4000
    ridges = (1e-13, 1e-11, 1e-9)

    def __init__(self, n: int, build):
        self.m = None
        self.factor = None
        self.ok = True
        if n > self.in_place_limit:
            self._factor_in_place(build)
            return
        m = self.m = build()
        self.factor = self._try(lambda: sla.cho_factor(m, lower=True, check_finite=False))
        scale = max(1.0, float(np.max(np.abs(np.diag(m)), initial=0.0)))
        diag = np.diag_indices_from(m)
        for ridge in self.ridges:
            if self.factor is not None:
                break
            m[diag] += ridge * scale
            self.factor = self._try(lambda: sla.cho_factor(m, lower=True, check_finite=False))
            m[diag] -= ridge * scale
        if self.factor is None and n > self.lstsq_limit:
            self.ok = False

    @staticmethod
    def _try(factorize):
        try:
            return factorize()
        except (np.linalg.LinAlgError, ValueError):
            return None

    def _factor_in_place(self, build):
        # the transpose is Fortran-ordered, so LAPACK works without a copy
        m = build()
        scale = max(1.0, float(np.max(np.abs(np.diag(m)), initial=0.0)))
        self.factor = self._try(lambda: sla.cho_factor(m.T, lower=False, overwrite_a=True, check_finite=False))
        for ridge in self.ridges:
            if self.factor is not None:
                return
            m = None  # drop the spoiled copy before rebuilding
            m = build()
            m[np.diag_indices_from(m)] += ridge * scale
            self.factor = self._try(lambda: sla.cho_factor(m.T, lower=False, overwrite_a=True, check_finite=False))
        self.ok = self.factor is not None

    def solve(self, rhs):
        if self.m is None:
            return sla.cho_solve(self.factor, rhs)
        if self.factor is None:
            return np.linalg.lstsq(self.m, rhs, rcond=None)[0]
        x = sla.cho_solve(self.factor, rhs)
        return x + sla.cho_solve(self.factor, rhs - self.m @ x)


def _finish_blocks(problem: SdpProblem, xs):
    return [unembed(x) if h else x.copy() for x, h in zip(xs, problem.hermitian)]


def solve(problem: SdpProblem, tol: float = 1e-8, max_iter: int = 200) -> SdpSolution:
    """Solve an :class:`SdpProblem` by primal-dual interior point.

    On ``optimal`` the relative primal/dual residuals and the relative
    duality gap are all below ``tol``. Hitting ``max_iter`` or stalling
    returns ``numerical_failure`` with the last iterate. A diverging iterate
    that approximates a Farkas ray returns ``infeasible`` with that ray as
    the certificate.
    """
    sign = 1.0 if problem.sense == "min" else -1.0
    keep, consistent = _prune(problem.a, problem.b)
    if not consistent:
        return _linear_infeasible(problem)
    a = problem.a[keep]
    b = problem.b[keep]
    blocks = list(problem.blocks)
    cs = [sign * c for c in problem.c]
    op = _Operator(blocks, a)
    n_tot = sum(blocks)
    nb = float(np.linalg.norm(b))
    nc = _norm(cs)

    row_norms = np.sqrt(np.asarray(a.multiply(a).sum(axis=1))).ravel() if a.shape[0] else np.zeros(0)
    xi = max(10.0, math.sqrt(n_tot), float(np.max(n_tot * (1 + np.abs(b)) / (1 + row_norms), initial=0.0)))
    eta = max(10.0, math.sqrt(n_tot), float(np.max(row_norms, initial=0.0)), nc)
    xs = [xi * np.eye(n) for n in blocks]
    zs = [eta * np.eye(n) for n in blocks]
    y = np.zeros(b.size)

    history = []
    status = NUMERICAL_FAILURE
    certificate = None
    margin = math.nan
    it = 0
    pinf = dinf = relgap = math.inf
    best = (math.inf, xs, y, zs, (pinf, dinf, relgap))
    progress = (math.inf, 0)  # merit and iteration of the last halving
    for it in range(max_iter + 1):
        rp = b - op.forward(xs)
        aty = op.adjoint(y)
        rd = [c - z - g for c, z, g in zip(cs, zs, aty)]
        pobj = _inner(cs, xs)
        dobj = float(b @ y)
        mu_tot = _inner(xs, zs)
        pinf = float(np.linalg.norm(rp)) / (1 + nb)
        dinf = _norm(rd) / (1 + nc)
        relgap = abs(pobj - dobj) / (1 + abs(pobj) + abs(dobj))
        compl = mu_tot / (1 + abs(pobj) + abs(dobj))
        history.append((sign * pobj, sign * dobj, pinf, dinf))
        merit = max(pinf, dinf, relgap, compl)
        if merit < best[0]:
            best = (merit, [x.copy() for x in xs], y.copy(), [z.copy() for z in zs], (pinf, dinf, relgap))
        if merit <= tol:
            status = OPTIMAL
            break
        if merit <= progress[0] / 2:
            progress = (merit, it)
        elif it - progress[1] >= STALL_ITERS:
            log.debug("no progress since iteration %d", progress[1])
            break
        # Farkas rays from diverging iterates
        if dobj > 1e3 and _norm([c - r for c, r in zip(cs, rd)]) / dobj < tol and pinf > tol:
            status, certificate, margin = INFEASIBLE, y / dobj, 1.0 / max(1.0, _norm(aty) / dobj)
            break
        if pobj < -1e3 and float(np.linalg.norm(b - rp)) / -pobj < tol and dinf > tol:
            status, margin = INFEASIBLE, math.nan
            certificate = None
            break
        if it == max_iter:
            break

        lxs = [_chol(x) for x in xs]
        lzs = [_chol(z) for z in zs]
        if any(l is None for l in lxs + lzs):
            log.debug("iterate lost definiteness at iteration %d", it)
            break
        zinvs = [sla.cho_solve((l, True), np.eye(l.shape[0])) for l in lzs]
        schur = None  # release the previous factor before assembling the next
        schur = _Schur(op.m, lambda: op.schur(xs, zinvs))
        if not schur.ok:
            log.debug("Schur complement lost definiteness at iteration %d", it)
            break
        xrdz = op.forward([_sym(x @ r @ zi) for x, r, zi in zip(xs, rd, zinvs)])

        def direction(rc_zinv):
            rhs = rp - op.forward([_sym(t) for t in rc_zinv]) + xrdz
            dy = schur.solve(rhs)
            dz = [r - g for r, g in zip(rd, op.adjoint(dy))]
            dx = [_sym(t - x @ d @ zi) for t, x, d, zi in zip(rc_zinv, xs, dz, zinvs)]
            return dx, dy, dz

        def steps(dx, dz, gamma):
            ap = min([1.0] + [gamma * _max_step(x, d, l) for x, d, l in zip(xs, dx, lxs)])
            ad = min([1.0] + [gamma * _max_step(z, d, l) for z, d, l in zip(zs, dz, lzs)])
            return ap, ad

        mu = mu_tot / n_tot
        dx, dy, dz = direction([-x for x in xs])
        ap, ad = steps(dx, dz, 1.0)
        mu_aff = _inner([x + ap * d for x, d in zip(xs, dx)], [z + ad * d for z, d in zip(zs, dz)]) / n_tot
        sigma = min(1.0, max(0.0, mu_aff / mu) ** 3)
        rc = [
            sigma * mu * zi - x - dxa @ dza @ zi
            for zi, x, dxa, dza in zip(zinvs, xs, dx, dz)
        ]
        dx, dy, dz = direction(rc)
        gamma = 0.9 + 0.09 * min(ap, ad)
        ap, ad = steps(dx, dz, gamma)
        if ap < 1e-12 and ad < 1e-12:
            log.debug("step length collapsed at iteration %d", it)
            break
        xs = [x + ap * d for x, d in zip(xs, dx)]
        zs = [z + ad * d for z, d in zip(zs, dz)]
        y = y + ad * dy

    if status == NUMERICAL_FAILURE and best[0] < math.inf:
        _, xs, y, zs, (pinf, dinf, relgap) = best
    y_full = np.zeros(problem.b.size)
    y_full[keep] = sign * y
    if certificate is not None:
        cert = np.zeros(problem.b.size)
        cert[keep] = certificate
        certificate = cert
    return SdpSolution(
        status=status,
        primal_value=sign * _inner(cs, xs),
        dual_value=sign * float(b @ y),
        x=_finish_blocks(problem, xs),
        y=y_full,
        z=_finish_blocks(problem, [sign * z for z in zs]),
        iterations=it,
        primal_infeasibility=pinf,
        dual_infeasibility=dinf,
        relative_gap=relgap,
        margin=margin,
        certificate=certificate,
        history=history,
    )


def _linear_infeasible(problem: SdpProblem) -> SdpSolution:
    """Certificate for ``A(X) = b`` having no solution at all."""
    w = _least_norm(problem.a, problem.b)
    r = problem.b - problem.a @ w
    nr = float(np.linalg.norm(r))
    return SdpSolution(
        status=INFEASIBLE,
        primal_value=math.nan,
        dual_value=math.nan,
        x=[],
        y=np.zeros(problem.b.size),
        z=[],
        iterations=0,
        primal_infeasibility=nr,
        margin=nr,
        certificate=r / nr if nr else r,
    )


def _least_norm(a: sparse.csr_matrix, b: np.ndarray) -> np.ndarray:
    if a.shape[0] * a.shape[1] <= 4_000_000:
        return np.linalg.lstsq(a.toarray(), b, rcond=None)[0]
    return spla.lsqr(a, b, atol=1e-15, btol=1e-15, iter_lim=100_000)[0]


def feasibility(problem: SdpProblem, tol: float = 1e-9, max_iter: int = 200) -> SdpSolution:
    """Decide whether ``{X >= 0 : A(X) = b}`` is non-empty.

    Solves the auxiliary problem ``max t  s.t.  A(W) = b,  W - t I >= 0``
    (with ``t`` capped at 1). Its dual bound ``t_ub`` is certified by the
    returned multipliers: ``t_ub < 0`` proves infeasibility and
    ``margin = -t_ub``. Otherwise the returned status is ``optimal`` and
    ``x`` holds a point ``W`` (PSD up to the solver tolerance) with
    ``margin = t``, its smallest-eigenvalue slack.

    The objective of ``problem`` is ignored.
    """
    keep, consistent = _prune(problem.a, problem.b)
    if not consistent:
        return _linear_infeasible(problem)
    a = problem.a[keep]
    b = problem.b[keep]
    w0 = _least_norm(a, b)
    res = float(np.linalg.norm(a @ w0 - b))
    if res > 1e-8 * (1 + float(np.linalg.norm(b))):
        return _linear_infeasible(problem)
    off = problem.offsets
    lam = min(
        float(np.linalg.eigvalsh(_sym(w0[off[k]:off[k + 1]].reshape(n, n)))[0])
        for k, n in enumerate(problem.blocks)
    )
    t0 = min(lam, 0.0) - 1.0
    ident = np.concatenate([np.eye(n).ravel() for n in problem.blocks])
    a_ident = a @ ident
    n_orig = a.shape[1]
    # extra 1x1 blocks: s (t = s + t0) and its cap slack s'
    cols = sparse.hstack([a, sparse.csr_matrix(a_ident[:, None]), sparse.csr_matrix((a.shape[0], 1))])
    cap = sparse.csr_matrix(([1.0, 1.0], ([0, 0], [n_orig, n_orig + 1])), shape=(1, n_orig + 2))
    big_a = sparse.vstack([cols, cap]).tocsr()
    big_b = np.concatenate([b - t0 * a_ident, [1.0 - t0]])
    blocks = problem.blocks + (1, 1)
    cs = tuple(np.zeros((n, n)) for n in problem.blocks) + (np.ones((1, 1)), np.zeros((1, 1)))
    phase1 = SdpProblem(blocks, cs, big_a, big_b, "max", problem.hermitian + (False, False))
    sol = solve(phase1, tol=tol, max_iter=max_iter)
    t_lb = sol.primal_value + t0
    t_ub = sol.dual_value + t0
    y = np.zeros(problem.b.size)
    y[keep] = sol.y[:-1]
    if sol.status == OPTIMAL and t_ub < 0:
        return SdpSolution(
            status=INFEASIBLE,
            primal_value=t_lb,
            dual_value=t_ub,
            x=[],
            y=y,
            z=[],
            iterations=sol.iterations,
            primal_infeasibility=sol.primal_infeasibility,
            dual_infeasibility=sol.dual_infeasibility,
            relative_gap=sol.relative_gap,
            margin=-t_ub,
            certificate=y,
            history=sol.history,
        )
    t = sol.x[-2][0, 0] + t0 if sol.x else math.nan
    xs = [x + t * np.eye(x.shape[0]) for x in sol.x[:-2]]
    status = OPTIMAL if sol.status == OPTIMAL else sol.status
    return SdpSolution(
        status=status,
        primal_value=0.0,
        dual_value=0.0,
        x=xs,
        y=y,
        z=sol.z[:-2],
        iterations=sol.iterations,
        primal_infeasibility=sol.primal_infeasibility,
        dual_infeasibility=sol.dual_infeasibility,
        relative_gap=sol.relative_gap,
        margin=t,
        history=sol.history,
    )


def write_sdpa(problem: SdpProblem, path) -> None:
    """Export in SDPA sparse format (``.dat-s``).

    SDPA solves ``max <F0, Y>  s.t.  <F_i, Y> = c_i,  Y >= 0`` as its dual,
    so the file carries ``F0 = -C`` (``+C`` for maximisation), ``F_i = A_i``
    and ``c = b``. Hermitian blocks appear in their real embedding.
    """
    sign = -1.0 if problem.sense == "min" else 1.0
    off = problem.offsets
    lines = [
        f"{problem.n_constraints} = mDIM",
        f"{len(problem.blocks)} = nBLOCK",
        " ".join(str(n) for n in problem.blocks),
        " ".join(repr(float(v)) for v in problem.b),
    ]

    def emit(mat_idx: int, k: int, dense: np.ndarray):
        rr, cc = np.nonzero(np.triu(dense))
        for r, c in zip(rr, cc):
            lines.append(f"{mat_idx} {k + 1} {r + 1} {c + 1} {float(dense[r, c])!r}")

    for k, ck in enumerate(problem.c):
        emit(0, k, sign * ck)
    for i in range(problem.n_constraints):
        row = problem.a[i]
        for k, n in enumerate(problem.blocks):
            sub = row[:, off[k]:off[k + 1]]
            if sub.nnz:
                emit(i + 1, k, sub.toarray().reshape(n, n))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
