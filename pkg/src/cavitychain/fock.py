"""Brute-force validator: truncated Fock space and the full master equation.

Every mode keeps the Fock levels ``0..d-1``.  The generator of step ``n``
is ``-i[H_n, rho] + sigma_minus D[b0] + sigma_plus D[b0*]`` with
``H_n = sum_jk (Y_n)_jk b_j* b_k``, integrated by classical fixed-step RK4.

Both the Hamiltonian and the jump terms preserve the difference between
the total quanta of ket and bra.  :func:`integrate` therefore assembles a
sparse superoperator on just the sectors occupied by the initial state;
:func:`lindblad_rhs` is the literal dense form kept as its reference.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from functools import reduce
from typing import Sequence

import numpy as np
import scipy.sparse as sp
from scipy.linalg import expm

from .errors import BadKind, BudgetExceeded, IndexOutOfRange, StepTooLarge
from .model import ModelParams
from .propagator import build_Y
from .states import ModeState, covariance

__all__ = [
    "TruncationSpec",
    "Ladder",
    "DensityOperator",
    "OracleReport",
    "build_ladder",
    "build_H",
    "lindblad_rhs",
    "build_superoperator",
    "integrate",
    "moments",
    "char_fn_truncated",
    "mode_density",
    "product_state",
    "gibbs_occupation_truncated",
    "oracle_check",
    "min_oracle_beta",
]

DEFAULT_BUDGET = 32768


@dataclass(frozen=True)
class TruncationSpec:
    n_modes: int
    d: int
    budget: int = DEFAULT_BUDGET

    @property
    def dim(self) -> int:
        return self.d ** self.n_modes

    def validate(self) -> "TruncationSpec":
        if self.d < 2 or self.n_modes < 1:
            raise ValueError("need d >= 2 and at least one mode")
        if self.dim > self.budget:
            raise BudgetExceeded(f"dimension {self.dim} exceeds budget {self.budget}")
        return self


@dataclass(frozen=True)
class Ladder:
    a: np.ndarray  # single-mode annihilator, d x d
    b: list
    bdag: list
    number: np.ndarray  # total quanta of every basis state


def build_ladder(spec: TruncationSpec) -> Ladder:
    """Sparse ``b_k`` and ``b_k*`` on the truncated product space (mode 0 is the leading factor)."""
    spec.validate()
    d, K = spec.d, spec.n_modes
    a = np.diag(np.sqrt(np.arange(1, d, dtype=float)), 1)
    a_sp = sp.csr_matrix(a)
    eye = sp.identity(d, format="csr")
    b = []
    for k in range(K):
        ops = [eye] * K
        ops[k] = a_sp
        b.append(reduce(lambda x, y: sp.kron(x, y, format="csr"), ops).astype(complex))
    bdag = [op.conj().T.tocsr() for op in b]
    occ = np.indices((d,) * K).reshape(K, -1)
    return Ladder(a=a, b=b, bdag=bdag, number=occ.sum(axis=0))


def build_H(n: int, spec: TruncationSpec, params: ModelParams, ladder: Ladder | None = None):
    """Sparse Hermitian ``H_n`` built from the one-particle matrix ``Y_n``."""
    M = spec.n_modes - 1
    if not 1 <= n <= M:
        raise IndexOutOfRange(f"step {n} outside 1..{M}")
    lad = build_ladder(spec) if ladder is None else ladder
    Y = build_Y(n, M, params).Y
    H = sp.csr_matrix((spec.dim, spec.dim), dtype=complex)
    for j in range(M + 1):
        for k in range(M + 1):
            if Y[j, k] != 0:
                H = H + Y[j, k] * (lad.bdag[j] @ lad.b[k])
    return H.tocsr()


def _dissipator_ops(lad: Ladder, params: ModelParams):
    b0, b0d = lad.b[0], lad.bdag[0]
    # built from the truncated products so that the trace is preserved exactly
    Q = params.sigma_minus * (b0d @ b0) + params.sigma_plus * (b0 @ b0d)
    return b0, b0d, Q.tocsr()


def lindblad_rhs(rho: np.ndarray, n: int, spec: TruncationSpec, params: ModelParams,
                 ladder: Ladder | None = None) -> np.ndarray:
    """Dense generator of step ``n`` applied to ``rho``."""
    lad = build_ladder(spec) if ladder is None else ladder
    H = build_H(n, spec, params, lad).toarray()
    b0, b0d, Q = (op.toarray() for op in _dissipator_ops(lad, params))
    out = -1j * (H @ rho - rho @ H)
    out += params.sigma_minus * b0 @ rho @ b0d + params.sigma_plus * b0d @ rho @ b0
    out -= 0.5 * (Q @ rho + rho @ Q)
    return out


class _Sectors:
    """Index set of density-matrix entries in the listed ket/bra quanta differences."""

    def __init__(self, number: np.ndarray, deltas):
        self.dim = number.shape[0]
        self.deltas = tuple(sorted(set(int(x) for x in deltas)))
        diff = number[:, None] - number[None, :]
        mask = np.isin(diff, self.deltas)
        self.I, self.J = np.nonzero(mask)
        self.keys = self.I.astype(np.int64) * self.dim + self.J

    @property
    def size(self) -> int:
        return self.I.shape[0]

    def lookup(self, i, j) -> np.ndarray:
        key = i.astype(np.int64) * self.dim + j
        pos = np.searchsorted(self.keys, key)
        if np.any(pos >= self.size) or np.any(self.keys[np.minimum(pos, self.size - 1)] != key):
            raise RuntimeError("generator leaves the active sectors")
        return pos

    def pack(self, rho: np.ndarray) -> np.ndarray:
        return rho[self.I, self.J].astype(complex)

    def unpack(self, v: np.ndarray) -> np.ndarray:
        rho = np.zeros((self.dim, self.dim), dtype=complex)
        rho[self.I, self.J] = v
        return rho


def _expand(op, idx, src, val):
    """Multiply entries ``(idx -> ...)`` by the columns ``idx`` of sparse ``op``."""
    op = op.tocsc()
    cnt = np.diff(op.indptr)[idx]
    rep = np.repeat(np.arange(idx.shape[0]), cnt)
    offs = np.arange(cnt.sum()) - np.repeat(np.cumsum(cnt) - cnt, cnt)
    pos = op.indptr[idx][rep] + offs
    return op.indices[pos], rep, val[rep] * op.data[pos], src[rep]


def _sandwich(sec: _Sectors, A, B, coef: complex):
    """COO triplets of ``v -> coef * A rho B`` restricted to the sectors."""
    P = sec.size
    rows, cols = sec.I, sec.J
    src = np.arange(P)
    val = np.full(P, coef, dtype=complex)
    if A is not None:
        rows, rep, val, src = _expand(A, rows, src, val)
        cols = cols[rep]
    if B is not None:
        # (rho B)[i, j] = sum_j' rho[i, j'] B[j', j]: expand with B transposed
        cols, rep, val, src = _expand(B.T, cols, src, val)
        rows = rows[rep]
    return sec.lookup(rows, cols), src, val


def build_superoperator(n: int, spec: TruncationSpec, params: ModelParams, sectors: _Sectors,
                        ladder: Ladder | None = None) -> sp.csr_matrix:
    lad = build_ladder(spec) if ladder is None else ladder
    H = build_H(n, spec, params, lad)
    b0, b0d, Q = _dissipator_ops(lad, params)
    terms = [
        (H, None, -1j), (None, H, 1j),
        (b0, b0d, params.sigma_minus), (b0d, b0, params.sigma_plus),
        (Q, None, -0.5), (None, Q, -0.5),
    ]
    dst, src, val = [], [], []
    for A, B, c in terms:
        if c == 0:
            continue
        d_, s_, v_ = _sandwich(sectors, A, B, c)
        dst.append(d_)
        src.append(s_)
        val.append(v_)
    P = sectors.size
    L = sp.coo_matrix((np.concatenate(val), (np.concatenate(dst), np.concatenate(src))), shape=(P, P))
    return L.tocsr()


@dataclass
class DensityOperator:
    rho: np.ndarray
    spec: TruncationSpec
    time: float = 0.0
    _ladder: Ladder | None = field(default=None, repr=False)

    @property
    def ladder(self) -> Ladder:
        if self._ladder is None:
            self._ladder = build_ladder(self.spec)
        return self._ladder

    def trace(self) -> complex:
        return complex(np.trace(self.rho))

    def hermiticity_defect(self) -> float:
        return float(np.max(np.abs(self.rho - self.rho.conj().T)))

    def min_eigenvalue(self) -> float:
        h = 0.5 * (self.rho + self.rho.conj().T)
        return float(np.linalg.eigvalsh(h)[0])

    def moments(self) -> np.ndarray:
        return moments(self)["moments"]

    def char_fn(self, zeta) -> complex:
        return char_fn_truncated(self, zeta)


def _rk4(L, v, h, nsteps):
    for _ in range(nsteps):
        k1 = L @ v
        k2 = L @ (v + 0.5 * h * k1)
        k3 = L @ (v + 0.5 * h * k2)
        k4 = L @ (v + h * k3)
        v = v + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
    return v


def integrate(rho0: DensityOperator, schedule: Sequence[tuple[int, float]], params: ModelParams,
              dt: float | None = None, method: str = "sectors", trace_tol: float = 1e-8) -> DensityOperator:
    """Integrate the master equation through ``(step, duration)`` segments.

    Each segment runs ``ceil(duration / dt)`` equal RK4 steps (``dt``
    defaults to ``tau / 200``).  ``method="dense"`` applies
    :func:`lindblad_rhs` directly and is meant for small spaces.
    Raises :class:`StepTooLarge` on trace drift beyond ``trace_tol``,
    non-finite entries, or entries of modulus above 1.
    """
    spec = rho0.spec
    lad = rho0.ladder
    dt = params.tau / 200.0 if dt is None else dt
    if dt <= 0:
        raise ValueError("dt must be positive")
    t = rho0.time
    tr0 = rho0.trace()
    if method == "sectors":
        rho = rho0.rho
        present = np.abs(rho) > 0
        diff = lad.number[:, None] - lad.number[None, :]
        sec = _Sectors(lad.number, np.unique(diff[present]))
        v = sec.pack(rho)
        cache = {}
        for n, dur in schedule:
            if dur <= 0:
                continue
            if n not in cache:
                cache[n] = build_superoperator(n, spec, params, sec, lad)
            steps = max(1, math.ceil(dur / dt - 1e-9))
            v = _rk4(cache[n], v, dur / steps, steps)
            t += dur
            _check_sectors(v, tr0, sec, trace_tol)
        rho = sec.unpack(v)
    elif method == "dense":
        rho = rho0.rho.astype(complex)
        for n, dur in schedule:
            if dur <= 0:
                continue
            steps = max(1, math.ceil(dur / dt - 1e-9))
            h = dur / steps
            f = lambda r: lindblad_rhs(r, n, spec, params, lad)
            for _ in range(steps):
                k1 = f(rho)
                k2 = f(rho + 0.5 * h * k1)
                k3 = f(rho + 0.5 * h * k2)
                k4 = f(rho + h * k3)
                rho = rho + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
            t += dur
            _check_dense(rho, tr0, trace_tol)
    else:
        raise ValueError(f"unknown method {method!r}")
    return DensityOperator(rho, spec, t, lad)


def _check_dense(rho, tr0, tol):
    if not np.all(np.isfinite(rho)):
        raise StepTooLarge("non-finite density matrix")
    drift = abs(np.trace(rho) - tr0)
    if drift > tol or np.max(np.abs(rho)) > 1.0 + tol:
        raise StepTooLarge(f"trace drift {drift:.3e}; reduce dt")


def _check_sectors(v, tr0, sec, tol):
    if not np.all(np.isfinite(v)):
        raise StepTooLarge("non-finite density matrix")
    tr = v[sec.I == sec.J].sum()
    drift = abs(tr - tr0)
    if drift > tol or np.max(np.abs(v)) > 1.0 + tol:
        raise StepTooLarge(f"trace drift {drift:.3e}; reduce dt")


def moments(rho: DensityOperator) -> dict:
    """Second moments ``<b_j* b_k>`` with trace and Hermiticity diagnostics."""
    lad = rho.ladder
    K = rho.spec.n_modes
    R = rho.rho
    out = np.zeros((K, K), dtype=complex)
    for j in range(K):
        for k in range(K):
            op = lad.bdag[j] @ lad.b[k]
            out[j, k] = op.multiply(R.T).sum()
    return {
        "moments": out,
        "trace": rho.trace(),
        "hermiticity_defect": rho.hermiticity_defect(),
    }


def char_fn_truncated(rho: DensityOperator, zeta) -> complex:
    """``Tr(rho W(zeta))`` with every single-mode Weyl factor exponentiated in the cutoff space."""
    z = np.asarray(zeta, dtype=complex)
    K, d = rho.spec.n_modes, rho.spec.d
    if z.shape != (K,):
        raise ValueError(f"label must have {K} entries")
    a = rho.ladder.a
    facs = [expm(1j * (np.conj(zj) * a + zj * a.T) / math.sqrt(2.0)) for zj in z]
    T = rho.rho.reshape((d,) * (2 * K))
    letters = "abcdefghij"[:K]
    upper = "pqrstuvwxy"[:K]
    expr = letters + upper + "," + ",".join(u + l for l, u in zip(letters, upper)) + "->"
    return complex(np.einsum(expr, T, *facs, optimize=True))


def gibbs_occupation_truncated(beta: float, d: int) -> float:
    """Mean occupation of the Gibbs weights restricted to levels ``0..d-1``."""
    if math.isinf(beta):
        return 0.0
    n = np.arange(d)
    w = np.exp(-beta * n)
    return float((n * w).sum() / w.sum())


def mode_density(state: ModeState, d: int) -> np.ndarray:
    """Truncated single-mode density matrix of a Gibbs, vacuum or displaced Gibbs state."""
    if state.kind == "vacuum" or (state.kind == "gibbs" and state.coth == 1.0):
        rho = np.zeros((d, d), dtype=complex)
        rho[0, 0] = 1.0
        return rho
    if state.kind == "gibbs":
        w = np.exp(-state.beta * np.arange(d))
        return np.diag(w / w.sum()).astype(complex)
    if state.kind == "displaced_gibbs":
        big = d + 30
        a = np.diag(np.sqrt(np.arange(1, big, dtype=float)), 1)
        D = expm(state.mean * a.T - np.conj(state.mean) * a)
        th = mode_density(ModeState.from_coth(state.coth), big)
        rho = (D @ th @ D.conj().T)[:d, :d]
        return rho / np.trace(rho)
    raise BadKind(f"no truncated density for state kind {state.kind!r}")


def product_state(states: Sequence, spec: TruncationSpec) -> DensityOperator:
    """Product density operator from ModeStates or explicit ``d x d`` matrices."""
    spec.validate()
    mats = [s if isinstance(s, np.ndarray) else mode_density(s, spec.d) for s in states]
    if len(mats) != spec.n_modes:
        raise ValueError(f"{len(mats)} states for {spec.n_modes} modes")
    return DensityOperator(reduce(np.kron, mats), spec)


def min_oracle_beta(d: int, tail: float = 1e-8) -> float:
    """Smallest inverse temperature whose Gibbs tail beyond level ``d-1`` is below ``tail``."""
    return max(0.5, math.log(1.0 / tail) / d)


@dataclass(frozen=True)
class OracleReport:
    N: int
    d: int
    moment_error: float
    char_fn_error: float
    trace_drift: float
    hermiticity_defect: float
    min_eigenvalue: float
    seconds: float

    def ok(self, moment_tol: float = 1e-4, char_tol: float = 5e-4) -> bool:
        return self.moment_error <= moment_tol and self.char_fn_error <= char_tol


def oracle_check(params: ModelParams, N: int, d: int, beta0: float, beta: float,
                 zetas=None, dt: float | None = None, with_eigen: bool = True,
                 check_tail: bool = True) -> OracleReport:
    """Run the truncated master equation through ``N`` full steps from Gibbs states and
    compare second moments and characteristic functions with the covariance closed form.

    ``beta >= 0.5`` is always required; ``check_tail`` also requires the
    initial Gibbs tail beyond the cutoff to stay below 1e-8.
    """
    bmin = min_oracle_beta(d) if check_tail else 0.5
    if min(beta0, beta) < bmin - 1e-12:
        raise ValueError(f"oracle runs need beta >= {bmin:.3f} at cutoff {d}")
    t0 = time.perf_counter()
    spec = TruncationSpec(N + 1, d).validate()
    rho0 = product_state([ModeState.gibbs(beta0)] + [ModeState.gibbs(beta)] * N, spec)
    out = integrate(rho0, [(n, params.tau) for n in range(1, N + 1)], params, dt=dt)
    cov = covariance(N, beta0, beta, params)
    mom = moments(out)
    merr = float(np.max(np.abs(mom["moments"] - cov.moments())))
    if zetas is None:
        rng = np.random.default_rng(12345)
        zetas = []
        for _ in range(6):
            z = rng.normal(size=N + 1) + 1j * rng.normal(size=N + 1)
            zetas.append(z / np.linalg.norm(z) * rng.uniform(0.3, 1.5))
    cerr = max(abs(char_fn_truncated(out, z) - cov.char_fn(z)) for z in zetas)
    return OracleReport(
        N=N, d=d, moment_error=merr, char_fn_error=float(cerr),
        trace_drift=abs(out.trace() - 1.0),
        hermiticity_defect=out.hermiticity_defect(),
        min_eigenvalue=out.min_eigenvalue() if with_eigen else float("nan"),
        seconds=time.perf_counter() - t0,
    )
