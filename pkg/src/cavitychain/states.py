"""Single-mode states, characteristic functions and covariance matrices.

Conventions: the Weyl operator of a label ``theta`` is
``exp(i (conj(theta) a + theta a*) / sqrt(2))``, so a Gibbs state of
inverse temperature ``beta`` has characteristic function
``exp(-|theta|^2 coth(beta/2) / 4)``.  A covariance matrix ``X`` on
several modes gives ``exp(-<zeta, X zeta> / 4)`` and maps to second
moments through ``<b_j* b_k> = (X_kj - delta_jk) / 2``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import LengthMismatch, NonConvergent
from .model import ModelParams, beta_from_coth, coth_half, propagator_blocks
from .propagator import propagate, propagation_matrix, component_formula_pair

__all__ = [
    "ModeState",
    "CovarianceMatrix",
    "split_time",
    "weyl_dual_step",
    "weyl_dual_multi",
    "char_fn_product",
    "cavity_char_fn",
    "cavity_vector",
    "cavity_occupation",
    "d_functional",
    "steady_state",
    "steady_state_char_fn",
    "gaussian_covariance",
    "covariance",
    "pair_covariance",
    "asymptotic_periodicity_gap",
]

SQRT2 = math.sqrt(2.0)


@dataclass(frozen=True)
class ModeState:
    """A one-mode state known through its characteristic function.

    Gaussian variants (``gibbs``, ``vacuum``, ``displaced_gibbs``) are
    stored by ``coth`` and ``mean = <a>``; custom variants wrap a callable
    that takes ``|theta|`` (radial) or ``theta`` itself.
    """

    kind: str
    coth: float = 1.0
    mean: complex = 0j
    func: Callable | None = field(default=None, compare=False)
    radial: bool = True

    @classmethod
    def gibbs(cls, beta: float) -> "ModeState":
        return cls("gibbs", coth=coth_half(beta))

    @classmethod
    def vacuum(cls) -> "ModeState":
        return cls("vacuum", coth=1.0)

    @classmethod
    def displaced_gibbs(cls, beta: float, mean: complex) -> "ModeState":
        return cls("displaced_gibbs", coth=coth_half(beta), mean=complex(mean))

    @classmethod
    def from_coth(cls, coth: float, mean: complex = 0j) -> "ModeState":
        if coth < 1.0 - 1e-12:
            raise ValueError(f"coth {coth} below 1 is not a state")
        if mean:
            return cls("displaced_gibbs", coth=float(coth), mean=complex(mean))
        return cls("gibbs", coth=float(coth))

    @classmethod
    def custom_radial(cls, func: Callable) -> "ModeState":
        """State whose characteristic function depends on ``|theta|`` only."""
        return cls("custom", func=func, radial=True)

    @classmethod
    def custom(cls, func: Callable) -> "ModeState":
        """State with an arbitrary (vectorised) characteristic function of ``theta``."""
        return cls("custom", func=func, radial=False)

    @property
    def is_gaussian(self) -> bool:
        return self.kind != "custom"

    @property
    def gauge_invariant(self) -> bool:
        if self.kind == "custom":
            return self.radial
        return self.mean == 0

    @property
    def beta(self) -> float:
        if not self.is_gaussian:
            raise AttributeError("custom states carry no temperature")
        return beta_from_coth(self.coth)

    def char_fn(self, theta):
        theta = np.asarray(theta, dtype=complex)
        if self.kind == "custom":
            arg = np.abs(theta) if self.radial else theta
            return np.asarray(self.func(arg), dtype=complex)
        val = np.exp(-0.25 * self.coth * np.abs(theta) ** 2)
        if self.mean:
            val = val * np.exp(1j * SQRT2 * np.real(np.conj(theta) * self.mean))
        return val.astype(complex)

    __call__ = char_fn

    def rotate(self, phi: float) -> "ModeState":
        """State with characteristic function ``theta -> E(exp(i phi) theta)``.

        This is the free evolution ``exp(-i phi a*a) rho exp(i phi a*a)``;
        the mean moves to ``exp(-i phi) <a>``.
        """
        if self.kind == "custom":
            if self.radial:
                return self
            f = self.func
            return ModeState.custom(lambda th, f=f, ph=np.exp(1j * phi): f(ph * th))
        if not self.mean:
            return self
        return ModeState(self.kind, coth=self.coth, mean=self.mean * np.exp(-1j * phi))


@dataclass(frozen=True)
class CovarianceMatrix:
    X: np.ndarray
    mean: np.ndarray | None = None

    def char_fn(self, zeta) -> complex:
        z = np.asarray(zeta, dtype=complex)
        quad = np.real(np.vdot(z, self.X @ z))
        val = np.exp(-0.25 * quad)
        if self.mean is not None:
            val = val * np.exp(1j * SQRT2 * np.real(np.vdot(z, self.mean)))
        return complex(val)

    def moments(self) -> np.ndarray:
        """Matrix of ``<b_j* b_k>``."""
        n = self.X.shape[0]
        out = 0.5 * (self.X.T - np.eye(n))
        if self.mean is not None:
            out = out + np.outer(np.conj(self.mean), self.mean)
        return out

    def block(self, idx: Sequence[int]) -> np.ndarray:
        idx = list(idx)
        return self.X[np.ix_(idx, idx)]


def split_time(t: float, tau: float) -> tuple[int, float]:
    """Return ``(n, nu)`` with ``t = (n - 1) tau + nu`` and ``0 <= nu < tau``.

    A time within 1e-12 (relative) of a multiple ``k tau`` is treated as
    that boundary, i.e. ``n = k + 1`` and ``nu = 0``.
    """
    if t < 0:
        raise ValueError("time must be nonnegative")
    x = t / tau
    k = round(x)
    if abs(x - k) <= 1e-12 * max(1.0, x):
        return k + 1, 0.0
    k = math.floor(x)
    return k + 1, t - k * tau


def _damping(params: ModelParams, norm_before, norm_after):
    return np.exp(-0.25 * params.reservoir_coth * (norm_before - norm_after))


def weyl_dual_step(zeta, n: int, s: float, params: ModelParams):
    """One dual step of duration ``s``: returns ``(damping, U_n(s) zeta)``."""
    z = np.asarray(zeta, dtype=complex)
    out = propagate(z, [n], params, [s])
    d = _damping(params, np.vdot(z, z).real, np.vdot(out, out).real)
    return float(d), out


def weyl_dual_multi(zeta, k: int, params: ModelParams, per_step: bool = False):
    """Dual evolution through steps ``1..k``; ``per_step`` multiplies single-step dampings."""
    z = np.asarray(zeta, dtype=complex)
    if not per_step:
        out = propagate(z, range(1, k + 1), params)
        return float(_damping(params, np.vdot(z, z).real, np.vdot(out, out).real)), out
    total = 1.0
    out = z
    for ell in range(k, 0, -1):
        d, out = weyl_dual_step(out, ell, params.tau, params)
        total *= d
    return total, out


def char_fn_product(states: Sequence[ModeState], zeta) -> complex:
    z = np.asarray(zeta, dtype=complex)
    if len(states) != z.shape[0]:
        raise LengthMismatch(f"{len(states)} states for a label of length {z.shape[0]}")
    val = 1.0 + 0j
    for st, zj in zip(states, z):
        val *= complex(st.char_fn(zj))
    return val


def cavity_vector(t: float, params: ModelParams) -> np.ndarray:
    """Propagated cavity unit vector ``U_1 ... U_{n-1} U_n(nu) e`` for time ``t``."""
    n, nu = split_time(t, params.tau)
    steps = list(range(1, n + 1))
    durations = [params.tau] * (n - 1) + [nu]
    e = np.zeros(n + 1, dtype=complex)
    e[0] = 1.0
    return propagate(e, steps, params, durations)


def cavity_char_fn(t: float, rho0: ModeState, rho1: ModeState, params: ModelParams, theta):
    """Characteristic function of the cavity's reduced state at time ``t``.

    Every chain mode starts in ``rho1``; ``theta`` may be an array.
    """
    theta = np.asarray(theta, dtype=complex)
    u = cavity_vector(t, params)
    loss = 1.0 - np.vdot(u, u).real
    val = _damping(params, np.abs(theta) ** 2 * loss, 0.0) * rho0.char_fn(u[0] * theta)
    for uj in u[1:]:
        if uj != 0:
            val = val * rho1.char_fn(uj * theta)
    return val


def cavity_occupation(t: float, rho0: ModeState, rho1: ModeState, params: ModelParams) -> float:
    """Mean cavity occupation ``<a* a>`` at time ``t`` for Gaussian inputs."""
    if not (rho0.is_gaussian and rho1.is_gaussian):
        raise ValueError("occupation needs Gaussian input states")
    u = cavity_vector(t, params)
    a2 = np.abs(u) ** 2
    x00 = params.reservoir_coth * (1.0 - a2.sum()) + rho0.coth * a2[0] + rho1.coth * a2[1:].sum()
    mean = np.conj(u[0]) * rho0.mean + np.conj(u[1:]).sum() * rho1.mean
    return float(0.5 * (x00 - 1.0) + abs(mean) ** 2)


def d_functional(rho1: ModeState, params: ModelParams, theta, tol: float = 1e-12,
                 method: str = "auto", max_terms: int = 100_000):
    """Infinite product ``prod_{s>=0} E_rho1((gz)^s theta)``.

    ``method="auto"`` uses the closed form for Gaussian ``rho1`` and the
    truncated product otherwise; ``method="product"`` forces truncation.
    Truncation stops once every factor is within ``tol (1 - |gz|)`` of 1,
    which bounds the geometric tail by ``tol``.  For states that are not
    gauge-invariant the factor at the label rotated by a quarter turn is
    checked too, since an oscillating phase can bring a single factor
    close to 1 while the tail is still large.
    """
    theta = np.asarray(theta, dtype=complex)
    q = propagator_blocks(params, params.tau).gz
    aq = abs(q)
    if aq >= 1.0:
        raise NonConvergent(f"|gz| = {aq} >= 1")
    if method == "auto" and rho1.is_gaussian:
        val = np.exp(-0.25 * rho1.coth * np.abs(theta) ** 2 / (1.0 - aq ** 2))
        if rho1.mean:
            lin = np.real(np.conj(theta) * rho1.mean / (1.0 - np.conj(q)))
            val = val * np.exp(1j * SQRT2 * lin)
        return val.astype(complex)
    if method not in ("auto", "product"):
        raise ValueError(f"unknown method {method!r}")
    prod = np.ones_like(theta)
    arg = theta.copy()
    thresh = tol * (1.0 - aq)
    for _ in range(max_terms):
        f = rho1.char_fn(arg)
        prod = prod * f
        if np.all(np.abs(f - 1.0) < thresh):
            if rho1.gauge_invariant or np.all(np.abs(rho1.char_fn(1j * arg) - 1.0) < thresh):
                return prod
        arg = arg * q
    raise NonConvergent(f"product not settled after {max_terms} factors")


def steady_state_char_fn(rho1: ModeState, params: ModelParams, theta, tol: float = 1e-12):
    """Pointwise limit of the cavity characteristic function at ``t = N tau``.

    Only defined for gauge-invariant chain states; for other chain states
    the limit exists after undoing the free rotation, see
    :func:`cavitychain.window.fixed_point`.
    """
    if not rho1.gauge_invariant:
        raise ValueError("chain state is not gauge-invariant; use window.fixed_point")
    theta = np.asarray(theta, dtype=complex)
    b = propagator_blocks(params, params.tau)
    lam = abs(b.gw) ** 2 / (1.0 - abs(b.gz) ** 2)
    pref = np.exp(-0.25 * np.abs(theta) ** 2 * params.reservoir_coth * (1.0 - lam))
    return pref * d_functional(rho1, params, b.gw * theta, tol=tol)


def steady_state(rho1: ModeState, params: ModelParams) -> ModeState:
    """Cavity fixed point as a :class:`ModeState`.

    Gaussian ``rho1`` gives a Gaussian fixed point with
    ``coth = (1 - lam) r + lam coth(beta/2)`` and mean
    ``<a> conj(gw / (1 - gz))``.  Otherwise the characteristic function is
    wrapped and evaluated through the truncated product.
    """
    b = propagator_blocks(params, params.tau)
    q, p = b.gz, b.gw
    lam = abs(p) ** 2 / (1.0 - abs(q) ** 2)
    if rho1.is_gaussian:
        c = (1.0 - lam) * params.reservoir_coth + lam * rho1.coth
        return ModeState.from_coth(c, rho1.mean * np.conj(p / (1.0 - q)))
    r = params.reservoir_coth

    def fn(theta, rho1=rho1, params=params, p=p, lam=lam, r=r):
        theta = np.asarray(theta, dtype=complex)
        pref = np.exp(-0.25 * np.abs(theta) ** 2 * r * (1.0 - lam))
        return pref * d_functional(rho1, params, p * theta, method="product")

    if rho1.gauge_invariant:
        return ModeState.custom_radial(lambda x, fn=fn: fn(np.asarray(x, dtype=complex)))
    return ModeState.custom(fn)


def gaussian_covariance(states: Sequence[ModeState], steps: Sequence[int], params: ModelParams,
                        durations: Sequence[float] | None = None) -> CovarianceMatrix:
    """Covariance of a Gaussian product state after the given dual steps.

    ``X = r I + M* diag(c_j - r) M`` and ``mean = M* mu`` with
    ``M = U_{s1} ... U_{sm}`` assembled column by column.
    """
    if not all(s.is_gaussian for s in states):
        raise ValueError("covariance requires Gaussian input states")
    n = len(states)
    M = propagation_matrix(steps, n - 1, params, durations)
    r = params.reservoir_coth
    c = np.array([s.coth for s in states]) - r
    X = r * np.eye(n) + (M.conj().T * c) @ M
    X = 0.5 * (X + X.conj().T)
    mu = np.array([s.mean for s in states], dtype=complex)
    mean = M.conj().T @ mu if np.any(mu) else None
    return CovarianceMatrix(X, mean)


def covariance(N: int, beta0: float, beta: float, params: ModelParams,
               n_chain: int | None = None) -> CovarianceMatrix:
    """Covariance ``X(N tau)`` for a Gibbs cavity (``beta0``) and Gibbs chain (``beta``)."""
    L = N if n_chain is None else n_chain
    if L < N:
        raise ValueError("chain shorter than the number of steps")
    states = [ModeState.gibbs(beta0)] + [ModeState.gibbs(beta)] * L
    return gaussian_covariance(states, range(1, N + 1), params)


def pair_covariance(kind: str, indices, N: int, beta0: float, beta: float,
                    params: ModelParams) -> np.ndarray:
    """2x2 block of ``X(N tau)`` on modes ``(0, n)`` or ``(m, n)`` from the closed forms."""
    va = component_formula_pair(kind, indices, N, params, (1.0, 0.0))
    vb = component_formula_pair(kind, indices, N, params, (0.0, 1.0))
    V = np.stack([va, vb], axis=1)
    r = params.reservoir_coth
    d = np.full(N + 1, coth_half(beta) - r)
    d[0] = coth_half(beta0) - r
    B = r * np.eye(2) + (V.conj().T * d) @ V
    return 0.5 * (B + B.conj().T)


def asymptotic_periodicity_gap(t: float, rho1: ModeState, params: ModelParams, theta,
                               rho0: ModeState | None = None) -> float:
    """``|E_t(theta) - E_{rho*(nu)}(theta)|`` for ``t = (n - 1) tau + nu``.

    ``E_t`` starts from ``rho0`` (vacuum by default); ``rho*(nu)`` is the
    steady state advanced by the partial step ``nu`` against a fresh chain
    mode.
    """
    rho0 = ModeState.vacuum() if rho0 is None else rho0
    _, nu = split_time(t, params.tau)
    star = steady_state(rho1, params)
    a = cavity_char_fn(t, rho0, rho1, params, theta)
    b = cavity_char_fn(nu, star, rho1, params, theta)
    return float(np.max(np.abs(a - b)))
