"""Finite matrices of the repeated-interaction model and Weyl-label propagation.

Index 0 is the cavity, indices ``1..N`` are chain modes.  During step
``n`` the generator only mixes rows ``0`` and ``n``, so propagation never
materialises a matrix product: each step touches two entries and the
common ``exp(i s epsilon)`` phase is applied once at the end.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.linalg import expm

from .errors import BadKind, IndexOutOfRange
from .model import ModelParams, propagator_blocks

__all__ = [
    "HamiltonianMatrix",
    "StepMatrix",
    "build_Y",
    "build_U_exact",
    "build_U_closed",
    "propagate",
    "propagation_matrix",
    "component_formula_e",
    "component_formula_pair",
]


def _check_step(n: int, N: int) -> None:
    if N < 1:
        raise IndexOutOfRange(f"chain size must be >= 1, got {N}")
    if not 1 <= n <= N:
        raise IndexOutOfRange(f"step index {n} outside 1..{N}")


@dataclass(frozen=True)
class HamiltonianMatrix:
    Y: np.ndarray
    J: np.ndarray
    X: np.ndarray
    P0: np.ndarray
    n: int


def build_Y(n: int, N: int, params: ModelParams) -> HamiltonianMatrix:
    """One-particle Hamiltonian ``Y_n`` of step ``n`` on ``N + 1`` modes."""
    _check_step(n, N)
    E, eps, eta = params.E, params.epsilon, params.eta
    J = np.zeros((N + 1, N + 1))
    J[0, 0] = J[n, n] = 1.0
    X = np.zeros((N + 1, N + 1))
    X[0, 0] = 0.5 * (E - eps)
    X[n, n] = -0.5 * (E - eps)
    X[0, n] = X[n, 0] = eta
    P0 = np.zeros((N + 1, N + 1))
    P0[0, 0] = 1.0
    Y = eps * np.eye(N + 1) + 0.5 * (E - eps) * J + X
    return HamiltonianMatrix(Y=Y, J=J, X=X, P0=P0, n=n)


@dataclass(frozen=True)
class StepMatrix:
    matrix: np.ndarray
    step: int
    mode: str  # "exact-exponential" | "closed-form"


def build_U_exact(n: int, N: int, params: ModelParams, s: float) -> StepMatrix:
    """``exp(i s (Y_n + i gamma/2 P0))`` by dense scaling-and-squaring."""
    h = build_Y(n, N, params)
    gen = h.Y + 0.5j * params.gamma * h.P0
    return StepMatrix(expm(1j * s * gen), n, "exact-exponential")


def build_U_closed(ell: int, k: int, params: ModelParams, s: float | None = None) -> StepMatrix:
    """Step matrix of step ``ell`` on ``k + 1`` modes from the scalar blocks."""
    _check_step(ell, k)
    s = params.tau if s is None else s
    b = propagator_blocks(params, s)
    phase = np.exp(1j * s * params.epsilon)
    U = phase * np.eye(k + 1, dtype=complex)
    U[0, 0] = phase * b.gz
    U[0, ell] = phase * b.gw
    U[ell, 0] = phase * b.gw
    U[ell, ell] = phase * b.gz_minus
    return StepMatrix(U, ell, "closed-form")


def propagate(zeta, steps: Sequence[int], params: ModelParams,
              durations: Sequence[float] | None = None) -> np.ndarray:
    """Return ``U_{s1} U_{s2} ... U_{sm} zeta``.

    The rightmost factor acts first, so ``steps=(1, ..., m)`` applies step
    ``m`` to ``zeta`` before step ``m - 1``.  ``zeta`` may carry extra
    trailing axes (e.g. one column per label).  ``durations`` overrides the
    default ``tau`` per step, which is how partial steps are expressed.
    """
    v = np.array(zeta, dtype=complex, copy=True)
    N = v.shape[0] - 1
    steps = list(steps)
    if durations is None:
        durations = [params.tau] * len(steps)
    elif len(durations) != len(steps):
        raise ValueError("durations and steps differ in length")
    total = 0.0
    for ell, s in zip(reversed(steps), reversed(list(durations))):
        _check_step(ell, N)
        b = propagator_blocks(params, s)
        v0, vl = v[0].copy(), v[ell]
        v[0] = b.gz * v0 + b.gw * vl
        v[ell] = b.gw * v0 + b.gz_minus * vl
        total += s
    if total:
        v *= np.exp(1j * total * params.epsilon)
    return v


def propagation_matrix(steps: Sequence[int], N: int, params: ModelParams,
                       durations: Sequence[float] | None = None) -> np.ndarray:
    """Dense ``U_{s1} ... U_{sm}`` obtained by propagating the identity columns."""
    return propagate(np.eye(N + 1, dtype=complex), steps, params, durations)


def component_formula_e(m: int, N: int, params: ModelParams) -> np.ndarray:
    """Closed form of ``U_1 ... U_m e`` with ``e`` the cavity unit vector."""
    _check_step(m, N)
    b = propagator_blocks(params, params.tau)
    q = b.gz
    out = np.zeros(N + 1, dtype=complex)
    out[0] = q ** m
    k = np.arange(1, m + 1)
    out[1:m + 1] = b.gw * q ** (m - k)
    return np.exp(1j * m * params.tau * params.epsilon) * out


def component_formula_pair(kind: str, indices, N: int, params: ModelParams, amplitudes) -> np.ndarray:
    """Closed form of ``U_1 ... U_N zeta`` for a label supported on two modes.

    ``kind="cavity-chain"`` takes ``indices=(n,)`` and amplitudes
    ``(alpha0, alpha1)`` on modes ``(0, n)``; ``kind="chain-chain"`` takes
    ``indices=(m, n)`` with ``m < n`` and amplitudes on modes ``(m, n)``.
    """
    b = propagator_blocks(params, params.tau)
    q, p, zm = b.gz, b.gw, b.gz_minus
    a1, a2 = amplitudes
    out = np.zeros(N + 1, dtype=complex)
    if kind == "cavity-chain":
        (n,) = tuple(indices)
        _check_step(n, N)
        out[0] = q ** N * a1 + q ** (n - 1) * p * a2
        for k in range(1, n):
            out[k] = q ** (N - k) * p * a1 + q ** (n - k - 1) * p ** 2 * a2
        out[n] = q ** (N - n) * p * a1 + zm * a2
        for k in range(n + 1, N + 1):
            out[k] = q ** (N - k) * p * a1
    elif kind == "chain-chain":
        m, n = tuple(indices)
        _check_step(n, N)
        if not 1 <= m < n:
            raise IndexOutOfRange(f"need 1 <= m < n, got m={m}, n={n}")
        tail = a1 + q ** (n - m) * a2
        out[0] = q ** (m - 1) * p * tail
        for k in range(1, m):
            out[k] = q ** (m - k - 1) * p ** 2 * tail
        out[m] = zm * a1 + p ** 2 * q ** (n - m - 1) * a2
        for k in range(m + 1, n):
            out[k] = q ** (n - k - 1) * p ** 2 * a2
        out[n] = zm * a2
    else:
        raise BadKind(f"unknown kind {kind!r}")
    return np.exp(1j * N * params.tau * params.epsilon) * out
