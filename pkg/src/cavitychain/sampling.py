"""Random admissible parameters, states and Weyl labels for checks and sweeps."""
from __future__ import annotations

import math

import numpy as np

from .model import ModelParams
from .states import ModeState

__all__ = [
    "random_params",
    "random_mode_state",
    "random_label",
    "random_covariance",
    "fock_one_state",
    "squeezed_vacuum",
]


def random_params(rng: np.random.Generator, max_sigma_ratio: float = 0.8,
                  eta_fraction: tuple[float, float] = (0.0, 1.0)) -> ModelParams:
    """Draw an admissible parameter set.

    ``eta`` is a uniform fraction (within ``eta_fraction``) of ``sqrt(E eps)``.
    """
    E = rng.uniform(0.5, 2.0)
    eps = rng.uniform(0.5, 2.0)
    eta = rng.uniform(*eta_fraction) * math.sqrt(E * eps)
    tau = rng.uniform(0.2, 2.0)
    sm = rng.uniform(0.05, 1.0)
    sp = rng.uniform(0.0, max_sigma_ratio) * sm
    return ModelParams(E, eps, eta, tau, sm, sp).validate()


def fock_one_state() -> ModeState:
    """Single-photon state ``|1><1|``; radial, not Gaussian."""
    return ModeState.custom_radial(lambda x: (1.0 - 0.5 * x ** 2) * np.exp(-0.25 * x ** 2))


def squeezed_vacuum(s: float, phi: float = 0.0) -> ModeState:
    """Squeezed vacuum: a non-gauge-invariant pure state with zero mean."""
    c, sh, ph = math.cosh(s), math.sinh(s), np.exp(1j * phi)

    def fn(theta):
        th = np.asarray(theta, dtype=complex)
        return np.exp(-0.25 * np.abs(th * c - np.conj(th) * ph * sh) ** 2)

    return ModeState.custom(fn)


def random_mode_state(rng: np.random.Generator, kinds=("gibbs", "displaced", "fock1", "squeezed")) -> ModeState:
    kind = kinds[rng.integers(len(kinds))]
    beta = rng.uniform(0.3, 4.0)
    if kind == "gibbs":
        return ModeState.gibbs(beta)
    if kind == "vacuum":
        return ModeState.vacuum()
    if kind == "displaced":
        return ModeState.displaced_gibbs(beta, complex(*rng.normal(0.0, 0.7, 2)))
    if kind == "fock1":
        return fock_one_state()
    if kind == "squeezed":
        return squeezed_vacuum(rng.uniform(0.05, 0.6), rng.uniform(0, 2 * math.pi))
    raise ValueError(f"unknown state kind {kind!r}")


def random_label(rng: np.random.Generator, n_modes: int, radius: float = 1.5) -> np.ndarray:
    """Complex vector of ``n_modes`` entries with norm uniform in ``[0, radius]``."""
    z = rng.normal(size=n_modes) + 1j * rng.normal(size=n_modes)
    return z / np.linalg.norm(z) * radius * rng.uniform()


def random_covariance(rng: np.random.Generator, n_modes: int, with_mean: bool = True):
    """Random valid gauge-invariant covariance ``X = I + 2 A A*`` and mean."""
    A = (rng.normal(size=(n_modes, n_modes)) + 1j * rng.normal(size=(n_modes, n_modes))) * 0.4
    X = np.eye(n_modes) + 2.0 * A @ A.conj().T
    mean = (rng.normal(size=n_modes) + 1j * rng.normal(size=n_modes)) * 0.5 if with_mean else None
    return X, mean
