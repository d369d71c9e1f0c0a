"""Model parameters, propagator scalars and steady-state thermodynamics.

A single cavity mode of frequency ``E`` couples with strength ``eta`` to
one chain mode of frequency ``epsilon`` per interaction period ``tau``;
the cavity is damped at rate ``sigma_minus`` and pumped at rate
``sigma_plus``.  Every closed-form result in the package is assembled
from the complex scalars returned by :func:`propagator_blocks`.
"""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np

from .errors import ConditionViolation

__all__ = [
    "ModelParams",
    "PropagatorBlocks",
    "ThermoSummary",
    "validate_params",
    "propagator_blocks",
    "thermo_summary",
    "coth_half",
    "beta_from_coth",
]


@dataclass(frozen=True)
class ModelParams:
    E: float
    epsilon: float
    eta: float
    tau: float
    sigma_minus: float
    sigma_plus: float

    @property
    def gamma(self) -> float:
        """Net damping rate ``sigma_minus - sigma_plus``."""
        return self.sigma_minus - self.sigma_plus

    @property
    def e_sigma(self) -> complex:
        return complex(self.E, 0.5 * self.gamma)

    @property
    def reservoir_coth(self) -> float:
        """``(sigma_minus + sigma_plus) / (sigma_minus - sigma_plus)``.

        This equals ``coth(beta_res / 2)`` for the reservoir inverse
        temperature ``beta_res = ln(sigma_minus / sigma_plus)`` and is
        exactly 1 when ``sigma_plus == 0``.
        """
        return (self.sigma_minus + self.sigma_plus) / (self.sigma_minus - self.sigma_plus)

    def violations(self) -> list[str]:
        out = []
        if not all(math.isfinite(v) for v in self.as_tuple()):
            out.append("non-finite parameter")
            return out
        if self.tau <= 0 or self.E <= 0 or self.epsilon <= 0:
            out.append("nonpositive tau/E/epsilon")
        if self.eta < 0 or self.sigma_minus < 0 or self.sigma_plus < 0:
            out.append("negative eta or sigma")
        if self.eta ** 2 > self.E * self.epsilon:
            out.append("eta^2 > E*epsilon")
        if not self.sigma_plus < self.sigma_minus:
            out.append("sigma_plus >= sigma_minus")
        return out

    def validate(self) -> "ModelParams":
        bad = self.violations()
        if bad:
            raise ConditionViolation(bad)
        return self

    def as_tuple(self) -> tuple[float, ...]:
        return (self.E, self.epsilon, self.eta, self.tau, self.sigma_minus, self.sigma_plus)

    def replace(self, **changes) -> "ModelParams":
        fields = dict(zip(("E", "epsilon", "eta", "tau", "sigma_minus", "sigma_plus"), self.as_tuple()))
        fields.update(changes)
        return ModelParams(**fields)


def validate_params(E, epsilon, eta, tau, sigma_minus, sigma_plus) -> ModelParams:
    """Build :class:`ModelParams` and check every admissibility condition.

    Raises :class:`ConditionViolation` listing all failed conditions at once.
    """
    p = ModelParams(*(float(v) for v in (E, epsilon, eta, tau, sigma_minus, sigma_plus)))
    return p.validate()


@dataclass(frozen=True)
class PropagatorBlocks:
    e_sigma: complex
    g: complex
    w: complex
    z_plus: complex
    z_minus: complex
    t: float

    @property
    def gz(self) -> complex:
        return self.g * self.z_plus

    @property
    def gw(self) -> complex:
        return self.g * self.w

    @property
    def gz_minus(self) -> complex:
        return self.g * self.z_minus

    def symplectic_defect(self) -> complex:
        """``z(t) z(-t) - w(t)^2 - 1``, zero in exact arithmetic."""
        return self.z_plus * self.z_minus - self.w ** 2 - 1.0

    def row_norm(self) -> float:
        """Squared norm of the cavity row of the step matrix."""
        return abs(self.g) ** 2 * (abs(self.z_plus) ** 2 + abs(self.w) ** 2)


def _sin_over(x: complex, t: float) -> complex:
    # sin(t x) / x, regular at x = 0
    if abs(t * x) < 1e-8:
        return t * (1.0 - (t * x) ** 2 / 6.0)
    return np.sin(t * x) / x


@functools.lru_cache(maxsize=4096)
def propagator_blocks(params: ModelParams, t: float, branch: int = 1) -> PropagatorBlocks:
    """Complex scalars ``g, w, z(t), z(-t)`` of the one-step propagator at time ``t``.

    ``branch=-1`` evaluates with the opposite sign of the complex square
    root; the results coincide because only even functions of the root
    enter.
    """
    t = float(t)
    delta = params.e_sigma - params.epsilon
    root = branch * np.sqrt(delta * delta / 4.0 + params.eta ** 2 + 0j)
    s = _sin_over(root, t)
    c = np.cos(t * root)
    g = np.exp(0.5j * t * delta)
    w = 1j * params.eta * s
    z_plus = c + 0.5j * delta * s
    z_minus = c - 0.5j * delta * s
    return PropagatorBlocks(complex(params.e_sigma), complex(g), complex(w),
                            complex(z_plus), complex(z_minus), t)


def coth_half(beta: float) -> float:
    """``coth(beta / 2)``; returns 1 for ``beta = inf`` (vacuum)."""
    if math.isinf(beta) and beta > 0:
        return 1.0
    if beta <= 0:
        raise ValueError("inverse temperature must be positive")
    return 1.0 / math.tanh(0.5 * beta)


def beta_from_coth(c: float) -> float:
    """Inverse of :func:`coth_half`; ``c = 1`` maps to ``inf``."""
    if c < 1.0 - 1e-12:
        raise ValueError(f"coth value {c} below 1")
    if c <= 1.0:
        return math.inf
    return math.log((c + 1.0) / (c - 1.0))


@dataclass(frozen=True)
class ThermoSummary:
    lam: float
    beta_star_0: float
    beta_star: float
    beta: float
    reservoir_coth: float
    coth_star: float
    zero_temperature_reservoir: bool

    def ordered(self) -> bool:
        """True when ``beta_star`` lies between the reservoir and chain values."""
        lo, hi = sorted((self.beta_star_0, self.beta))
        tol = 1e-12 * max(1.0, abs(self.beta_star)) if math.isfinite(self.beta_star) else 0.0
        return lo - tol <= self.beta_star <= hi + tol


def thermo_summary(params: ModelParams, beta: float) -> ThermoSummary:
    """Mixing weight and effective inverse temperature of the cavity steady state."""
    b = propagator_blocks(params, params.tau)
    lam = abs(b.gw) ** 2 / (1.0 - abs(b.gz) ** 2)
    r = params.reservoir_coth
    coth_star = (1.0 - lam) * r + lam * coth_half(beta)
    # work with coth - 1 so that nearly cold states keep their digits
    excess = (1.0 - lam) * 2.0 * params.sigma_plus / params.gamma
    if not math.isinf(beta):
        excess += lam * 2.0 / math.expm1(beta)
    zero_t = params.sigma_plus == 0.0
    beta0 = math.inf if zero_t else math.log(params.sigma_minus / params.sigma_plus)
    return ThermoSummary(
        lam=lam,
        beta_star_0=beta0,
        beta_star=math.log1p(2.0 / excess) if excess > 0 else math.inf,
        beta=beta,
        reservoir_coth=r,
        coth_star=coth_star,
        zero_temperature_reservoir=zero_t,
    )
