"""Configuration space, state parameters and the guiding wave of two spin-1/2 rotors.

Euler angles follow the ``D(beta, alpha, gamma)`` argument order of the
Wigner matrices: ``alpha`` is the polar tilt of the rotor axis, ``beta`` the
azimuth about the space z-axis and ``gamma`` the spin about the rotor axis.
With this order the principal axis is ``e = (sin a sin b, sin a cos b, cos a)``
and every momentum field produced here satisfies ``e . M = 1/2``.

Units: hbar = 1; the moment of inertia ``I`` defaults to 1.

All array functions broadcast over numpy arrays, so one call evaluates a whole
batch of configurations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import NodeError

TWO_PI = 2.0 * math.pi
FOUR_PI = 4.0 * math.pi
#: 1/sqrt(8 pi^2), normalization of a single spinor on SO(3)
SPINOR_NORM = 1.0 / math.sqrt(8.0 * math.pi**2)
#: R^2 below this marks a node of the guiding wave
NODE_THRESHOLD = 1e-28 * (8.0 * math.pi**2) ** -2
#: |sin alpha| below this is treated as a pole of the Euler chart
POLE_THRESHOLD = 1e-8

SPIN = 0.5
AXIS_PROJECTION = 0.5


def wrap(x: float, period: float) -> float:
    """``x mod period`` in ``[0, period)``; a tiny negative x would round up to period."""
    v = float(x) % period
    return 0.0 if v >= period else v


@dataclass(frozen=True)
class EulerTriple:
    """Orientation of one rotor. ``beta`` and ``gamma`` are wrapped on construction."""

    alpha: float
    beta: float = 0.0
    gamma: float = 0.0

    def __post_init__(self):
        for name in ("alpha", "beta", "gamma"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        if not 0.0 <= self.alpha <= math.pi:
            raise ValueError(f"alpha={self.alpha} outside [0, pi]")
        object.__setattr__(self, "beta", wrap(self.beta, TWO_PI))
        object.__setattr__(self, "gamma", wrap(self.gamma, FOUR_PI))

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.alpha, self.beta, self.gamma)


@dataclass(frozen=True)
class PairConfiguration:
    """A point of the six-dimensional hidden-variable space."""

    rotor1: EulerTriple
    rotor2: EulerTriple

    @classmethod
    def from_angles(cls, a1, b1, g1, a2, b2, g2) -> "PairConfiguration":
        return cls(EulerTriple(a1, b1, g1), EulerTriple(a2, b2, g2))

    def as_array(self) -> np.ndarray:
        return np.array(self.rotor1.as_tuple() + self.rotor2.as_tuple())


@dataclass(frozen=True)
class PairStateParams:
    """Amplitude angle ``theta`` and relative phase ``phi`` of
    ``cos(theta/2)|ud> + exp(i phi) sin(theta/2)|du>``."""

    theta: float
    phi: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.theta) and math.isfinite(self.phi)):
            raise ValueError("state angles must be finite")
        if not 0.0 <= self.theta <= math.pi:
            raise ValueError(f"theta={self.theta} outside [0, pi]")
        object.__setattr__(self, "phi", wrap(self.phi, TWO_PI))

    @property
    def cos_half(self) -> float:
        return math.cos(self.theta / 2)

    @property
    def sin_half(self) -> float:
        return math.sin(self.theta / 2)

    @property
    def p_up(self) -> float:
        """Born probability that qubit 1 is found up."""
        # (1 + cos t)/2 is exact at t = 0, pi/2 and pi, unlike cos(t/2)^2
        return 0.5 * (1.0 + math.cos(self.theta))


@dataclass(frozen=True)
class PhysicalConstants:
    inertia: float = 1.0
    hbar: float = field(default=1.0, init=False)
    spin: float = field(default=SPIN, init=False)
    axis_projection: float = field(default=AXIS_PROJECTION, init=False)

    def __post_init__(self):
        if not self.inertia > 0:
            raise ValueError("moment of inertia must be positive")

    @property
    def energy(self) -> float:
        """Total energy of the pair, 2 * s(s+1)/(2I) = 3/(4I)."""
        return self.spin * (self.spin + 1) / self.inertia


@dataclass(frozen=True)
class PhaseGradient:
    d_alpha1: float | np.ndarray
    d_beta1: float | np.ndarray
    d_gamma1: float | np.ndarray
    d_alpha2: float | np.ndarray
    d_beta2: float | np.ndarray
    d_gamma2: float | np.ndarray

    def rotor(self, k: int) -> tuple:
        if k == 1:
            return self.d_alpha1, self.d_beta1, self.d_gamma1
        return self.d_alpha2, self.d_beta2, self.d_gamma2


def spinor_up(alpha, beta, gamma=0.0):
    """Spin-up eigenfunction ``exp(-i beta/2 - i gamma/2) cos(alpha/2) / sqrt(8 pi^2)``."""
    alpha, beta, gamma = np.broadcast_arrays(*map(np.asarray, (alpha, beta, gamma)))
    out = SPINOR_NORM * np.exp(-0.5j * (beta + gamma)) * np.cos(alpha / 2)
    return out[()] if out.ndim == 0 else out


def spinor_down(alpha, beta, gamma=0.0):
    """Spin-down eigenfunction ``exp(+i beta/2 - i gamma/2) sin(alpha/2) / sqrt(8 pi^2)``."""
    alpha, beta, gamma = np.broadcast_arrays(*map(np.asarray, (alpha, beta, gamma)))
    out = SPINOR_NORM * np.exp(0.5j * (beta - gamma)) * np.sin(alpha / 2)
    return out[()] if out.ndim == 0 else out


def _angles(cfg):
    if isinstance(cfg, PairConfiguration):
        return cfg.rotor1.as_tuple() + cfg.rotor2.as_tuple()
    cfg = np.asarray(cfg, dtype=float)
    return tuple(cfg[..., k] for k in range(6))


def _terms(state: PairStateParams, a1, b1, a2, b2):
    """The two amplitudes of the guiding wave without the common gamma phase
    and spinor normalization, plus their alpha derivatives."""
    c, s = state.cos_half, state.sin_half
    c1, s1 = np.cos(a1 / 2), np.sin(a1 / 2)
    c2, s2 = np.cos(a2 / 2), np.sin(a2 / 2)
    ph1 = np.exp(0.5j * (b2 - b1))
    ph2 = np.exp(1j * state.phi - 0.5j * (b2 - b1))
    t1 = c * c1 * s2 * ph1
    t2 = s * s1 * c2 * ph2
    dt_a1 = (-0.5 * c * s1 * s2 * ph1, 0.5 * s * c1 * c2 * ph2)
    dt_a2 = (0.5 * c * c1 * c2 * ph1, -0.5 * s * s1 * s2 * ph2)
    return t1, t2, dt_a1, dt_a2


def guiding_wave(state: PairStateParams, cfg) -> complex | np.ndarray:
    """psi(lambda) for a :class:`PairConfiguration` or an ``(..., 6)`` angle array
    ordered ``(a1, b1, g1, a2, b2, g2)``."""
    a1, b1, g1, a2, b2, g2 = _angles(cfg)
    t1, t2, _, _ = _terms(state, a1, b1, a2, b2)
    out = SPINOR_NORM**2 * np.exp(-0.5j * (np.asarray(g1) + g2)) * (t1 + t2)
    return complex(out) if np.ndim(out) == 0 else out


def density(state: PairStateParams, cfg):
    """Quantum-equilibrium density R^2 = |psi|^2."""
    a1, b1, _, a2, b2, _ = _angles(cfg)
    t1, t2, _, _ = _terms(state, a1, b1, a2, b2)
    out = SPINOR_NORM**4 * np.abs(t1 + t2) ** 2
    return float(out) if np.ndim(out) == 0 else out


def phase_gradient_arrays(state: PairStateParams, a1, b1, a2, b2):
    """Partials of S as ``(S_a1, S_b1, S_a2, S_b2, r2)`` with no node check.

    Each partial is ``Im(d psi / psi)``; the gamma partials are the constant -1/2.
    """
    t1, t2, dt_a1, dt_a2 = _terms(state, a1, b1, a2, b2)
    psi = t1 + t2
    norm = np.abs(psi) ** 2
    conj = np.conj(psi)
    with np.errstate(divide="ignore", invalid="ignore"):
        s_a1 = np.imag((dt_a1[0] + dt_a1[1]) * conj) / norm
        s_a2 = np.imag((dt_a2[0] + dt_a2[1]) * conj) / norm
        # Im(-i/2 (t1 - t2) conj(psi)) reduces to a difference of moduli
        diff = 0.5 * (np.abs(t1) ** 2 - np.abs(t2) ** 2) / norm
    return s_a1, -diff, s_a2, diff, SPINOR_NORM**4 * norm


def phase_gradient(state: PairStateParams, cfg) -> PhaseGradient:
    """Analytic gradient of the phase S over the six Euler angles.

    Raises :class:`NodeError` where R^2 is at or below :data:`NODE_THRESHOLD`.
    """
    a1, b1, _, a2, b2, _ = _angles(cfg)
    s_a1, s_b1, s_a2, s_b2, r2 = phase_gradient_arrays(state, a1, b1, a2, b2)
    if np.any(r2 <= NODE_THRESHOLD):
        raise NodeError("phase undefined at a node of the guiding wave")
    half = np.full(np.shape(r2), -0.5)[()] if np.ndim(r2) else -0.5
    if np.ndim(r2) == 0:
        s_a1, s_b1, s_a2, s_b2 = map(float, (s_a1, s_b1, s_a2, s_b2))
    return PhaseGradient(s_a1, s_b1, half, s_a2, s_b2, half)
