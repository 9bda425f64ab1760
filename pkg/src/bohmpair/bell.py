"""Polarization correlators and the CHSH functional.

The Bohmian correlator is an ensemble correlation of the momenta before any
measurement; it is not a model of measurement outcomes.
"""

from __future__ import annotations

import math
from collections.abc import Callable
from dataclasses import dataclass

import numpy as np

from .ensemble.estimators import Ensemble, EstimatorResult, feature_stream
from .ensemble.features import AXES, feature_index
from .rotor import PairStateParams

UNIT_TOL = 1e-12
NORM_NAMES = [f"n_{i}{j}" for i in AXES for j in AXES]


def _unit(v, name: str) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if v.shape != (3,):
        raise ValueError(f"{name} must be a 3-vector")
    if abs(float(np.linalg.norm(v)) - 1.0) > UNIT_TOL:
        raise ValueError(f"{name} is not a unit vector (norm {np.linalg.norm(v)!r})")
    return v


def in_plane(angle: float) -> np.ndarray:
    """Unit vector in the xy-plane at ``angle`` from the x axis."""
    return np.array([math.cos(angle), math.sin(angle), 0.0])


def from_spherical(polar: float, azimuth: float) -> np.ndarray:
    return np.array([math.sin(polar) * math.cos(azimuth), math.sin(polar) * math.sin(azimuth),
                     math.cos(polar)])


@dataclass(frozen=True)
class PolarizerSetup:
    a: np.ndarray
    b: np.ndarray
    a_prime: np.ndarray
    b_prime: np.ndarray

    def __post_init__(self):
        for name in ("a", "b", "a_prime", "b_prime"):
            object.__setattr__(self, name, _unit(getattr(self, name), name))

    @classmethod
    def in_plane_degrees(cls, a: float, a_prime: float, b: float, b_prime: float):
        return cls(*(in_plane(math.radians(x)) for x in (a, b, a_prime, b_prime)))

    @classmethod
    def optimal_singlet(cls) -> "PolarizerSetup":
        """Coplanar setup reaching 2 sqrt 2 for the singlet."""
        return cls.in_plane_degrees(0.0, 90.0, 45.0, 315.0)

    @classmethod
    def random(cls, rng: np.random.Generator) -> "PolarizerSetup":
        v = rng.standard_normal((4, 3))
        v /= np.linalg.norm(v, axis=1, keepdims=True)
        return cls(*v)

    def to_dict(self) -> dict:
        return {k: getattr(self, k).tolist() for k in ("a", "b", "a_prime", "b_prime")}


def qm_correlator(state: PairStateParams, a, b) -> float:
    """Quantum correlation of spin projections along ``a`` and ``b`` (4 <(a.S1)(b.S2)>)."""
    a, b = _unit(a, "a"), _unit(b, "b")
    st = math.sin(state.theta)
    return float((a[0] * b[0] + a[1] * b[1]) * st * math.cos(state.phi)
                 + (a[1] * b[0] - a[0] * b[1]) * st * math.sin(state.phi)
                 - a[2] * b[2])


def contract(normalized: np.ndarray, a, b) -> float:
    """``3 a . N . b`` for a normalized correlation tensor ``N``."""
    return float(3.0 * (np.asarray(a) @ np.asarray(normalized) @ np.asarray(b)))


def bohm_correlator(state: PairStateParams, a, b, samples: Ensemble) -> EstimatorResult:
    """``3 <(a.M1)(b.M2) / (|M1||M2|)>`` contracted from the normalized tensor."""
    if samples.state != state:
        raise ValueError("ensemble was built for a different state")
    a, b = _unit(a, "a"), _unit(b, "b")
    return samples.linear_combination(NORM_NAMES, 3.0 * np.outer(a, b).ravel())


def bohm_correlator_direct(state: PairStateParams, a, b, samples: Ensemble) -> float:
    """Same quantity averaged sample by sample from the momenta themselves."""
    if samples.state != state:
        raise ValueError("ensemble was built for a different state")
    a, b = _unit(a, "a"), _unit(b, "b")
    i1, i2, l1, l2 = (feature_index(n) for n in ("m1x", "m2x", "m1_len", "m2_len"))
    num, den = [], []
    for f, w in feature_stream(samples):
        proj = (f[:, i1:i1 + 3] @ a) * (f[:, i2:i2 + 3] @ b) / (f[:, l1] * f[:, l2])
        num.append(float(w @ proj))
        den.append(float(w.sum()))
    return 3.0 * math.fsum(num) / math.fsum(den)


def chsh_value(setup: PolarizerSetup, correlator: Callable[[np.ndarray, np.ndarray], float]):
    """``|P(a,b) + P(a,b') + P(a',b) - P(a',b')|``."""
    s = (correlator(setup.a, setup.b) + correlator(setup.a, setup.b_prime)
         + correlator(setup.a_prime, setup.b) - correlator(setup.a_prime, setup.b_prime))
    return abs(s)


@dataclass(frozen=True)
class ChshResult:
    value: float
    std_error: float


def bohm_chsh(setup: PolarizerSetup, samples: Ensemble) -> ChshResult:
    """CHSH of the Bohmian correlator; the error is that of the combined contraction."""
    coeff = (np.outer(setup.a, setup.b) + np.outer(setup.a, setup.b_prime)
             + np.outer(setup.a_prime, setup.b) - np.outer(setup.a_prime, setup.b_prime))
    r = samples.linear_combination(NORM_NAMES, 3.0 * coeff.ravel())
    return ChshResult(abs(r.value), r.std_error)
