"""Closed-form reference results.

Analytic Bohmian densities for the product state and the maximally entangled
states, and standard quantum-mechanical spin correlators of the pair state.
Every density is integrated numerically when first constructed, which guards
against transcription slips in the formulas.
"""

from __future__ import annotations

import enum
import functools
import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .errors import DomainError, RegimeError
from .rotor import PairStateParams

NORMALIZATION_TOL = 1e-8
_GL_NODES = np.polynomial.legendre.leggauss(16)


class Kind(str, enum.Enum):
    MOMENTUM_LENGTH = "momentum_length"
    MOMENTUM_LENGTH_SQ = "momentum_length_sq"
    M1X_PRODUCT_STATE = "m1x_product_state"
    MXY_PRODUCT_STATE = "mxy_product_state"
    COS_POLAR_MAXENT = "cos_polar_maxent"
    M1Z_MAXENT = "m1z_maxent"
    M1Z_SQ_MAXENT = "m1z_sq_maxent"
    MXY_MAXENT = "mxy_maxent"
    PRODUCT_Z_MAXENT = "product_z_maxent"
    NORMALIZED_PRODUCT_MAXENT = "normalized_product_maxent"


_NONNEGATIVE = {Kind.MOMENTUM_LENGTH, Kind.MOMENTUM_LENGTH_SQ, Kind.MXY_PRODUCT_STATE,
                Kind.M1Z_SQ_MAXENT, Kind.MXY_MAXENT}
_SIGNED = {Kind.PRODUCT_Z_MAXENT, Kind.NORMALIZED_PRODUCT_MAXENT}


def _one_minus_mxy_root(mu):
    """``1 - (1 + 2 mu^2 + 6 mu^4) sqrt(1 - 4 mu^2)`` without cancellation."""
    x = 4.0 * mu * mu
    f = (1 + x / 2 + 3 * x * x / 8) * np.sqrt(np.maximum(0.0, 1 - x))
    # 1 - f^2 expanded exactly
    one_minus_f2 = x**3 * (5 / 8 + 15 * x / 64 + 9 * x * x / 64)
    return one_minus_f2 / (1 + f)


def _formula(kind: Kind, eta: int, mu):
    mu = np.asarray(mu, dtype=float)
    a = np.abs(mu)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        if kind is Kind.MOMENTUM_LENGTH:
            return np.where(mu >= 0.5, 0.25 / mu**5, 0.0)
        if kind is Kind.MOMENTUM_LENGTH_SQ:
            return np.where(mu >= 0.25, (2 * mu) ** -3.0, 0.0)
        if kind is Kind.M1X_PRODUCT_STATE:
            return 1.5 * (1 + 4 * mu * mu) ** -2.5
        if kind is Kind.MXY_PRODUCT_STATE:
            return 16 * mu * (1 + 4 * mu * mu) ** -3.0
        if kind is Kind.COS_POLAR_MAXENT:
            return np.where(a <= 1.0, 0.5, 0.0)
        if kind is Kind.M1Z_MAXENT:
            return 0.8 * np.minimum(1.0, (2 * a) ** -5.0)
        if kind is Kind.M1Z_SQ_MAXENT:
            return 1.6 * np.minimum((4 * mu) ** -0.5, (4 * mu) ** -3.0)
        if kind is Kind.MXY_MAXENT:
            inner = np.where(mu < 0.5, _one_minus_mxy_root(np.minimum(mu, 0.5)), 1.0)
            small = mu < 1e-3
            # leading terms of the same expression, 2/(15 mu^5) * 20 mu^6 (1 + 3 mu^2 / 2)
            series = 8 / 3 * mu * (1 + 1.5 * mu * mu)
            return np.where(small, series, 2 / (15 * mu**5) * inner)
        if kind is Kind.PRODUCT_Z_MAXENT:
            x = eta * mu
            return np.where(x > 0, 1.6 * np.minimum((4 * x) ** -0.5, (4 * x) ** -3.0), 0.0)
        if kind is Kind.NORMALIZED_PRODUCT_MAXENT:
            x = eta * mu
            return np.where((x > 0) & (x <= 1), (4 * x) ** -0.5, 0.0)
    raise ValueError(kind)


@dataclass(frozen=True)
class AnalyticDistribution:
    """A closed-form density dP/dmu.

    ``eta`` is the sign parameter of the product forms: -1 for the singlet,
    +1 for the triplet x/y products; the z products always carry -1.
    """

    kind: Kind
    eta: int = -1

    def __post_init__(self):
        object.__setattr__(self, "kind", Kind(self.kind))
        if self.eta not in (-1, 1):
            raise ValueError("eta must be -1 or +1")
        _check_normalization(self.kind, self.eta if self.kind in _SIGNED else -1)

    @property
    def kinks(self) -> tuple[float, ...]:
        k = self.kind
        if k is Kind.MOMENTUM_LENGTH or k is Kind.MXY_MAXENT:
            return (0.5,)
        if k is Kind.MOMENTUM_LENGTH_SQ or k is Kind.M1Z_SQ_MAXENT:
            return (0.25,)
        if k is Kind.M1Z_MAXENT:
            return (-0.5, 0.5)
        if k is Kind.COS_POLAR_MAXENT:
            return (-1.0, 1.0)
        if k is Kind.PRODUCT_Z_MAXENT:
            return (0.0, 0.25 * self.eta)
        if k is Kind.NORMALIZED_PRODUCT_MAXENT:
            return (0.0, float(self.eta))
        return ()

    @property
    def support(self) -> tuple[float, float]:
        k = self.kind
        if k is Kind.MOMENTUM_LENGTH:
            return (0.5, math.inf)
        if k is Kind.MOMENTUM_LENGTH_SQ:
            return (0.25, math.inf)
        if k in (Kind.MXY_PRODUCT_STATE, Kind.MXY_MAXENT, Kind.M1Z_SQ_MAXENT):
            return (0.0, math.inf)
        if k is Kind.COS_POLAR_MAXENT:
            return (-1.0, 1.0)
        if k is Kind.PRODUCT_Z_MAXENT:
            return (0.0, math.inf) if self.eta > 0 else (-math.inf, 0.0)
        if k is Kind.NORMALIZED_PRODUCT_MAXENT:
            return (0.0, 1.0) if self.eta > 0 else (-1.0, 0.0)
        return (-math.inf, math.inf)

    def __call__(self, mu):
        return analytic_density(self, mu)

    def bin_average(self, edges) -> np.ndarray:
        """Mean of the density over each ``[edges[k], edges[k+1])``.

        Bins free of kinks, support ends and the origin use fixed Gauss-Legendre
        nodes; the rest go through adaptive quadrature.
        """
        edges = np.asarray(edges, dtype=float)
        a, b = edges[:-1], edges[1:]
        x, w = _GL_NODES
        mid, half = 0.5 * (a + b), 0.5 * (b - a)
        lo, hi = self.support
        nodes = mid[:, None] + half[:, None] * x[None, :]
        inside = (nodes >= lo) & (nodes <= hi)
        vals = np.where(inside, _formula(self.kind, self.eta, np.where(inside, nodes, 1.0)), 0.0)
        out = 0.5 * (vals @ w)
        special = [p for p in (*self.kinks, lo, hi, 0.0) if math.isfinite(p)]
        hard = np.zeros(len(a), dtype=bool)
        # neighbours of a singular point too: the nodes do not resolve 1/sqrt(mu - p)
        for p in special:
            hard |= (a - 2 * half <= p) & (p <= b + 2 * half)
        for k in np.flatnonzero(hard):
            ua, ub = max(a[k], lo), min(b[k], hi)
            mass = self._segment(ua, ub, [p for p in special if ua < p < ub]) if ub > ua else 0.0
            out[k] = mass / (b[k] - a[k])
        return out

    def cdf(self, x) -> np.ndarray:
        """P(mu < x), by quadrature between consecutive sorted points."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        order = np.argsort(x)
        xs = x[order]
        lo, hi = self.support
        breaks = [p for p in self.kinks if lo < p < hi]
        first = min(max(xs[0], lo), hi)
        base = _integrate_piecewise(self._scalar, lo, first, [p for p in breaks if p < first]) \
            if first > lo else 0.0
        clipped = np.clip(xs, first, hi)
        steps = [self._segment(a, b, breaks) if b > a else 0.0
                 for a, b in zip(clipped[:-1], clipped[1:])]
        out = base + np.concatenate([[0.0], np.cumsum(steps)])
        res = np.empty_like(out)
        res[order] = out
        return res

    def _segment(self, a, b, breaks):
        pts = [p for p in breaks if a < p < b]
        return _integrate_piecewise(self._scalar, a, b, pts)

    def _scalar(self, mu):
        return float(_formula(self.kind, self.eta, mu))

    def moment(self, power: int = 1) -> float:
        lo, hi = self.support
        pts = [p for p in self.kinks if lo < p < hi]
        return _integrate_piecewise(lambda m: m**power * self._scalar(m), lo, hi, pts)


def analytic_density(dist: AnalyticDistribution, mu):
    """Evaluate ``dist`` at ``mu``; raises :class:`DomainError` for negative
    arguments of forms defined on lengths and squares."""
    mu_arr = np.asarray(mu, dtype=float)
    if dist.kind in _NONNEGATIVE and np.any(mu_arr < 0):
        raise DomainError(f"{dist.kind.value} is defined for mu >= 0 only")
    out = _formula(dist.kind, dist.eta, mu_arr)
    return float(out) if out.ndim == 0 else out


def _integrate_piecewise(f, lo, hi, pts):
    edges = [lo, *sorted(pts), hi]
    total = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        total += integrate.quad(f, a, b, limit=400, epsabs=1e-14, epsrel=1e-12)[0]
    return total


@functools.lru_cache(maxsize=None)
def _check_normalization(kind: Kind, eta: int) -> float:
    dist = object.__new__(AnalyticDistribution)
    object.__setattr__(dist, "kind", kind)
    object.__setattr__(dist, "eta", eta)
    lo, hi = dist.support
    total = _integrate_piecewise(dist._scalar, lo, hi, [p for p in dist.kinks if lo < p < hi])
    if abs(total - 1.0) > NORMALIZATION_TOL:
        raise AssertionError(f"{kind.value} integrates to {total!r}, not 1")
    return total


# --- standard quantum mechanics -------------------------------------------------

@dataclass(frozen=True)
class QmCorrelators:
    spin_expectation: np.ndarray
    spin_tensor: np.ndarray
    s1_dot_s2: float
    eof: float


def spin_tensor(state: PairStateParams) -> np.ndarray:
    """<S1i S2j> for the pair state."""
    st = math.sin(state.theta)
    c, s = math.cos(state.phi), math.sin(state.phi)
    return 0.25 * np.array([[st * c, -st * s, 0.0],
                            [st * s, st * c, 0.0],
                            [0.0, 0.0, -1.0]])


def qm_reference(state: PairStateParams) -> QmCorrelators:
    from .entropy import binary_entropy  # entropy imports the ensemble package

    t = spin_tensor(state)
    return QmCorrelators(
        spin_expectation=np.array([0.0, 0.0, 0.5 * math.cos(state.theta)]),
        spin_tensor=t,
        s1_dot_s2=0.25 * (2 * math.sin(state.theta) * math.cos(state.phi) - 1),
        eof=binary_entropy(state.p_up),
    )


@dataclass(frozen=True)
class BohmianPrediction:
    tensor: np.ndarray
    m1_dot_m2: float
    total_sq: float


MAX_ENTANGLED_ATOL = 1e-12


def bohmian_reference_ratios(state: PairStateParams) -> BohmianPrediction:
    """Bohmian correlators at maximal entanglement: two thirds of the quantum ones."""
    if abs(state.theta - math.pi / 2) > MAX_ENTANGLED_ATOL:
        raise RegimeError("the 2/3 relations are established only at theta = pi/2")
    qm = qm_reference(state)
    # <(S1 + S2)^2> = 3/4 + 3/4 + 2 <S1.S2>
    return BohmianPrediction(
        tensor=2.0 / 3.0 * qm.spin_tensor,
        m1_dot_m2=2.0 / 3.0 * qm.s1_dot_s2,
        total_sq=2.0 / 3.0 * (1.5 + 2 * qm.s1_dot_s2),
    )


# distributions attached to CLI observables, keyed by (observable, regime)
def overlay_for(observable: str, state: PairStateParams, atol: float = 1e-12):
    """Closed form valid for ``observable`` at ``state``, or None."""
    product = state.theta < atol or abs(state.theta - math.pi) < atol
    maxent = abs(state.theta - math.pi / 2) < atol
    singlet_like = maxent and abs(state.phi - math.pi) < atol
    triplet_like = maxent and (state.phi < atol or abs(state.phi - 2 * math.pi) < atol)
    if observable in ("m_len_sq", "m1_len_sq"):
        return AnalyticDistribution(Kind.MOMENTUM_LENGTH_SQ)
    if observable in ("m_len", "m1_len"):
        return AnalyticDistribution(Kind.MOMENTUM_LENGTH)
    if product and observable in ("m1x", "m1y"):
        return AnalyticDistribution(Kind.M1X_PRODUCT_STATE)
    if product and observable in ("mxy", "m1_xy"):
        return AnalyticDistribution(Kind.MXY_PRODUCT_STATE)
    if maxent:
        table = {
            "m1z": Kind.M1Z_MAXENT, "m2z": Kind.M1Z_MAXENT, "m1x": Kind.M1Z_MAXENT,
            "m1y": Kind.M1Z_MAXENT, "m1z_sq": Kind.M1Z_SQ_MAXENT, "m1x_sq": Kind.M1Z_SQ_MAXENT,
            "mxy": Kind.MXY_MAXENT, "m1_xy": Kind.MXY_MAXENT, "cos_polar": Kind.COS_POLAR_MAXENT,
            "cos_polar1": Kind.COS_POLAR_MAXENT,
        }
        if observable in table:
            return AnalyticDistribution(table[observable])
        if observable in ("m1z_m2z", "t_zz"):
            return AnalyticDistribution(Kind.PRODUCT_Z_MAXENT, eta=-1)
        if observable in ("norm_prod_z", "n_zz"):
            return AnalyticDistribution(Kind.NORMALIZED_PRODUCT_MAXENT, eta=-1)
        if observable in ("m1x_m2x", "t_xx") and (singlet_like or triplet_like):
            return AnalyticDistribution(Kind.PRODUCT_Z_MAXENT, eta=-1 if singlet_like else 1)
        if observable in ("norm_prod_x", "n_xx") and (singlet_like or triplet_like):
            return AnalyticDistribution(Kind.NORMALIZED_PRODUCT_MAXENT,
                                        eta=-1 if singlet_like else 1)
    return None
