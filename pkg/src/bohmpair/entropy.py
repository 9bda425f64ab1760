"""Entropies of momentum-component distributions, in bits."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ClippedMassTooLarge, DomainError, EmptyEnsemble, ResolutionError
from .ensemble.engine import HistogramSpec
from .ensemble.estimators import Histogram1D
from .rotor import PairStateParams

MAX_CLIPPED_FRACTION = 1e-3


def binary_entropy(p: float) -> float:
    """``-p log2 p - (1-p) log2 (1-p)`` with ``0 log 0 = 0``."""
    p = float(p)
    if not 0.0 <= p <= 1.0:
        raise DomainError(f"probability {p} outside [0, 1]")
    return math.fsum(-q * math.log2(q) for q in (p, 1.0 - p) if q > 0.0)


def centered_spec(observable: str = "m1z", epsilon: float = 1e-3,
                  mu_max: float = 5.0) -> HistogramSpec:
    """Bins of width ``epsilon`` with one bin centred on zero.

    Symmetric grids put a finite weight exactly at ``mu = 0``; centring a bin
    there lets :func:`hemisphere_probability` split it evenly.
    """
    k = math.ceil(mu_max / epsilon - 0.5)
    lo = -(k + 0.5) * epsilon
    return HistogramSpec(observable, lo, -lo, epsilon)


def hemisphere_probability(hist: Histogram1D) -> float:
    """Mass at ``mu >= 0``.

    The bin straddling zero is split in proportion to its width on either
    side; mass clipped above the range counts as positive.
    """
    if not hist.total_weight > 0:
        raise EmptyEnsemble("histogram carries no weight")
    edges = hist.edges
    lo, hi = edges[:-1], edges[1:]
    frac = np.clip((hi - np.maximum(lo, 0.0)) / (hi - lo), 0.0, 1.0)
    pos = float(frac @ hist.counts) + hist.clipped_above
    return pos / hist.total_weight


def _check_clipping(hist: Histogram1D) -> None:
    if hist.clipped_fraction > MAX_CLIPPED_FRACTION:
        raise ClippedMassTooLarge(
            f"{hist.clipped_fraction:.2e} of the weight lies outside the histogram range")


def differential_entropy(hist: Histogram1D) -> float:
    """Plug-in ``-sum p log2 p * eps`` over the histogram's density."""
    _check_clipping(hist)
    p = hist.density
    p = p[p > 0]
    return float(-(p * np.log2(p)).sum() * hist.bin_width)


def coarse_probabilities(hist: Histogram1D, nu: int) -> np.ndarray:
    """Probabilities of cells ``[(i - 1/2) D, (i + 1/2) D)`` with ``D = 2**-nu``.

    Fine bins cut by a cell boundary contribute in proportion to the overlap.
    """
    delta = 2.0 ** (-nu)
    if hist.bin_width > delta * (1 + 1e-12):
        raise ResolutionError(
            f"bin width {hist.bin_width} is coarser than the cell size 2^-{nu}")
    edges = hist.edges
    cdf = np.concatenate([[0.0], np.cumsum(hist.counts)]) / hist.total_weight
    i_lo = math.floor(edges[0] / delta + 0.5)
    i_hi = math.ceil(edges[-1] / delta - 0.5)
    cuts = (np.arange(i_lo, i_hi + 1) + 0.5) * delta
    cuts = np.concatenate([[edges[0]], cuts[(cuts > edges[0]) & (cuts < edges[-1])], [edges[-1]]])
    return np.diff(np.interp(cuts, edges, cdf))


def discretized_entropy(hist: Histogram1D, nu: int) -> float:
    """Shannon entropy of the distribution coarse-grained to cells of width ``2**-nu``."""
    _check_clipping(hist)
    p = coarse_probabilities(hist, nu)
    p = p[p > 0]
    return float(-(p * np.log2(p)).sum())


@dataclass(frozen=True)
class EntropyReport:
    """Entropy figures of one M1z histogram; ``eof`` comes from the state itself."""

    p_plus: float
    h_binary_pm: float
    eof: float
    h_diff: float
    h_nu: tuple[tuple[int, float], ...]
    clipped_fraction: float

    def __post_init__(self):
        for name in ("p_plus", "h_binary_pm", "eof"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name}={v} outside [0, 1]")

    def to_dict(self) -> dict:
        return {"p_plus": self.p_plus, "h_binary_pm": self.h_binary_pm, "eof": self.eof,
                "h_diff": self.h_diff, "h_nu": [list(x) for x in self.h_nu],
                "clipped_fraction": self.clipped_fraction}


def entanglement_of_formation(state: PairStateParams) -> float:
    """Von Neumann entropy of either reduced qubit, in bits."""
    return binary_entropy(state.p_up)


def entropy_report(hist: Histogram1D, state: PairStateParams, nus=(2, 4, 6, 8)) -> EntropyReport:
    p_plus = min(1.0, max(0.0, hemisphere_probability(hist)))
    return EntropyReport(
        p_plus=p_plus,
        h_binary_pm=binary_entropy(p_plus),
        eof=entanglement_of_formation(state),
        h_diff=differential_entropy(hist),
        h_nu=tuple((int(n), discretized_entropy(hist, int(n))) for n in nus),
        clipped_fraction=hist.clipped_fraction,
    )
