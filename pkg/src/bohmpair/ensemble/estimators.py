"""Ensemble estimators: densities, averages, correlation tensors, angle statistics.

An :class:`Ensemble` binds a state to a sampler. Named observables (see
``features.FEATURES``) go through the compiled accumulation pass; any other
callable is evaluated batch by batch on the sample stream.

Error bars: Monte Carlo results use batch means over the fixed chunks; grid
results use the difference between the full grid and the grid with every
count halved.
"""

from __future__ import annotations

import csv
import io
import math
from collections.abc import Callable, Iterable
from dataclasses import dataclass

import numpy as np

from ..errors import EmptyEnsemble, IllConditionedExtraction
from ..rotor import PairStateParams, PhysicalConstants
from .engine import (
    Accumulation,
    HistogramSpec,
    accumulate,
    evaluate_features,
)
from .features import AXES, feature_index
from .reduction import pairwise_sum
from .sampling import (GridSpec, LatticeSpec, McSpec, SampleBatch, grid_stream,
                       lattice_stream, mc_stream)


@dataclass(frozen=True)
class EstimatorResult:
    value: float
    std_error: float
    n_effective: float

    def __post_init__(self):
        if not self.std_error >= 0:
            raise ValueError("std_error must be nonnegative")

    def to_dict(self) -> dict:
        return {"value": self.value, "std_error": self.std_error, "n_effective": self.n_effective}


@dataclass
class Histogram1D:
    """Weighted histogram over half-open bins ``[mu_min + k eps, mu_min + (k+1) eps)``."""

    mu_min: float
    mu_max: float
    bin_width: float
    counts: np.ndarray
    counts_sq: np.ndarray
    total_weight: float
    clipped_below: float = 0.0
    clipped_above: float = 0.0
    observable: str = ""

    @property
    def edges(self) -> np.ndarray:
        return self.mu_min + self.bin_width * np.arange(len(self.counts) + 1)

    @property
    def centers(self) -> np.ndarray:
        return self.mu_min + self.bin_width * (np.arange(len(self.counts)) + 0.5)

    @property
    def clipped_mass(self) -> float:
        return self.clipped_below + self.clipped_above

    @property
    def clipped_fraction(self) -> float:
        return self.clipped_mass / self.total_weight

    @property
    def density(self) -> np.ndarray:
        return self.counts / (self.total_weight * self.bin_width)

    @property
    def std_error(self) -> np.ndarray:
        """Per-bin standard error from the summed squared weights."""
        return np.sqrt(self.counts_sq) / (self.total_weight * self.bin_width)

    def to_csv(self, overlay: np.ndarray | None = None) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        header = ["mu", "density", "std_error"] + (["analytic"] if overlay is not None else [])
        writer.writerow(header)
        dens, err = self.density, self.std_error
        for k, mu in enumerate(self.centers):
            row = [f"{mu:.10g}", f"{dens[k]:.10g}", f"{err[k]:.6g}"]
            if overlay is not None:
                row.append(f"{overlay[k]:.10g}")
            writer.writerow(row)
        return buf.getvalue()


@dataclass(frozen=True)
class CorrelationTensor:
    raw: np.ndarray              # <M1i M2j>
    raw_error: np.ndarray
    normalized: np.ndarray       # <M1i M2j / (|M1||M2|)>
    normalized_error: np.ndarray
    b_x: EstimatorResult
    b_z: EstimatorResult
    c_m: EstimatorResult

    def to_dict(self) -> dict:
        return {"raw": self.raw.tolist(), "raw_error": self.raw_error.tolist(),
                "normalized": self.normalized.tolist(),
                "normalized_error": self.normalized_error.tolist(),
                "b_x": self.b_x.to_dict(), "b_z": self.b_z.to_dict(), "c_m": self.c_m.to_dict()}


@dataclass(frozen=True)
class AngleStatistics:
    cos_big_phi: EstimatorResult
    delta_cos_big_phi: float
    cos_az: EstimatorResult
    sin_az: EstimatorResult
    delta_cos_az: float
    delta_sin_az: float
    c_b: EstimatorResult

    def to_dict(self) -> dict:
        return {"cos_big_phi": self.cos_big_phi.to_dict(),
                "delta_cos_big_phi": self.delta_cos_big_phi,
                "cos_az": self.cos_az.to_dict(), "sin_az": self.sin_az.to_dict(),
                "delta_cos_az": self.delta_cos_az, "delta_sin_az": self.delta_sin_az,
                "c_b": self.c_b.to_dict()}


class Ensemble:
    """Quantum-equilibrium ensemble of one state under one sampler.

    Accumulations are cached per set of histograms, so asking for several
    averages costs one pass.
    """

    def __init__(self, state: PairStateParams, sampler: GridSpec | LatticeSpec | McSpec, *,
                 threads: int = 1, constants: PhysicalConstants = PhysicalConstants(),
                 backend: str | None = None, grid_errors: bool = True):
        self.state = state
        self.sampler = sampler
        self.threads = threads
        self.constants = constants
        self.backend = backend
        self.grid_errors = grid_errors
        self._cache: dict[tuple, Accumulation] = {}
        self._half: Ensemble | None = None

    @property
    def is_grid(self) -> bool:
        """Deterministic quadrature (product grid or lattice) rather than Monte Carlo."""
        return isinstance(self.sampler, (GridSpec, LatticeSpec))

    def accumulate(self, histograms: Iterable[HistogramSpec] = ()) -> Accumulation:
        key = tuple(histograms)
        if key not in self._cache:
            self._cache[key] = accumulate(self.state, self.sampler, key, threads=self.threads,
                                          constants=self.constants, backend=self.backend)
        return self._cache[key]

    def summary(self) -> Accumulation:
        if self._cache:
            return next(iter(self._cache.values()))
        return self.accumulate()

    def half_resolution(self) -> "Ensemble | None":
        if not (self.is_grid and self.grid_errors):
            return None
        if self._half is None:
            self._half = Ensemble(self.state, self.sampler.halved(), threads=self.threads,
                                  constants=self.constants, backend=self.backend,
                                  grid_errors=False)
        return self._half

    def stream(self) -> Iterable[SampleBatch]:
        if isinstance(self.sampler, GridSpec):
            return grid_stream(self.sampler, self.state)
        if isinstance(self.sampler, LatticeSpec):
            return lattice_stream(self.sampler, self.state)
        return mc_stream(self.state, self.sampler, threads=self.threads)

    # -- moments ---------------------------------------------------------------

    def _chunk_means(self, cols: list[int]):
        acc = self.summary()
        w = acc.totals[:, 0]
        total = float(pairwise_sum(w))
        if not total > 0:
            raise EmptyEnsemble("no sample with positive weight")
        sums = pairwise_sum(acc.sums[:, cols])
        return acc, w, total, sums / total

    def means(self, names: list[str]) -> np.ndarray:
        cols = [feature_index(n) for n in names]
        return self._chunk_means(cols)[3]

    def second_moments(self, names: list[str]) -> np.ndarray:
        cols = [feature_index(n) for n in names]
        acc = self.summary()
        total = float(pairwise_sum(acc.totals[:, 0]))
        if not total > 0:
            raise EmptyEnsemble("no sample with positive weight")
        return pairwise_sum(acc.sums2[:, cols]) / total

    def n_effective(self) -> float:
        acc = self.summary()
        w, w2 = pairwise_sum(acc.totals[:, 0]), pairwise_sum(acc.totals[:, 1])
        return float(w * w / w2) if w2 > 0 else 0.0

    def errors(self, names: list[str], values: np.ndarray | None = None) -> np.ndarray:
        """Standard errors of the ensemble means of ``names``."""
        if values is None:
            values = self.means(names)
        half = self.half_resolution()
        if half is not None:
            return np.abs(values - half.means(names))
        if self.is_grid:
            return np.zeros(len(names))
        acc = self.summary()
        cols = [feature_index(n) for n in names]
        return batch_means_error(acc.totals[:, 0], acc.sums[:, cols], values)

    def linear_combination(self, names: list[str], coeffs) -> EstimatorResult:
        """``sum_k c_k <f_k>`` with the error of the combination itself, which
        keeps correlations between the terms."""
        coeffs = np.asarray(coeffs, dtype=float)
        value = float(self.means(names) @ coeffs)
        half = self.half_resolution()
        if half is not None:
            err = abs(value - float(half.means(names) @ coeffs))
        elif self.is_grid:
            err = 0.0
        else:
            acc = self.summary()
            cols = [feature_index(n) for n in names]
            chunk = (acc.sums[:, cols] @ coeffs)[:, None]
            err = float(batch_means_error(acc.totals[:, 0], chunk, np.array([value]))[0])
        return EstimatorResult(value, err, self.n_effective())

    def average(self, name: str) -> EstimatorResult:
        v = self.means([name])
        e = self.errors([name], v)
        return EstimatorResult(float(v[0]), float(e[0]), self.n_effective())


def batch_means_error(chunk_weight: np.ndarray, chunk_sums: np.ndarray, mean: np.ndarray):
    """Standard error of a ratio estimator from per-chunk weighted sums."""
    k = len(chunk_weight)
    if k < 2:
        return np.full(np.shape(mean), np.nan)
    wbar = chunk_weight.mean()
    resid = chunk_sums - chunk_weight[:, None] * np.asarray(mean)[None, :]
    var = (resid**2).sum(axis=0) / (k * (k - 1) * wbar**2)
    return np.sqrt(var)


def _as_ensemble(samples):
    if isinstance(samples, Ensemble):
        return samples
    return None


def _stream_features(samples, observable: Callable):
    """Evaluate a callable on an explicit stream; returns (values, weights)."""
    vals, ws = [], []
    for batch in samples:
        if len(batch) == 0:
            continue
        vals.append(np.asarray(observable(batch.angles()), dtype=float))
        ws.append(np.asarray(batch.weight, dtype=float))
    if not ws:
        raise EmptyEnsemble("empty sample stream")
    return vals, ws


def estimate_density(samples, observable: str | Callable, hist: HistogramSpec) -> Histogram1D:
    """Weighted histogram of ``observable`` normalized to a density.

    ``samples`` is an :class:`Ensemble` (named observables) or an iterable of
    :class:`SampleBatch` (callables taking an ``(n, 6)`` angle array).
    """
    ens = _as_ensemble(samples)
    if ens is not None and isinstance(observable, str):
        spec = HistogramSpec(observable, hist.mu_min, hist.mu_max, hist.bin_width)
        acc = ens.accumulate([spec])
        total = float(pairwise_sum(acc.totals[:, 0]))
        if not total > 0:
            raise EmptyEnsemble("no sample with positive weight")
        nb = spec.n_bins
        counts = pairwise_sum(acc.hist_w[:, 0, :nb])
        counts_sq = pairwise_sum(acc.hist_w2[:, 0, :nb])
        clip = pairwise_sum(acc.hist_clip[:, 0, :])
        return Histogram1D(spec.mu_min, spec.mu_min + nb * spec.bin_width, spec.bin_width,
                           counts, counts_sq, total, float(clip[0]), float(clip[1]),
                           observable=observable)
    if ens is not None:
        samples = ens.stream()
    if isinstance(observable, str):
        raise TypeError("named observables need an Ensemble; pass a callable for raw streams")
    nb = hist.n_bins
    edges_lo, width = hist.mu_min, hist.bin_width
    counts = np.zeros(nb)
    counts_sq = np.zeros(nb)
    below = above = total = 0.0
    vals, ws = _stream_features(samples, observable)
    for v, w in zip(vals, ws):
        x = np.floor((v - edges_lo) / width)
        lo_mask, hi_mask = x < 0, x >= nb
        below += w[lo_mask].sum()
        above += w[hi_mask].sum()
        inside = ~(lo_mask | hi_mask)
        idx = x[inside].astype(np.int64)
        counts += np.bincount(idx, weights=w[inside], minlength=nb)
        counts_sq += np.bincount(idx, weights=w[inside] ** 2, minlength=nb)
        total += w.sum()
    if not total > 0:
        raise EmptyEnsemble("no sample with positive weight")
    return Histogram1D(edges_lo, edges_lo + nb * width, width, counts, counts_sq, total,
                       below, above, observable=getattr(observable, "__name__", ""))


def estimate_average(samples, observable: str | Callable) -> EstimatorResult:
    """Weighted mean of ``observable`` with its standard error."""
    ens = _as_ensemble(samples)
    if ens is not None and isinstance(observable, str):
        return ens.average(observable)
    if ens is not None:
        samples = ens.stream()
    vals, ws = _stream_features(samples, observable)
    chunk_w = np.array([w.sum() for w in ws])
    chunk_s = np.array([[w @ v] for v, w in zip(vals, ws)])
    total = float(pairwise_sum(chunk_w))
    if not total > 0:
        raise EmptyEnsemble("no sample with positive weight")
    mean = float(pairwise_sum(chunk_s)[0] / total)
    err = batch_means_error(chunk_w, chunk_s, np.array([mean]))[0]
    # Kish effective size on max-normalized weights, safe against underflow of w^2
    top = max(float(w.max()) for w in ws)
    n_eff = (total / top) ** 2 / sum(float(((w / top) ** 2).sum()) for w in ws)
    return EstimatorResult(mean, float(err) if np.isfinite(err) else 0.0, n_eff)


def _extract(values, errors, cos_phi, sin_phi, scale, x_name, y_name):
    """Scale * element / cos(phi), or the yx element over sin(phi) when cos(phi)
    is the smaller of the two."""
    if abs(cos_phi) < 1e-12 and abs(sin_phi) < 1e-12:
        raise IllConditionedExtraction("cos(phi) and sin(phi) both vanish")
    if abs(cos_phi) >= abs(sin_phi):
        v, e, d = values[x_name], errors[x_name], cos_phi
    else:
        v, e, d = values[y_name], errors[y_name], sin_phi
    return scale * v / d, abs(scale * e / d)


def correlation_tensor(samples: Ensemble) -> CorrelationTensor:
    """Raw and normalized correlation tensors with the scalars B_x, B_z and C_M."""
    raw_names = [f"t_{i}{j}" for i in AXES for j in AXES]
    norm_names = [f"n_{i}{j}" for i in AXES for j in AXES]
    names = raw_names + norm_names
    vals = samples.means(names)
    errs = samples.errors(names, vals)
    v = dict(zip(names, vals))
    e = dict(zip(names, errs))
    phi = samples.state.phi
    cp, sp = math.cos(phi), math.sin(phi)
    n_eff = samples.n_effective()
    bx, bx_e = _extract(v, e, cp, sp, 3.0, "n_xx", "n_yx")
    cm, cm_e = _extract(v, e, cp, sp, 6.0, "t_xx", "t_yx")
    return CorrelationTensor(
        raw=vals[:9].reshape(3, 3), raw_error=errs[:9].reshape(3, 3),
        normalized=vals[9:].reshape(3, 3), normalized_error=errs[9:].reshape(3, 3),
        b_x=EstimatorResult(bx, bx_e, n_eff),
        b_z=EstimatorResult(-3.0 * v["n_zz"], 3.0 * e["n_zz"], n_eff),
        c_m=EstimatorResult(cm, cm_e, n_eff),
    )


def angle_statistics(samples: Ensemble) -> AngleStatistics:
    names = ["cos_big_phi", "cos_az", "sin_az"]
    vals = samples.means(names)
    errs = samples.errors(names, vals)
    second = samples.second_moments(names)
    spread = np.sqrt(np.maximum(0.0, second - vals**2))
    n_eff = samples.n_effective()
    cp, sp = math.cos(samples.state.phi), math.sin(samples.state.phi)
    c_b = vals[1] * cp + vals[2] * sp
    c_b_err = math.hypot(errs[1] * cp, errs[2] * sp)
    res = [EstimatorResult(float(x), float(y), n_eff) for x, y in zip(vals, errs)]
    return AngleStatistics(
        cos_big_phi=res[0], delta_cos_big_phi=float(spread[0]),
        cos_az=res[1], sin_az=res[2],
        delta_cos_az=float(spread[1]), delta_sin_az=float(spread[2]),
        c_b=EstimatorResult(float(c_b), c_b_err, n_eff),
    )


def feature_stream(samples: Ensemble):
    """Yield ``(features, weights)`` per batch of the ensemble's stream."""
    for batch in samples.stream():
        f, _ = evaluate_features(samples.state, batch, samples.constants, samples.backend)
        ok = np.isfinite(f[:, 0])
        yield f[ok], batch.weight[ok]
