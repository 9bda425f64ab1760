"""Drive a kernel pass over a sampler and reduce the per-chunk partials."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..rotor import NODE_THRESHOLD, POLE_THRESHOLD, PairStateParams, PhysicalConstants
from .features import MON_MIN_LEN, MONITORS, N_FEATURES, feature_index
from .kernels import default_backend_name, get_backend
from .reduction import pairwise_sum
from .sampling import GridSpec, LatticeSpec, McSpec, SampleBatch, mc_stream


@dataclass(frozen=True)
class HistogramSpec:
    """Binning of one observable: half-open bins ``[lo + k w, lo + (k+1) w)``."""

    observable: str
    mu_min: float
    mu_max: float
    bin_width: float = 1e-3

    def __post_init__(self):
        if not self.mu_max > self.mu_min:
            raise ValueError("mu_max must exceed mu_min")
        if not self.bin_width > 0:
            raise ValueError("bin_width must be positive")
        feature_index(self.observable)

    @property
    def n_bins(self) -> int:
        return int(round((self.mu_max - self.mu_min) / self.bin_width))


def wave_params(state: PairStateParams, constants: PhysicalConstants) -> tuple:
    from ..rotor import SPINOR_NORM

    return (state.cos_half, state.sin_half, math.cos(state.phi), math.sin(state.phi),
            constants.energy, constants.inertia, NODE_THRESHOLD, POLE_THRESHOLD,
            SPINOR_NORM**4)


@dataclass
class Accumulation:
    """Per-chunk partial sums of one pass, plus their fixed-order reduction."""

    histograms: tuple[HistogramSpec, ...]
    totals: np.ndarray      # (chunks, 4): weight, weight^2, points, excluded
    sums: np.ndarray        # (chunks, N_FEATURES) of sum w f
    sums2: np.ndarray       # (chunks, N_FEATURES) of sum w f^2
    hist_w: np.ndarray      # (chunks, n_hist, max_bins)
    hist_w2: np.ndarray
    hist_clip: np.ndarray   # (chunks, n_hist, 2): below, above
    monitors: np.ndarray    # (chunks, len(MONITORS))
    meta: dict = field(default_factory=dict)

    @property
    def n_chunks(self) -> int:
        return self.totals.shape[0]

    def reduced(self, name: str) -> np.ndarray:
        return pairwise_sum(getattr(self, name))

    def monitor_summary(self) -> dict[str, float]:
        out = {}
        for k, name in enumerate(MONITORS):
            col = self.monitors[:, k]
            out[name] = float(col.min() if k == MON_MIN_LEN else col.max())
        return out


def _allocate(n_chunks: int, histograms) -> dict:
    nh = len(histograms)
    max_bins = max([h.n_bins for h in histograms], default=1)
    mon = np.zeros((n_chunks, len(MONITORS)))
    mon[:, MON_MIN_LEN] = np.inf
    return dict(
        totals=np.zeros((n_chunks, 4)),
        sums=np.zeros((n_chunks, N_FEATURES)),
        sums2=np.zeros((n_chunks, N_FEATURES)),
        hist_w=np.zeros((n_chunks, nh, max_bins)),
        hist_w2=np.zeros((n_chunks, nh, max_bins)),
        hist_clip=np.zeros((n_chunks, nh, 2)),
        monitors=mon,
    )


def _hist_args(histograms):
    return (np.array([feature_index(h.observable) for h in histograms], dtype=np.int64),
            np.array([h.mu_min for h in histograms], dtype=float),
            np.array([h.bin_width for h in histograms], dtype=float),
            np.array([h.n_bins for h in histograms], dtype=np.int64))


def accumulate_grid(state: PairStateParams, spec: GridSpec, histograms=(), *,
                    threads: int = 1, constants: PhysicalConstants = PhysicalConstants(),
                    backend: str | None = None, rows: range | None = None) -> Accumulation:
    """Midpoint-grid pass. ``rows`` restricts to a range of cos(alpha1) rows,
    which is how an interrupted run is resumed chunk by chunk."""
    histograms = tuple(histograms)
    ca1v, b1v, ca2v, b2v = spec.axes()
    if rows is not None:
        ca1v = ca1v[rows.start:rows.stop]
    arrays = _allocate(len(ca1v), histograms)
    impl = get_backend(backend)
    impl.grid_pass(np.ascontiguousarray(ca1v), b1v, ca2v, b2v,
                   wave_params(state, constants), *_hist_args(histograms),
                   arrays["hist_w"], arrays["hist_w2"], arrays["hist_clip"],
                   arrays["sums"], arrays["sums2"], arrays["totals"], arrays["monitors"],
                   threads=int(threads))
    meta = {"sampler": spec.to_dict(), "backend": backend or default_backend_name()}
    return Accumulation(histograms, meta=meta, **arrays)


def accumulate_lattice(state: PairStateParams, spec: LatticeSpec, histograms=(), *,
                       threads: int = 1, constants: PhysicalConstants = PhysicalConstants(),
                       backend: str | None = None) -> Accumulation:
    histograms = tuple(histograms)
    arrays = _allocate(spec.n_chunks, histograms)
    impl = get_backend(backend)
    impl.lattice_pass(int(spec.n_points), np.array(spec.z, dtype=np.int64),
                      int(spec.chunk_size), wave_params(state, constants),
                      *_hist_args(histograms),
                      arrays["hist_w"], arrays["hist_w2"], arrays["hist_clip"],
                      arrays["sums"], arrays["sums2"], arrays["totals"], arrays["monitors"],
                      threads=int(threads))
    meta = {"sampler": spec.to_dict(), "backend": backend or default_backend_name()}
    return Accumulation(histograms, meta=meta, **arrays)


def accumulate(state: PairStateParams, spec, histograms=(), **kw) -> Accumulation:
    """Dispatch on the sampler type."""
    if isinstance(spec, GridSpec):
        return accumulate_grid(state, spec, histograms, **kw)
    if isinstance(spec, LatticeSpec):
        return accumulate_lattice(state, spec, histograms, **kw)
    if isinstance(spec, McSpec):
        return accumulate_mc(state, spec, histograms, **kw)
    raise TypeError(f"unknown sampler {spec!r}")


def accumulate_batches(state: PairStateParams, batches, histograms=(), *,
                       threads: int = 1, constants: PhysicalConstants = PhysicalConstants(),
                       backend: str | None = None, meta: dict | None = None) -> Accumulation:
    """Pass over explicit sample batches; every batch becomes one chunk."""
    histograms = tuple(histograms)
    batches = list(batches)
    cols = [np.ascontiguousarray(np.concatenate([getattr(b, name) for b in batches]), dtype=float)
            if batches else np.zeros(0)
            for name in ("cos_alpha1", "beta1", "cos_alpha2", "beta2", "weight")]
    bounds = np.concatenate([[0], np.cumsum([len(b) for b in batches])]).astype(np.int64)
    arrays = _allocate(len(batches), histograms)
    impl = get_backend(backend)
    impl.points_pass(*cols, bounds, wave_params(state, constants), *_hist_args(histograms),
                     arrays["hist_w"], arrays["hist_w2"], arrays["hist_clip"],
                     arrays["sums"], arrays["sums2"], arrays["totals"], arrays["monitors"],
                     threads=int(threads))
    meta = dict(meta or {}, backend=backend or default_backend_name())
    return Accumulation(histograms, meta=meta, **arrays)


def accumulate_mc(state: PairStateParams, spec: McSpec, histograms=(), *,
                  threads: int = 1, constants: PhysicalConstants = PhysicalConstants(),
                  backend: str | None = None) -> Accumulation:
    return accumulate_batches(state, mc_stream(state, spec, threads=threads), histograms,
                              threads=threads, constants=constants, backend=backend,
                              meta={"sampler": spec.to_dict()})


def evaluate_features(state: PairStateParams, batch: SampleBatch,
                      constants: PhysicalConstants = PhysicalConstants(),
                      backend: str | None = None):
    """Feature matrix ``(n, N_FEATURES)`` and R^2 for each sample of ``batch``."""
    impl = get_backend(backend)
    return impl.evaluate_points(*(np.ascontiguousarray(x, dtype=float) for x in (
        batch.cos_alpha1, batch.beta1, batch.cos_alpha2, batch.beta2)),
        wave_params(state, constants))
