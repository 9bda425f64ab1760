"""Quantum-equilibrium samplers over the gamma-reduced configuration space.

All samplers fix ``gamma1 = gamma2 = 0``: R^2 does not depend on the gammas and
their phase partials are the constant -1/2, so no observable changes.

The grid sampler places midpoints uniformly in ``(cos a1, b1, cos a2, b2)`` and
weights each point with R^2; the lattice sampler does the same on a rank-1
lattice. The Monte Carlo sampler draws the same four
coordinates uniformly and accepts against the bound
``|psi|^2 <= (cos(t/2) + sin(t/2))^2 / (8 pi^2)^2``, emitting unit weights.
"""

from __future__ import annotations

import functools
import math
from collections.abc import Iterator
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from ..errors import EnvelopeViolation
from ..rotor import NODE_THRESHOLD, SPINOR_NORM, PairConfiguration, PairStateParams

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class GridSpec:
    n_cos_alpha1: int = 128
    n_beta1: int = 128
    n_cos_alpha2: int = 128
    n_beta2: int = 128

    def __post_init__(self):
        for n in self.shape:
            if int(n) != n or n < 2:
                raise ValueError("grid counts must be integers >= 2")

    @classmethod
    def cube(cls, n: int) -> "GridSpec":
        return cls(n, n, n, n)

    @property
    def shape(self) -> tuple[int, int, int, int]:
        return (self.n_cos_alpha1, self.n_beta1, self.n_cos_alpha2, self.n_beta2)

    @property
    def size(self) -> int:
        return math.prod(self.shape)

    @property
    def cell_volume(self) -> float:
        return (2.0 / self.n_cos_alpha1) * (TWO_PI / self.n_beta1) * (
            2.0 / self.n_cos_alpha2) * (TWO_PI / self.n_beta2)

    def halved(self) -> "GridSpec":
        return GridSpec(*(max(2, n // 2) for n in self.shape))

    def axes(self) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """Cell centres: cos(alpha) in (-1, 1) and beta in (0, 2 pi)."""
        def cos_axis(n):
            return -1.0 + (np.arange(n) + 0.5) * (2.0 / n)

        def beta_axis(n):
            return (np.arange(n) + 0.5) * (TWO_PI / n)

        return (cos_axis(self.n_cos_alpha1), beta_axis(self.n_beta1),
                cos_axis(self.n_cos_alpha2), beta_axis(self.n_beta2))

    def to_dict(self) -> dict:
        return {"sampler": "grid", "shape": list(self.shape)}


def _dual_shortest(n: int, g: int) -> float:
    """Length of the shortest nonzero ``h`` with ``h1 + g h2 = 0 (mod n)``."""
    u, v = (n, 0), (-g, 1)

    def norm2(x):
        return x[0] * x[0] + x[1] * x[1]

    while True:
        if norm2(u) < norm2(v):
            u, v = v, u
        m = round((u[0] * v[0] + u[1] * v[1]) / norm2(v))
        if m == 0:
            break
        u = (u[0] - m * v[0], u[1] - m * v[1])
        if norm2(u) >= norm2(v):
            break
    return math.sqrt(min(norm2(u), norm2(v)))


@functools.lru_cache(maxsize=32)
def korobov_generator(n_points: int, candidates: int = 4096) -> tuple[int, int, int, int]:
    """Generating vector ``(1, a, a^2, a^3) mod N`` maximizing the worst 2-D
    projection spacing over a fixed pseudo-random candidate set."""
    rng = np.random.default_rng(20240607)
    best, best_z = -1.0, None
    for a in rng.integers(2, n_points, candidates):
        z = (1, int(a) % n_points, int(a) ** 2 % n_points, int(a) ** 3 % n_points)
        if any(math.gcd(x, n_points) != 1 for x in z):
            continue
        score = min(_dual_shortest(n_points, z[j] * pow(z[i], -1, n_points) % n_points)
                    for i in range(4) for j in range(i + 1, 4))
        if score > best:
            best, best_z = score, z
    if best_z is None:
        raise ValueError(f"no admissible generator for N={n_points}")
    return best_z


@dataclass(frozen=True)
class LatticeSpec:
    """Rank-1 lattice with ``n_points`` nodes, weighted by R^2 like the grid.

    Every one-dimensional projection is the ``n_points``-point midpoint rule,
    and single-rotor projections have ``n_points`` distinct nodes instead of
    the ``n^2`` of a product grid, so fine histograms do not alias.
    """

    n_points: int = 128**4
    generator: tuple[int, int, int, int] | None = None
    chunk_size: int = 1 << 20

    def __post_init__(self):
        if self.n_points < 16:
            raise ValueError("n_points must be >= 16")
        if self.n_points >= 2**32:
            raise ValueError("n_points must be below 2^32")
        if self.generator is not None:
            if len(self.generator) != 4 or any(math.gcd(int(x), self.n_points) != 1
                                               for x in self.generator):
                raise ValueError("generator needs four entries coprime to n_points")

    @classmethod
    def cube(cls, n: int, **kw) -> "LatticeSpec":
        return cls(n**4, **kw)

    @property
    def z(self) -> tuple[int, int, int, int]:
        return self.generator if self.generator is not None else korobov_generator(self.n_points)

    @property
    def n_chunks(self) -> int:
        return -(-self.n_points // self.chunk_size)

    def halved(self) -> "LatticeSpec":
        return LatticeSpec(max(16, self.n_points // 16), chunk_size=self.chunk_size)

    def to_dict(self) -> dict:
        return {"sampler": "lattice", "n_points": self.n_points, "generator": list(self.z),
                "chunk_size": self.chunk_size}


@dataclass(frozen=True)
class McSpec:
    n_samples: int
    seed: int = 0
    envelope_safety: float = 1.1
    block_size: int = 1 << 16
    chunk_size: int = 1 << 16

    def __post_init__(self):
        if self.n_samples < 1:
            raise ValueError("n_samples must be >= 1")
        if not self.envelope_safety > 1.0:
            raise ValueError("envelope_safety must exceed 1")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")

    @property
    def n_chunks(self) -> int:
        return -(-self.n_samples // self.chunk_size)

    def to_dict(self) -> dict:
        return {"sampler": "mc", "n_samples": self.n_samples, "seed": self.seed,
                "envelope_safety": self.envelope_safety,
                "block_size": self.block_size, "chunk_size": self.chunk_size}


@dataclass(frozen=True)
class WeightedSample:
    cfg: PairConfiguration
    weight: float


@dataclass
class SampleBatch:
    """Columns of configurations with gamma = 0, stored as cos(alpha) and beta."""

    cos_alpha1: np.ndarray
    beta1: np.ndarray
    cos_alpha2: np.ndarray
    beta2: np.ndarray
    weight: np.ndarray

    def __len__(self) -> int:
        return len(self.weight)

    def angles(self) -> np.ndarray:
        """``(n, 6)`` Euler angles ``(a1, b1, g1, a2, b2, g2)``."""
        zero = np.zeros_like(self.beta1)
        return np.column_stack([np.arccos(self.cos_alpha1), self.beta1, zero,
                                np.arccos(self.cos_alpha2), self.beta2, zero])

    def __iter__(self) -> Iterator[WeightedSample]:
        for row, w in zip(self.angles(), self.weight):
            yield WeightedSample(PairConfiguration.from_angles(*row), float(w))


def density_cos(state: PairStateParams, ca1, b1, ca2, b2):
    """R^2 in terms of cos(alpha); avoids the arccos round trip."""
    c, s = state.cos_half, state.sin_half
    hc1, hs1 = np.sqrt(0.5 * (1 + ca1)), np.sqrt(0.5 * (1 - ca1))
    hc2, hs2 = np.sqrt(0.5 * (1 + ca2)), np.sqrt(0.5 * (1 - ca2))
    a = c * hc1 * hs2
    b = s * hs1 * hc2
    # |a e^{i d} + b e^{i(phi - d)}|^2 with d = (b2 - b1)/2
    return SPINOR_NORM**4 * (a * a + b * b + 2 * a * b * np.cos(state.phi - (b2 - b1)))


def grid_stream(spec: GridSpec, state: PairStateParams, start: int = 0) -> Iterator[SampleBatch]:
    """One batch per cos(alpha1) row, in index order, beginning at row ``start``.

    Weights are R^2; nodes and poles are not emitted (midpoints never reach
    a pole, and zero-weight nodes are dropped).
    """
    ca1v, b1v, ca2v, b2v = spec.axes()
    j, k, l = np.meshgrid(np.arange(len(b1v)), np.arange(len(ca2v)), np.arange(len(b2v)),
                          indexing="ij")
    b1, ca2, b2 = b1v[j.ravel()], ca2v[k.ravel()], b2v[l.ravel()]
    for i in range(start, len(ca1v)):
        ca1 = np.full(b1.shape, ca1v[i])
        w = density_cos(state, ca1, b1, ca2, b2)
        keep = w > NODE_THRESHOLD
        yield SampleBatch(ca1[keep], b1[keep], ca2[keep], b2[keep], w[keep])


def lattice_stream(spec: LatticeSpec, state: PairStateParams,
                   start: int = 0) -> Iterator[SampleBatch]:
    """One batch per lattice chunk, R^2-weighted, nodes dropped."""
    n = np.uint64(spec.n_points)
    z = [np.uint64(x) for x in spec.z]
    for c in range(start, spec.n_chunks):
        idx = np.arange(c * spec.chunk_size, min(spec.n_points, (c + 1) * spec.chunk_size),
                        dtype=np.uint64)
        u = [((idx * zd) % n + 0.5) / spec.n_points for zd in z]
        ca1, b1, ca2, b2 = 2 * u[0] - 1, TWO_PI * u[1], 2 * u[2] - 1, TWO_PI * u[3]
        w = density_cos(state, ca1, b1, ca2, b2)
        keep = w > NODE_THRESHOLD
        yield SampleBatch(ca1[keep], b1[keep], ca2[keep], b2[keep], w[keep])


def envelope(state: PairStateParams, safety: float) -> float:
    return SPINOR_NORM**4 * (state.cos_half + state.sin_half) ** 2 * safety


def _mc_block(state: PairStateParams, spec: McSpec, index: int):
    rng = np.random.default_rng(np.random.SeedSequence(spec.seed, spawn_key=(index,)))
    u = rng.random((5, spec.block_size))
    ca1 = 2.0 * u[0] - 1.0
    b1 = TWO_PI * u[1]
    ca2 = 2.0 * u[2] - 1.0
    b2 = TWO_PI * u[3]
    r2 = density_cos(state, ca1, b1, ca2, b2)
    env = envelope(state, spec.envelope_safety)
    if np.any(r2 > env):
        raise EnvelopeViolation(f"proposal density {r2.max():.3e} exceeds envelope {env:.3e}")
    acc = u[4] * env < r2
    return ca1[acc], b1[acc], ca2[acc], b2[acc]


def mc_stream(state: PairStateParams, spec: McSpec, threads: int = 1,
              start: int = 0) -> Iterator[SampleBatch]:
    """Unit-weight rejection samples of R^2, in chunks of ``spec.chunk_size``.

    Proposal block ``k`` draws from its own ``SeedSequence(seed, spawn_key=(k,))``
    and accepted samples are concatenated in block order, so the stream does
    not depend on ``threads``. ``start`` skips that many leading chunks.
    """
    threads = max(1, int(threads))
    buffers: list[tuple] = []
    buffered = 0
    emitted = 0
    next_block = 0
    chunk = 0
    with ThreadPoolExecutor(max_workers=threads) as pool:
        while emitted < spec.n_samples:
            want = min(spec.chunk_size, spec.n_samples - emitted)
            while buffered < want:
                wave = range(next_block, next_block + threads)
                for cols in pool.map(lambda k: _mc_block(state, spec, k), wave):
                    buffers.append(cols)
                    buffered += len(cols[0])
                next_block += threads
            cols = [np.concatenate([b[q] for b in buffers]) for q in range(4)]
            out = [c[:want] for c in cols]
            rest = [c[want:] for c in cols]
            buffers = [tuple(rest)]
            buffered = len(rest[0])
            emitted += want
            if chunk >= start:
                yield SampleBatch(*out, np.ones(want))
            chunk += 1
