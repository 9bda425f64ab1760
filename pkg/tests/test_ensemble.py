import math

import numpy as np
import pytest

from bohmpair.ensemble import (
    Ensemble,
    GridSpec,
    HistogramSpec,
    LatticeSpec,
    McSpec,
    angle_statistics,
    correlation_tensor,
    estimate_average,
    estimate_density,
)
from bohmpair.ensemble.engine import accumulate, accumulate_batches
from bohmpair.ensemble.kernels import BACKENDS
from bohmpair.ensemble.reduction import pairwise_sum
from bohmpair.ensemble.sampling import (
    grid_stream,
    korobov_generator,
    lattice_stream,
    mc_stream,
)
from bohmpair.errors import EmptyEnsemble
from bohmpair.momenta import momentum_pair
from bohmpair.rotor import PairStateParams

PI = math.pi
HIST = (HistogramSpec("m1z", -5, 5, 1e-2), HistogramSpec("t_zz", -5, 5, 1e-2))
needs_cython = pytest.mark.skipif("cython" not in BACKENDS, reason="compiled kernels not built")


def _close(x, y, rtol=1e-11):
    # entries that cancel to zero carry rounding noise of the largest entry's size
    np.testing.assert_allclose(x, y, rtol=rtol, atol=rtol * np.abs(x).max())


def _same(a, b, rtol=1e-11):
    _close(pairwise_sum(a.sums), pairwise_sum(b.sums), rtol)
    np.testing.assert_allclose(pairwise_sum(a.totals), pairwise_sum(b.totals), rtol=rtol)
    # a value on a bin edge may round either way; allow a sliver of weight to move
    ha, hb = pairwise_sum(a.hist_w), pairwise_sum(b.hist_w)
    assert np.abs(ha - hb).sum() <= 1e-9 * ha.sum()


@needs_cython
@pytest.mark.parametrize("spec", [GridSpec.cube(8), LatticeSpec(n_points=20_000, chunk_size=4096),
                                  McSpec(5000, seed=3)], ids=["grid", "lattice", "mc"])
def test_backends_agree(spec):
    st = PairStateParams(1.0, 0.4)
    a = accumulate(st, spec, HIST, backend="python")
    b = accumulate(st, spec, HIST, backend="cython")
    _same(a, b)


@needs_cython
@pytest.mark.parametrize("spec", [GridSpec.cube(8), LatticeSpec(n_points=20_000, chunk_size=4096),
                                  McSpec(5000, seed=3)], ids=["grid", "lattice", "mc"])
def test_threads_bitwise_identical(spec):
    st = PairStateParams(PI / 2, PI)
    a = accumulate(st, spec, HIST, threads=1, backend="cython")
    b = accumulate(st, spec, HIST, threads=3, backend="cython")
    for name in ("sums", "sums2", "totals", "hist_w", "hist_w2", "hist_clip", "monitors"):
        assert np.array_equal(getattr(a, name), getattr(b, name)), name


def test_streams_match_kernels():
    # the Python streams and the fused kernels visit the same weighted points
    st = PairStateParams(0.7, 1.2)
    for spec, stream in ((GridSpec.cube(6), grid_stream), (LatticeSpec(n_points=5000, chunk_size=1024),
                                                          lattice_stream)):
        acc = accumulate(st, spec, HIST)
        via = accumulate_batches(st, stream(spec, st), HIST)
        _close(pairwise_sum(acc.sums), pairwise_sum(via.sums))


def test_mc_stream_independent_of_threads():
    st = PairStateParams(1.0)
    spec = McSpec(20_000, seed=9, block_size=4096, chunk_size=4096)
    a = np.concatenate([b.beta1 for b in mc_stream(st, spec, threads=1)])
    b = np.concatenate([b.beta1 for b in mc_stream(st, spec, threads=3)])
    assert np.array_equal(a, b)
    assert len(a) == spec.n_samples


def test_lattice_projections_are_midpoint_rules():
    spec = LatticeSpec(n_points=4096, chunk_size=4096)
    batch = next(lattice_stream(spec, PairStateParams(0.0, 0.0)))
    # all weight survives at theta=0 except exact nodes; use the raw coordinates
    n = spec.n_points
    idx = np.arange(n, dtype=np.uint64)
    for zd in spec.z:
        u = np.sort(((idx * np.uint64(zd)) % np.uint64(n) + 0.5) / n)
        assert np.allclose(u, (np.arange(n) + 0.5) / n)
    assert len(batch) <= n


def test_korobov_generator_cached_and_coprime():
    z = korobov_generator(4096)
    assert z[0] == 1
    assert math.gcd(z[1], 4096) == 1
    assert korobov_generator(4096) is z


def test_product_state_correlators():
    # independent-rotor oracle: <1/|M|> = 8/5 per rotor, so Bz = 3 (8/5)^2 / 4 = 48/25
    ens = Ensemble(PairStateParams(0.0), GridSpec.cube(32), threads=1)
    t = correlation_tensor(ens)
    assert abs(t.b_x.value) < 1e-12
    assert t.b_z.value == pytest.approx(48 / 25, abs=3e-3)
    assert angle_statistics(ens).cos_big_phi.value == pytest.approx(-16 / 25, abs=2e-3)


def test_mc_marginal_product_state():
    # acceptance draws alpha1 with density ~ cos^2(a/2) sin a, so <cos a1> = 1/3... of u = cos a:
    # p(u) = (1 + u)/2 on [-1, 1] gives <u> = 1/3
    ens = Ensemble(PairStateParams(0.0), McSpec(200_000, seed=1), threads=1)
    r = estimate_average(ens, lambda ang: np.cos(ang[:, 0]))
    assert abs(r.value - 1 / 3) <= 3 * r.std_error


def test_density_normalization_and_clipping():
    ens = Ensemble(PairStateParams(PI / 2), GridSpec.cube(12), threads=1, grid_errors=False)
    h = estimate_density(ens, "m1_len_sq", HistogramSpec("m1_len_sq", 0.0, 2.0, 1e-2))
    assert h.density.sum() * h.bin_width + h.clipped_fraction == pytest.approx(1.0, abs=1e-12)
    assert h.clipped_below == 0.0
    with pytest.raises(TypeError):
        estimate_density(ens.stream(), "m1z", HistogramSpec("m1z", -1, 1, 0.1))


def test_callable_matches_named():
    ens = Ensemble(PairStateParams(1.2, 0.3), GridSpec.cube(8), threads=1, grid_errors=False)
    spec = HistogramSpec("m1z", -3, 3, 0.05)
    from bohmpair.momenta import momentum_pair

    def m1z(ang):
        return momentum_pair(ens.state, ang).m1[:, 2]

    a = estimate_density(ens, "m1z", spec)
    b = estimate_density(ens, m1z, spec)
    assert np.abs(a.density - b.density).max() < 1e-9
    assert estimate_average(ens, m1z).value == pytest.approx(ens.average("m1z").value, abs=1e-12)


def test_empty_stream():
    with pytest.raises(EmptyEnsemble):
        estimate_average(iter(()), lambda a: a[:, 0])


def test_grid_error_bars_shrink():
    st = PairStateParams(PI / 3)
    e8 = Ensemble(st, GridSpec.cube(8), threads=1).average("m1z")
    e16 = Ensemble(st, GridSpec.cube(16), threads=1).average("m1z")
    assert e16.std_error < e8.std_error
    assert abs(e16.value - 0.5 * math.cos(st.theta)) < 3 * e16.std_error


def test_summary_monitors():
    ens = Ensemble(PairStateParams(PI / 2, 0.0), GridSpec.cube(8), threads=1)
    mon = ens.summary().monitor_summary()
    assert mon["mz_sum_residual"] <= 1e-12
    assert mon["min_len"] >= 0.5 - 1e-12
    assert mon["len_diff_abs"] <= 1e-12


@pytest.mark.parametrize("theta", [PI / 6, PI / 3])
def test_length_law_at_intermediate_theta(theta):
    # the |M|^2 law is stated for the endpoints only; probe it in between:
    # P(|M|^2 > mu) = 1/(16 mu^2)
    ens = Ensemble(PairStateParams(theta, 0.4), LatticeSpec(n_points=24**4, chunk_size=1 << 16),
                   threads=1, grid_errors=False)
    for mu in (0.5, 1.0):
        tail = estimate_average(ens, lambda ang, mu=mu: (
            np.sum(momentum_pair(ens.state, ang).m1 ** 2, axis=1) > mu).astype(float))
        assert tail.value == pytest.approx(1 / (16 * mu * mu), abs=5e-3)
