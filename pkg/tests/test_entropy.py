import math

import numpy as np
import pytest

from bohmpair import entropy
from bohmpair.ensemble import Ensemble, GridSpec, estimate_density
from bohmpair.ensemble.estimators import Histogram1D
from bohmpair.errors import ClippedMassTooLarge, DomainError, EmptyEnsemble, ResolutionError
from bohmpair.rotor import PairStateParams

PI = math.pi


def _hist(density, lo, width, clipped=(0.0, 0.0)):
    counts = np.asarray(density, dtype=float) * width
    total = counts.sum() + sum(clipped)
    return Histogram1D(lo, lo + width * len(counts), width, counts, counts**2, total, *clipped)


def test_binary_entropy():
    assert entropy.binary_entropy(0.5) == 1.0
    assert entropy.binary_entropy(0.0) == 0.0
    assert entropy.binary_entropy(1.0) == 0.0
    assert math.copysign(1.0, entropy.binary_entropy(1.0)) == 1.0
    # cross-checked at 30 digits with mpmath
    assert entropy.binary_entropy(math.cos(PI / 8) ** 2) == pytest.approx(0.600876036692856, abs=1e-14)
    with pytest.raises(DomainError):
        entropy.binary_entropy(1.5)


def test_uniform_interval_one_bit():
    h = _hist(np.full(2000, 0.5), -1.0, 1e-3)
    assert entropy.differential_entropy(h) == pytest.approx(1.0, abs=1e-12)
    assert entropy.hemisphere_probability(h) == pytest.approx(0.5)


def test_discretized_uniform():
    h = _hist(np.full(2048, 0.5), -1.0, 2.0 / 2048)
    # cells centred on multiples of 1/4: 7 full cells of mass 1/8, two ends of 1/16
    assert entropy.discretized_entropy(h, 2) == pytest.approx(3.125, abs=1e-12)
    with pytest.raises(ResolutionError):
        entropy.discretized_entropy(_hist(np.full(4, 0.5), -1.0, 0.5), 2)


def test_coarse_probabilities_sum_to_one():
    rng = np.random.default_rng(0)
    h = _hist(rng.random(1000), -0.5, 1e-3)
    p = entropy.coarse_probabilities(h, 4)
    assert p.sum() == pytest.approx(1.0)


def test_clipping_guard():
    h = _hist(np.full(10, 0.1), 0.0, 1.0, clipped=(0.0, 0.01))
    with pytest.raises(ClippedMassTooLarge):
        entropy.differential_entropy(h)
    assert entropy.hemisphere_probability(h) == pytest.approx(1.0)


def test_empty_histogram():
    h = Histogram1D(0.0, 1.0, 0.5, np.zeros(2), np.zeros(2), 0.0, 0.0, 0.0)
    with pytest.raises(EmptyEnsemble):
        entropy.hemisphere_probability(h)


@pytest.mark.parametrize("theta,want", [(0.0, 0.0), (PI / 2, 1.0), (PI, 0.0)])
def test_entanglement_of_formation(theta, want):
    assert entropy.entanglement_of_formation(PairStateParams(theta)) == want


def _m1z_hist(theta, n=24):
    ens = Ensemble(PairStateParams(theta), GridSpec.cube(n), threads=1, grid_errors=False)
    return estimate_density(ens, "m1z", entropy.centered_spec())


def test_product_state_report():
    rep = entropy.entropy_report(_m1z_hist(0.0), PairStateParams(0.0))
    assert rep.p_plus == 1.0
    assert rep.h_binary_pm == 0.0
    assert all(h == 0.0 for _, h in rep.h_nu)


def test_maxent_report():
    rep = entropy.entropy_report(_m1z_hist(PI / 2), PairStateParams(PI / 2))
    assert rep.p_plus == pytest.approx(0.5, abs=1e-12)
    ratios = [h / n for n, h in rep.h_nu]
    assert ratios == sorted(ratios, reverse=True)


def test_centered_spec_has_zero_bin_centre():
    spec = entropy.centered_spec("m1z", 1e-3, 5.0)
    k = round(-spec.mu_min / spec.bin_width - 0.5)
    assert spec.mu_min + (k + 0.5) * spec.bin_width == pytest.approx(0.0, abs=1e-12)
    assert spec.mu_max >= 5.0


# frozen from a 256^4 grid run (128^4 gives 0.7922054, 64^4 gives 0.7921356)
P_PLUS_THIRD_PI = 0.7921929454


def test_p_plus_regression_anchor():
    hist = _m1z_hist(PI / 3, n=64)
    assert entropy.hemisphere_probability(hist) == pytest.approx(P_PLUS_THIRD_PI, abs=2e-4)
