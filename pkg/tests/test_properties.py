"""Invariants checked on generated inputs."""

import math

import numpy as np
from hypothesis import assume, given
from hypothesis import strategies as st

from bohmpair import entropy, oracles
from bohmpair.ensemble.estimators import Histogram1D, estimate_average
from bohmpair.ensemble.reduction import pairwise_sum
from bohmpair.ensemble.sampling import SampleBatch
from bohmpair.momenta import momentum_pair
from bohmpair.rotor import NODE_THRESHOLD, EulerTriple, PairStateParams, density

PI = math.pi
thetas = st.floats(0.0, PI)
phis = st.floats(0.0, 2 * PI, exclude_max=True)
alphas = st.floats(1e-3, PI - 1e-3)
betas = st.floats(0.0, 2 * PI)
gammas = st.floats(0.0, 4 * PI)
configs = st.tuples(alphas, betas, gammas, alphas, betas, gammas).map(np.array)


def _regular(state, cfg):
    return float(density(state, cfg)) > NODE_THRESHOLD * 1e8


@given(thetas, phis, configs)
def test_pointwise_identities(theta, phi, cfg):
    state = PairStateParams(theta, phi)
    assume(_regular(state, cfg))
    p = momentum_pair(state, cfg)
    scale = max(1.0, np.linalg.norm(p.m1), np.linalg.norm(p.m2))
    assert abs(p.m1[2] + p.m2[2]) <= 1e-10 * scale
    assert np.linalg.norm(p.m1) >= 0.5 - 1e-10 * scale
    for m, a, b in ((p.m1, cfg[0], cfg[1]), (p.m2, cfg[3], cfg[4])):
        e = np.array([math.sin(a) * math.sin(b), math.sin(a) * math.cos(b), math.cos(a)])
        assert abs(e @ m - 0.5) <= 1e-10 * scale


@given(thetas, phis, configs)
def test_phase_shift_equivalence(theta, phi, cfg):
    # a relative phase is a rigid shift of beta2 for rotation-invariant quantities
    s0, s1 = PairStateParams(theta, 0.0), PairStateParams(theta, phi)
    shifted = cfg.copy()
    shifted[4] -= phi
    assume(_regular(s1, cfg))
    assert math.isclose(float(density(s1, cfg)), float(density(s0, shifted)), rel_tol=1e-9)
    a, b = momentum_pair(s1, cfg), momentum_pair(s0, shifted)
    scale = max(1.0, np.linalg.norm(a.m1))
    assert abs(a.m1[2] - b.m1[2]) <= 1e-8 * scale
    assert abs(np.linalg.norm(a.m2) - np.linalg.norm(b.m2)) <= 1e-8 * scale


@given(thetas, phis)
def test_qm_tensor_structure(theta, phi):
    t = oracles.spin_tensor(PairStateParams(theta, phi))
    assert math.isclose(t[0, 1], -t[1, 0], abs_tol=1e-16)
    assert t[0, 0] == t[1, 1]
    assert t[2, 2] == -0.25
    assert np.all(t[2, :2] == 0) and np.all(t[:2, 2] == 0)


@given(st.floats(0.0, 1.0))
def test_binary_entropy_symmetric_and_bounded(p):
    h = entropy.binary_entropy(p)
    assert 0.0 <= h <= 1.0
    assert math.isclose(h, entropy.binary_entropy(1.0 - p), abs_tol=1e-12)


@given(st.lists(st.floats(0.0, 10.0), min_size=1, max_size=300),
       st.floats(1e-3, 1e3), st.integers(0, 2**31))
def test_weight_rescaling_invariance(ws, c, seed):
    w = np.array(ws)
    assume(w.sum() > 0)
    rng = np.random.default_rng(seed)
    x = rng.uniform(-1, 1, len(w))
    zero = np.zeros_like(w)

    def batches(scale):
        return [SampleBatch(x, zero, zero, zero, scale * w)]

    a = estimate_average(batches(1.0), lambda ang: np.cos(ang[:, 0]))
    b = estimate_average(batches(c), lambda ang: np.cos(ang[:, 0]))
    assert math.isclose(a.value, b.value, rel_tol=1e-9, abs_tol=1e-12)


@given(st.lists(st.floats(0.0, 5.0), min_size=64, max_size=512), st.integers(1, 5))
def test_coarsening_conserves_mass(dens, nu):
    d = np.array(dens)
    width = 2.0 ** -8
    assume((d * width).sum() > 1e-300)
    h = Histogram1D(-0.5, -0.5 + width * len(d), width, d * width, (d * width) ** 2,
                    float((d * width).sum()), 0.0, 0.0)
    p = entropy.coarse_probabilities(h, nu)
    assert math.isclose(p.sum(), 1.0, rel_tol=1e-12)
    assert np.all(p >= -1e-15)


@given(st.lists(st.floats(-1e6, 1e6), min_size=1, max_size=2000))
def test_pairwise_sum_accurate(xs):
    a = np.array(xs)[:, None]
    assert math.isclose(float(pairwise_sum(a)[0]), math.fsum(xs), rel_tol=1e-12,
                        abs_tol=1e-9 * max(1.0, np.abs(a).sum()))


@given(alphas, st.floats(-100, 100), st.floats(-100, 100))
def test_euler_wrap_idempotent(a, b, g):
    t = EulerTriple(a, b, g)
    assert EulerTriple(*t.as_tuple()) == t
