import math

import numpy as np
import pytest

from bohmpair.errors import NodeError, PoleError
from bohmpair.momenta import (
    configuration_report,
    kinetic_energy,
    momentum_from_gradient,
    momentum_pair,
    principal_axis,
    quantum_potential,
    quantum_potential_direct,
    quantum_potential_laplacian,
    relative_angles,
    single_rotor_up_momentum,
    MomentumPair,
)
from bohmpair.rotor import PairStateParams

PI = math.pi


def _random_cfg(n, seed=0):
    rng = np.random.default_rng(seed)
    return np.column_stack([np.arccos(rng.uniform(-1, 1, n)), rng.uniform(0, 2 * PI, n),
                            rng.uniform(0, 4 * PI, n), np.arccos(rng.uniform(-1, 1, n)),
                            rng.uniform(0, 2 * PI, n), rng.uniform(0, 4 * PI, n)])


def test_single_rotor_up_examples():
    m = momentum_from_gradient(PI / 2, 0.0, 0.0, -0.5)
    assert np.allclose(m, [0, 0.5, 0.5], atol=1e-15)
    assert np.linalg.norm(m) == pytest.approx(1 / math.sqrt(2))
    m = momentum_from_gradient(PI / 2, PI / 2, 0.0, -0.5)
    assert np.allclose(m, [0.5, 0, 0.5], atol=1e-15)


def test_closed_form_single_rotor():
    a = np.linspace(0.1, 3.0, 7)
    b = np.linspace(0, 6, 7)
    m = momentum_from_gradient(a, b, 0 * a, -0.5 + 0 * a)
    assert np.allclose(m, single_rotor_up_momentum(a, b), atol=1e-14)


def test_axis_projection_identity():
    cfg = _random_cfg(10_000, seed=3)
    for theta, phi in [(0.3, 0.0), (PI / 2, PI), (2.0, 1.0)]:
        p = momentum_pair(PairStateParams(theta, phi), cfg)
        for m, a, b in ((p.m1, cfg[:, 0], cfg[:, 1]), (p.m2, cfg[:, 3], cfg[:, 4])):
            e = principal_axis(a, b)
            r = np.einsum("ij,ij->i", e, m) - 0.5
            assert np.all(np.abs(r) <= 1e-10 * np.maximum(1, np.linalg.norm(m, axis=1)))


def test_product_state_energy_split():
    st = PairStateParams(0.0)
    cfg = [PI / 2, 0.0, 0.0, PI / 2, 0.0, 0.0]
    p = momentum_pair(st, cfg)
    assert np.allclose(np.abs(p.m1), [0, 0.5, 0.5])
    assert kinetic_energy(p) == pytest.approx(0.5)
    assert quantum_potential(st, cfg) == pytest.approx(0.25)
    assert quantum_potential_direct(st, cfg) == pytest.approx(0.25, abs=1e-5)
    assert quantum_potential_laplacian(st, cfg) == pytest.approx(0.25, abs=1e-12)


def test_product_state_near_pole():
    # alpha -> 0: |M| -> 1/2 on both rotors, kinetic 1/4, Q = 1/2
    st = PairStateParams(0.0)
    cfg = [1e-6, 0.2, 0.0, PI - 1e-6, 0.1, 0.0]
    p = momentum_pair(st, cfg)
    assert np.linalg.norm(p.m1) == pytest.approx(0.5, abs=1e-9)
    assert kinetic_energy(p) == pytest.approx(0.25, abs=1e-9)
    assert quantum_potential(st, cfg) == pytest.approx(0.5, abs=1e-9)


def test_laplacian_q_matches_energy_identity():
    cfg = _random_cfg(1000, seed=5)
    st = PairStateParams(1.1, 0.4)
    q1 = quantum_potential(st, cfg)
    q2 = quantum_potential_laplacian(st, cfg)
    kin = kinetic_energy(momentum_pair(st, cfg))
    assert np.all(np.abs(q1 - q2) <= 1e-10 * np.maximum(1, kin))


def test_finite_difference_q_agrees():
    cfg = _random_cfg(200, seed=6)
    st = PairStateParams(PI / 2, 0.0)
    r = [abs(quantum_potential_direct(st, c) - quantum_potential(st, c)) for c in cfg]
    assert np.median(r) < 1e-4


def test_errors():
    st = PairStateParams(PI / 2, PI)
    with pytest.raises(PoleError):
        momentum_pair(st, [0.0, 0, 0, 1, 0, 0])
    # singlet node: alpha1 = alpha2 and beta1 = beta2
    with pytest.raises(NodeError):
        momentum_pair(st, [1.0, 0.3, 0.0, 1.0, 0.3, 0.0])


def test_relative_angles_example():
    pair = MomentumPair(np.array([0, 0.5, 0.5]), np.array([0, 0.5, -0.5]))
    cos_big, cos_az, sin_az = relative_angles(pair)
    assert cos_big == pytest.approx(0.0)
    assert cos_az == pytest.approx(1.0)
    assert sin_az == pytest.approx(0.0)


def test_report_consistency():
    st = PairStateParams(PI / 3, 0.2)
    cfg = _random_cfg(50, seed=2)
    rep = configuration_report(st, cfg)
    assert np.allclose(rep.kinetic + rep.qpot, 0.75)
    assert np.all(rep.len1 >= 0.5 - 1e-12)
