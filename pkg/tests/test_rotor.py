import cmath
import math

import numpy as np
import pytest

from bohmpair.rotor import (
    SPINOR_NORM,
    EulerTriple,
    PairConfiguration,
    PairStateParams,
    PhysicalConstants,
    density,
    guiding_wave,
    phase_gradient,
    spinor_down,
    spinor_up,
)

PI = math.pi


def test_spinor_up_value():
    u = spinor_up(PI / 2, PI, 0.0)
    assert abs(u) == pytest.approx(0.0795774715, abs=1e-9)
    assert cmath.phase(u) == pytest.approx(-PI / 2, abs=1e-12)


def test_spinor_down_value():
    u = spinor_down(PI / 2, PI / 2, 0.0)
    assert abs(u) == pytest.approx(0.0795774715, abs=1e-9)
    assert cmath.phase(u) == pytest.approx(PI / 4, abs=1e-12)


def test_spinors_orthonormal_on_so3():
    # integrate over alpha (sin weight), beta in [0, 2pi), gamma in [0, 4pi)
    x, w = np.polynomial.legendre.leggauss(40)
    alpha = 0.5 * PI * (x + 1)
    wa = 0.5 * PI * w * np.sin(alpha)
    beta = np.linspace(0, 2 * PI, 16, endpoint=False)
    A, B = np.meshgrid(alpha, beta, indexing="ij")
    W = wa[:, None] * (2 * PI / 16) * 4 * PI  # gamma phases cancel in |u|^2 and u* d
    up, dn = spinor_up(A, B), spinor_down(A, B)
    assert np.sum(W * abs(up) ** 2) == pytest.approx(1.0, abs=1e-12)
    assert np.sum(W * abs(dn) ** 2) == pytest.approx(1.0, abs=1e-12)
    assert abs(np.sum(W * np.conj(up) * dn)) < 1e-12


def test_density_normalized_gamma_reduced():
    # integral over (cos a1, b1, cos a2, b2) times the gamma volume (4 pi)^2
    st = PairStateParams(PI / 3, 0.7)
    n = 24
    x, w = np.polynomial.legendre.leggauss(n)
    b = np.linspace(0, 2 * PI, n, endpoint=False)
    C1, B1, C2, B2 = np.meshgrid(x, b, x, b, indexing="ij")
    cfg = np.stack([np.arccos(C1), B1, 0 * B1, np.arccos(C2), B2, 0 * B2], axis=-1)
    W = w[:, None, None, None] * w[None, None, :, None] * (2 * PI / n) ** 2
    total = np.sum(W * density(st, cfg)) * (4 * PI) ** 2
    assert total == pytest.approx(1.0, abs=1e-10)


def test_phase_gradient_matches_finite_difference():
    st = PairStateParams(PI / 2, 0.0)
    cfg = np.array([PI / 2, 0.0, 0.0, PI / 2, PI / 2, 0.0])
    g = phase_gradient(st, cfg)
    h = 1e-6
    fd = []
    for k in range(6):
        e = np.zeros(6)
        e[k] = h
        fd.append((cmath.phase(guiding_wave(st, cfg + e) / guiding_wave(st, cfg - e))) / (2 * h))
    got = [g.d_alpha1, g.d_beta1, g.d_gamma1, g.d_alpha2, g.d_beta2, g.d_gamma2]
    assert np.allclose(got, fd, atol=1e-8)


def test_gamma_derivatives_fixed():
    g = phase_gradient(PairStateParams(1.0, 2.0), [1.0, 0.3, 0.1, 2.0, 1.0, 0.5])
    assert g.d_gamma1 == g.d_gamma2 == -0.5


@pytest.mark.parametrize("theta,want", [(0.0, 1.0), (PI / 2, 0.5), (PI, 0.0)])
def test_p_up_exact(theta, want):
    assert PairStateParams(theta).p_up == want


def test_euler_wrapping_and_validation():
    t = EulerTriple(1.0, 7.0, -1.0)
    assert 0 <= t.beta < 2 * PI and 0 <= t.gamma < 4 * PI
    with pytest.raises(ValueError):
        EulerTriple(-0.1)
    with pytest.raises(ValueError):
        EulerTriple(1.0, math.nan)
    with pytest.raises(ValueError):
        PairStateParams(4.0)
    with pytest.raises(ValueError):
        PhysicalConstants(inertia=0.0)
    cfg = PairConfiguration.from_angles(1, 2, 3, 1, 2, 3)
    assert cfg.as_array().shape == (6,)


def test_energy():
    assert PhysicalConstants().energy == 0.75
    assert PhysicalConstants(inertia=2.0).energy == 0.375
    assert SPINOR_NORM == pytest.approx(1 / math.sqrt(8 * PI**2))
