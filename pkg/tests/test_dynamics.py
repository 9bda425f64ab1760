import math

import numpy as np
import pytest

from bohmpair import dynamics
from bohmpair.errors import NodeError, PoleError, StepUnderflow
from bohmpair.rotor import EulerTriple, PairStateParams

PI = math.pi


def test_product_state_velocity():
    st = PairStateParams(0.0)
    y = np.array([1.1, 0.4, 0.3, 2.0, 1.3, 0.2])
    v = dynamics.velocity_field(st, y)
    tau1 = dynamics.precession_time(y[0])
    tau2 = 4 * math.sin(y[3] / 2) ** 2
    assert np.allclose(v, [0, -1 / tau1, -1 / tau1, 0, 1 / tau2, -1 / tau2], atol=1e-14)


def test_exact_single_rotor_orbit():
    start = EulerTriple(1.0, 0.5, 0.25)
    tau = dynamics.precession_time(1.0)
    end = dynamics.exact_single_rotor(start, tau)
    assert end.alpha == 1.0
    assert end.beta == pytest.approx((0.5 - 1.0) % (2 * PI))
    down = dynamics.exact_single_rotor(start, 1.0, down=True)
    assert down.beta == pytest.approx(0.5 + 1 / (4 * math.sin(0.5) ** 2))


def test_integrator_matches_exact_orbit():
    st = PairStateParams(0.0)
    y0 = np.array([1.1, 0.4, 0.3, 2.0, 1.3, 0.2])
    tau = dynamics.precession_time(y0[0])
    tr = dynamics.integrate(st, y0, dynamics.IntegratorSpec(t_end=3 * tau), [3 * tau])
    assert tr.states[-1][1] == pytest.approx(0.4 - 3.0, abs=1e-9)


def test_conservation_along_singlet_trajectory():
    st = PairStateParams(PI / 2, PI)
    y0 = np.array([1.0, 0.3, 0.0, 2.0, 2.5, 0.0])
    tr = dynamics.integrate(st, y0, dynamics.IntegratorSpec(t_end=5.0), np.linspace(0, 5, 21))
    drift = dynamics.conservation_drift(tr, st)
    assert max(drift.values()) <= 1e-8
    for p in tr.points(st):
        r = p.residuals(st)
        assert abs(r["energy"]) <= 1e-8 and abs(r["mz_sum"]) <= 1e-12


def test_retrace():
    st = PairStateParams(PI / 3, PI / 4)
    y0 = np.array([1.2, 0.7, 0.1, 1.9, 4.0, 0.3])
    _, back = dynamics.retrace(st, y0, dynamics.IntegratorSpec(t_end=4.0))
    assert np.abs(back - y0).max() < 1e-8


def test_errors():
    st = PairStateParams(PI / 2, PI)
    with pytest.raises(PoleError):
        dynamics.velocity_field(st, [0.0, 0, 0, 1, 0, 0])
    with pytest.raises(NodeError):
        dynamics.velocity_field(st, [1.0, 0.3, 0.0, 1.0, 0.3, 0.0])
    with pytest.raises(ValueError):
        dynamics.IntegratorSpec(rel_tol=0)
    with pytest.raises(StepUnderflow):
        dynamics.integrate(PairStateParams(0.0), [1.0, 0, 0, 1.0, 0, 0],
                           dynamics.IntegratorSpec(t_end=1.0, max_step=1e-13, min_step=1e-12))


def test_bad_output_times():
    with pytest.raises(ValueError):
        dynamics.integrate(PairStateParams(0.0), [1.0, 0, 0, 1.0, 0, 0],
                           dynamics.IntegratorSpec(t_end=1.0), [0.5, 0.2])
