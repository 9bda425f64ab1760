import math

import numpy as np
import pytest

from bohmpair import bell
from bohmpair.ensemble import Ensemble, GridSpec
from bohmpair.rotor import PairStateParams

PI = math.pi
Z = np.array([0.0, 0.0, 1.0])
X = np.array([1.0, 0.0, 0.0])
Y = np.array([0.0, 1.0, 0.0])


@pytest.fixture(scope="module")
def singlet():
    return Ensemble(PairStateParams(PI / 2, PI), GridSpec.cube(24), threads=1)


def test_qm_correlator_examples():
    assert bell.qm_correlator(PairStateParams(PI / 2, 0.0), X, Y) == pytest.approx(0.0, abs=1e-16)
    assert bell.qm_correlator(PairStateParams(PI / 2, PI), X, X) == pytest.approx(-1.0)
    for theta in (0.0, 1.0, PI):
        assert bell.qm_correlator(PairStateParams(theta), Z, Z) == pytest.approx(-1.0)


def test_optimal_chsh_quantum():
    st = PairStateParams(PI / 2, PI)
    s = bell.PolarizerSetup.optimal_singlet()
    v = bell.chsh_value(s, lambda a, b: bell.qm_correlator(st, a, b))
    assert v == pytest.approx(2 * math.sqrt(2), abs=1e-12)


def test_bohmian_zz_maxent(singlet):
    r = bell.bohm_correlator(singlet.state, Z, Z, singlet)
    assert r.value == pytest.approx(-1.0, abs=5e-3)


def test_bohmian_zz_product_state():
    ens = Ensemble(PairStateParams(0.0), GridSpec.cube(24), threads=1)
    assert bell.bohm_correlator(ens.state, Z, Z, ens).value == pytest.approx(-48 / 25, abs=5e-3)


def test_direct_matches_contraction(singlet):
    rng = np.random.default_rng(2)
    for _ in range(3):
        s = bell.PolarizerSetup.random(rng)
        via = bell.bohm_correlator(singlet.state, s.a, s.b, singlet).value
        direct = bell.bohm_correlator_direct(singlet.state, s.a, s.b, singlet)
        assert via == pytest.approx(direct, abs=1e-10)


def test_bohmian_chsh_singlet(singlet):
    r = bell.bohm_chsh(bell.PolarizerSetup.optimal_singlet(), singlet)
    assert r.value == pytest.approx(2 * math.sqrt(2), abs=3 * r.std_error + 1e-2)


def test_setup_validation():
    with pytest.raises(ValueError):
        bell.PolarizerSetup(np.array([1.0, 1.0, 0.0]), Z, Z, Z)
    s = bell.PolarizerSetup.in_plane_degrees(0, 90, 45, 315)
    assert np.allclose(s.b, [math.cos(PI / 4), math.sin(PI / 4), 0]) or np.allclose(
        s.b, [math.sin(PI / 4), math.cos(PI / 4), 0])
    assert set(s.to_dict()) >= {"a", "b", "a_prime", "b_prime"}


def test_random_setups_bounded():
    rng = np.random.default_rng(0)
    st = PairStateParams(1.3, 0.4)
    for _ in range(200):
        s = bell.PolarizerSetup.random(rng)
        assert abs(bell.chsh_value(s, lambda a, b: bell.qm_correlator(st, a, b))) \
            <= 2 * math.sqrt(2) + 1e-12
