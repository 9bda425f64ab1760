import math

import numpy as np
import pytest

from bohmpair import oracles
from bohmpair.errors import DomainError, RegimeError
from bohmpair.oracles import AnalyticDistribution, Kind
from bohmpair.rotor import PairStateParams

PI = math.pi
ALL = [AnalyticDistribution(k) for k in Kind] + [
    AnalyticDistribution(Kind.PRODUCT_Z_MAXENT, eta=1),
    AnalyticDistribution(Kind.NORMALIZED_PRODUCT_MAXENT, eta=1),
]


@pytest.mark.parametrize("dist", ALL, ids=lambda d: f"{d.kind.value}{d.eta:+d}")
def test_normalized(dist):
    assert dist.moment(0) == pytest.approx(1.0, abs=1e-9)


@pytest.mark.parametrize("dist", ALL, ids=lambda d: f"{d.kind.value}{d.eta:+d}")
def test_bin_average_matches_cdf(dist):
    edges = np.linspace(-2.0, 2.0, 4001)
    ref = np.diff(dist.cdf(edges)) / np.diff(edges)
    assert np.allclose(dist.bin_average(edges), ref, atol=1e-10, rtol=1e-9)


@pytest.mark.parametrize("kind,power,want", [
    (Kind.MOMENTUM_LENGTH_SQ, 1, 0.5),
    (Kind.MOMENTUM_LENGTH, 1, 2 / 3),
    (Kind.M1Z_MAXENT, 1, 0.0),
    (Kind.M1Z_MAXENT, 2, 1 / 6),
    (Kind.M1Z_SQ_MAXENT, 1, 1 / 6),
    (Kind.MXY_PRODUCT_STATE, 1, PI / 8),
    (Kind.MXY_MAXENT, 1, PI / 6),
    (Kind.NORMALIZED_PRODUCT_MAXENT, 1, -1 / 3),
    (Kind.COS_POLAR_MAXENT, 2, 1 / 3),
])
def test_moments(kind, power, want):
    assert AnalyticDistribution(kind).moment(power) == pytest.approx(want, abs=1e-9)


def test_product_z_mean():
    # <M1z M2z> at maximal entanglement: -1/4 * 2/3
    d = AnalyticDistribution(Kind.PRODUCT_Z_MAXENT)
    assert d.moment(1) == pytest.approx(-1 / 6, abs=1e-9)


def test_mxy_series_branch_continuous():
    d = AnalyticDistribution(Kind.MXY_MAXENT)
    mu = np.array([1e-3 - 1e-12, 1e-3 + 1e-12])
    a, b = d(mu)
    assert a == pytest.approx(b, rel=1e-8)
    # 40-digit reference at mu = 1e-2
    assert d(1e-2) == pytest.approx(0.02667066762693341336, rel=1e-13)


def test_domain_errors():
    with pytest.raises(DomainError):
        AnalyticDistribution(Kind.MOMENTUM_LENGTH)(-0.1)
    with pytest.raises(ValueError):
        AnalyticDistribution(Kind.M1Z_MAXENT, eta=2)


def test_qm_reference():
    st = PairStateParams(PI / 2, PI)
    q = oracles.qm_reference(st)
    assert np.allclose(q.spin_tensor, -0.25 * np.eye(3), atol=1e-16)
    assert q.s1_dot_s2 == pytest.approx(-0.75)
    assert q.eof == 1.0
    t = oracles.spin_tensor(PairStateParams(1.0, 0.3))
    assert t[0, 1] == pytest.approx(-t[1, 0])


def test_bohmian_ratios():
    pred = oracles.bohmian_reference_ratios(PairStateParams(PI / 2, PI / 2))
    assert pred.m1_dot_m2 == pytest.approx(-1 / 6)
    with pytest.raises(RegimeError):
        oracles.bohmian_reference_ratios(PairStateParams(1.0))


def test_overlay_selection():
    maxent = PairStateParams(PI / 2, 0.0)
    product = PairStateParams(0.0)
    assert oracles.overlay_for("m1z", maxent).kind is Kind.M1Z_MAXENT
    assert oracles.overlay_for("m1z", product) is None
    assert oracles.overlay_for("m1x", product).kind is Kind.M1X_PRODUCT_STATE
    assert oracles.overlay_for("m1x_m2x", maxent).eta == 1
    assert oracles.overlay_for("m1x_m2x", PairStateParams(PI / 2, PI)).eta == -1
    assert oracles.overlay_for("m1x_m2x", PairStateParams(PI / 2, 1.0)) is None
    assert oracles.overlay_for("m_len", PairStateParams(1.0)).kind is Kind.MOMENTUM_LENGTH
