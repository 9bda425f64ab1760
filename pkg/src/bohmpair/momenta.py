"""Bohmian angular momenta of the two rotors and quantities derived from them."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateProjectionError, NodeError, PoleError, StencilError
from .rotor import (
    NODE_THRESHOLD,
    POLE_THRESHOLD,
    PairConfiguration,
    PairStateParams,
    SPINOR_NORM,
    PhysicalConstants,
    _angles,
    density,
    phase_gradient_arrays,
)

DEFAULT_CONSTANTS = PhysicalConstants()


@dataclass(frozen=True)
class MomentumPair:
    m1: np.ndarray
    m2: np.ndarray


@dataclass(frozen=True)
class ConfigurationReport:
    momenta: MomentumPair
    len1: float | np.ndarray
    len2: float | np.ndarray
    mxy1: float | np.ndarray
    mxy2: float | np.ndarray
    cos_big_phi: float | np.ndarray
    cos_az: float | np.ndarray
    sin_az: float | np.ndarray
    kinetic: float | np.ndarray
    qpot: float | np.ndarray


def momentum_from_gradient(alpha, beta, s_alpha, s_beta, s_gamma=-0.5, *, check=True):
    """Angular momentum of one rotor from the partials of S.

    Returns an array with the x, y, z components on the last axis.
    """
    sin_a = np.sin(alpha)
    if check and np.any(np.abs(sin_a) < POLE_THRESHOLD):
        raise PoleError("rotor axis on the z-axis")
    cos_a = np.cos(alpha)
    sin_b, cos_b = np.sin(beta), np.cos(beta)
    # cot(a) S_b - S_g / sin(a), shared by x and y
    lateral = (cos_a * s_beta - s_gamma) / sin_a
    mx = -cos_b * s_alpha + sin_b * lateral
    my = sin_b * s_alpha + cos_b * lateral
    mz = -np.asarray(s_beta, dtype=float) + 0.0 * mx
    return np.stack([mx, my, mz], axis=-1)


def principal_axis(alpha, beta):
    """Unit vector of the rotor symmetry axis, ``(sin a sin b, sin a cos b, cos a)``."""
    sin_a = np.sin(alpha)
    return np.stack(
        np.broadcast_arrays(sin_a * np.sin(beta), sin_a * np.cos(beta), np.cos(alpha)),
        axis=-1,
    )


def _momenta_arrays(state, a1, b1, a2, b2):
    s_a1, s_b1, s_a2, s_b2, r2 = phase_gradient_arrays(state, a1, b1, a2, b2)
    m1 = momentum_from_gradient(a1, b1, s_a1, s_b1, check=False)
    m2 = momentum_from_gradient(a2, b2, s_a2, s_b2, check=False)
    return m1, m2, r2


def momentum_pair(state: PairStateParams, cfg) -> MomentumPair:
    """M1 and M2 at one configuration or at an ``(..., 6)`` array of them."""
    a1, b1, _, a2, b2, _ = _angles(cfg)
    if np.any(np.abs(np.sin(a1)) < POLE_THRESHOLD) or np.any(
        np.abs(np.sin(a2)) < POLE_THRESHOLD
    ):
        raise PoleError("rotor axis on the z-axis")
    m1, m2, r2 = _momenta_arrays(state, a1, b1, a2, b2)
    if np.any(r2 <= NODE_THRESHOLD):
        raise NodeError("momenta undefined at a node of the guiding wave")
    return MomentumPair(m1, m2)


def kinetic_energy(pair: MomentumPair, constants: PhysicalConstants = DEFAULT_CONSTANTS):
    k = (np.sum(pair.m1**2, axis=-1) + np.sum(pair.m2**2, axis=-1)) / (2 * constants.inertia)
    return k[()] if np.ndim(k) == 0 else k


def quantum_potential(state: PairStateParams, cfg, constants: PhysicalConstants = DEFAULT_CONSTANTS):
    """Q = E - (|M1|^2 + |M2|^2)/(2I).

    The pair is an energy eigenstate, so the quantum Hamilton-Jacobi energy is
    the same constant E at every configuration.
    """
    return constants.energy - kinetic_energy(momentum_pair(state, cfg), constants)


# spinor factors e^{i(m beta + n gamma)} g(alpha): (m, n, g, g', g'') up to the common norm
_UP = (-0.5, -0.5, lambda a: np.cos(a / 2), lambda a: -0.5 * np.sin(a / 2),
       lambda a: -0.25 * np.cos(a / 2))
_DOWN = (0.5, -0.5, lambda a: np.sin(a / 2), lambda a: 0.5 * np.cos(a / 2),
         lambda a: -0.25 * np.sin(a / 2))


def _spinor_jet(kind, a, b, g):
    """Value, first partials (a, b, g) and Laplace-Beltrami image of one spinor."""
    m, n, f0, f1, f2 = kind
    ph = np.exp(1j * (m * b + n * g))
    u = f0(a) * ph
    ua = f1(a) * ph
    lap = (f2(a) * ph + np.cos(a) / np.sin(a) * ua
           + (-(m * m) - n * n + 2 * np.cos(a) * m * n) * u / np.sin(a) ** 2)
    return u, (ua, 1j * m * u, 1j * n * u), lap


def quantum_potential_laplacian(state: PairStateParams, cfg,
                                constants: PhysicalConstants = DEFAULT_CONSTANTS):
    """Q = -(Lap R)/(2 I R) from second derivatives of psi itself.

    Uses Lap R / R = Re(Lap psi / psi) + |grad S|^2 with the Laplace-Beltrami
    operator of each rotor applied term by term to the spinor products. Shares
    no code with the phase-gradient path.
    """
    a1, b1, g1, a2, b2, g2 = (np.asarray(x, dtype=float) for x in _angles(cfg))
    for a in (a1, a2):
        if np.any(np.abs(np.sin(a)) < POLE_THRESHOLD):
            raise PoleError("rotor axis on the z-axis")
    up1, dup1, lup1 = _spinor_jet(_UP, a1, b1, g1)
    dn1, ddn1, ldn1 = _spinor_jet(_DOWN, a1, b1, g1)
    up2, dup2, lup2 = _spinor_jet(_UP, a2, b2, g2)
    dn2, ddn2, ldn2 = _spinor_jet(_DOWN, a2, b2, g2)
    c1 = state.cos_half
    c2 = np.exp(1j * state.phi) * state.sin_half
    psi = c1 * up1 * dn2 + c2 * dn1 * up2
    if np.any(np.abs(psi) ** 2 * SPINOR_NORM**4 <= NODE_THRESHOLD):
        raise NodeError("configuration sits on a node of the guiding wave")
    total = np.zeros(np.shape(psi))
    for alpha, d_terms, lap in (
        (a1, [c1 * d * dn2 + c2 * e * up2 for d, e in zip(dup1, ddn1)],
         c1 * lup1 * dn2 + c2 * ldn1 * up2),
        (a2, [c1 * up1 * d + c2 * dn1 * e for d, e in zip(ddn2, dup2)],
         c1 * up1 * ldn2 + c2 * dn1 * lup2),
    ):
        sa, sb, sg = (np.imag(d / psi) for d in d_terms)
        grad2 = sa * sa + (sb * sb + sg * sg - 2 * np.cos(alpha) * sb * sg) / np.sin(alpha) ** 2
        total = total + np.real(lap / psi) + grad2
    return -total / (2.0 * constants.inertia)


def _amplitude(state, a1, b1, a2, b2):
    return np.sqrt(density(state, np.stack(np.broadcast_arrays(a1, b1, 0.0 * a1, a2, b2, 0.0 * a2), axis=-1)))


def quantum_potential_direct(
    state: PairStateParams,
    cfg,
    step: float = 1e-3,
    constants: PhysicalConstants = DEFAULT_CONSTANTS,
):
    """Q = -(Lap_1 R + Lap_2 R)/(2 I R) with central finite differences.

    Independent of :func:`quantum_potential`. R does not depend on gamma, so the
    Laplacian on each rotor reduces to ``R_aa + cot(a) R_a + R_bb / sin^2 a``.
    """
    a1, b1, _, a2, b2, _ = (np.asarray(x, dtype=float) for x in _angles(cfg))
    angles = [a1, b1, a2, b2]
    for a in (a1, a2):
        if np.any(np.abs(np.sin(a)) < POLE_THRESHOLD):
            raise PoleError("rotor axis on the z-axis")
        if np.any(np.abs(np.sin(a - step)) < POLE_THRESHOLD) or np.any(
            np.abs(np.sin(a + step)) < POLE_THRESHOLD
        ) or np.any(a - step < 0) or np.any(a + step > np.pi):
            raise StencilError("stencil crosses a pole")

    def amp(shift_index=None, delta=0.0):
        args = list(angles)
        if shift_index is not None:
            args[shift_index] = args[shift_index] + delta
        return _amplitude(state, *args)

    r0 = amp()
    if np.any(r0**2 <= NODE_THRESHOLD):
        raise NodeError("quantum potential undefined at a node")
    lap = 0.0
    for ia, ib in ((0, 1), (2, 3)):
        rp, rm = amp(ia, step), amp(ia, -step)
        bp, bm = amp(ib, step), amp(ib, -step)
        if np.any(np.minimum.reduce([rp, rm, bp, bm]) ** 2 <= NODE_THRESHOLD):
            raise StencilError("stencil point on a node")
        a = angles[ia]
        r_aa = (rp - 2 * r0 + rm) / step**2
        r_a = (rp - rm) / (2 * step)
        r_bb = (bp - 2 * r0 + bm) / step**2
        lap = lap + r_aa + np.cos(a) / np.sin(a) * r_a + r_bb / np.sin(a) ** 2
    q = -lap / (2 * constants.inertia * r0)
    return q[()] if np.ndim(q) == 0 else q


def relative_angles(pair: MomentumPair, *, check=True):
    """``(cos Phi, cos phi_rel, sin phi_rel)`` with ``phi_rel = phi_2 - phi_1``.

    Azimuths are measured as in ``M = |M|(sin t sin p, sin t cos p, cos t)``,
    i.e. from the y-axis towards x.
    """
    m1, m2 = pair.m1, pair.m2
    len1 = np.linalg.norm(m1, axis=-1)
    len2 = np.linalg.norm(m2, axis=-1)
    cos_big = np.sum(m1 * m2, axis=-1) / (len1 * len2)
    cos_big = np.clip(cos_big, -1.0, 1.0)
    xy1 = np.hypot(m1[..., 0], m1[..., 1])
    xy2 = np.hypot(m2[..., 0], m2[..., 1])
    if check and (np.any(xy1 == 0) or np.any(xy2 == 0)):
        raise DegenerateProjectionError("xy projection vanishes")
    with np.errstate(divide="ignore", invalid="ignore"):
        den = xy1 * xy2
        cos_az = (m1[..., 0] * m2[..., 0] + m1[..., 1] * m2[..., 1]) / den
        # sin(p2 - p1) with x = sin p, y = cos p
        sin_az = (m2[..., 0] * m1[..., 1] - m1[..., 0] * m2[..., 1]) / den
    out = (cos_big, cos_az, sin_az)
    return tuple(x[()] if np.ndim(x) == 0 else x for x in out)


def configuration_report(
    state: PairStateParams, cfg, constants: PhysicalConstants = DEFAULT_CONSTANTS
) -> ConfigurationReport:
    pair = momentum_pair(state, cfg)
    cos_big, cos_az, sin_az = relative_angles(pair, check=False)
    kin = kinetic_energy(pair, constants)

    def sq(x):
        return x[()] if np.ndim(x) == 0 else x

    return ConfigurationReport(
        momenta=pair,
        len1=sq(np.linalg.norm(pair.m1, axis=-1)),
        len2=sq(np.linalg.norm(pair.m2, axis=-1)),
        mxy1=sq(np.hypot(pair.m1[..., 0], pair.m1[..., 1])),
        mxy2=sq(np.hypot(pair.m2[..., 0], pair.m2[..., 1])),
        cos_big_phi=cos_big,
        cos_az=cos_az,
        sin_az=sin_az,
        kinetic=kin,
        qpot=constants.energy - kin,
    )


def single_rotor_up_momentum(alpha0, beta):
    """Closed-form momentum of a lone spin-up rotor: polar angle alpha0/2,
    length 1/(2 cos(alpha0/2)), azimuth beta."""
    theta = np.asarray(alpha0) / 2
    length = 1.0 / (2 * np.cos(theta))
    return np.stack(
        np.broadcast_arrays(
            length * np.sin(theta) * np.sin(beta),
            length * np.sin(theta) * np.cos(beta),
            length * np.cos(theta),
        ),
        axis=-1,
    )
