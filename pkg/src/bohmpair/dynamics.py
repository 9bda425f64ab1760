"""Equations of motion for the rotor pair and an adaptive integrator for them.

Angles are integrated unwrapped; wrapping happens only when a
:class:`PairConfiguration` is built for output. Time is in units of I/hbar^2
scaled so that the default inertia is 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NodeError, PoleError, StepUnderflow
from .momenta import ConfigurationReport, configuration_report, quantum_potential_laplacian
from .rotor import (
    NODE_THRESHOLD,
    POLE_THRESHOLD,
    EulerTriple,
    PairConfiguration,
    PairStateParams,
    PhysicalConstants,
    phase_gradient_arrays,
)

S_GAMMA = -0.5
DEFAULT_CONSTANTS = PhysicalConstants()


def _rates(state: PairStateParams, y: np.ndarray, inertia: float):
    a1, b1, _, a2, b2, _ = y
    s_a1, s_b1, s_a2, s_b2, r2 = phase_gradient_arrays(state, a1, b1, a2, b2)
    out = np.empty(6)
    for k, (alpha, s_a, s_b) in enumerate(((a1, s_a1, s_b1), (a2, s_a2, s_b2))):
        c, s2 = math.cos(alpha), math.sin(alpha) ** 2
        out[3 * k] = s_a / inertia
        out[3 * k + 1] = (s_b - c * S_GAMMA) / (s2 * inertia)
        out[3 * k + 2] = (S_GAMMA - c * s_b) / (s2 * inertia)
    return out, float(r2)


def _raw(cfg) -> np.ndarray:
    if isinstance(cfg, PairConfiguration):
        return cfg.as_array()
    y = np.asarray(cfg, dtype=float)
    if y.shape != (6,):
        raise ValueError("a configuration has six angles")
    return y


def velocity_field(state: PairStateParams, cfg,
                   constants: PhysicalConstants = DEFAULT_CONSTANTS) -> np.ndarray:
    """Time derivatives ``(a1, b1, g1, a2, b2, g2)'`` of the configuration."""
    y = _raw(cfg)
    if min(abs(math.sin(y[0])), abs(math.sin(y[3]))) < POLE_THRESHOLD:
        raise PoleError("configuration sits on a pole")
    v, r2 = _rates(state, y, constants.inertia)
    if not r2 > NODE_THRESHOLD:
        raise NodeError("configuration sits on a node of the guiding wave")
    return v


def precession_time(alpha0: float, constants: PhysicalConstants = DEFAULT_CONSTANTS) -> float:
    """``tau = 4 I cos^2(alpha0/2)``; the up rotor turns by -t/tau in beta and gamma."""
    return 4.0 * constants.inertia * math.cos(0.5 * alpha0) ** 2


def exact_single_rotor(start: EulerTriple, t: float, *, down: bool = False,
                       constants: PhysicalConstants = DEFAULT_CONSTANTS) -> EulerTriple:
    """Closed-form orbit of a lone rotor in the up state, or the down state with
    ``down=True`` (beta precesses the other way at rate 1/(4 I sin^2(alpha0/2)))."""
    a0 = start.alpha
    if down:
        tau = 4.0 * constants.inertia * math.sin(0.5 * a0) ** 2
        return EulerTriple(a0, start.beta + t / tau, start.gamma - t / tau)
    tau = precession_time(a0, constants)
    return EulerTriple(a0, start.beta - t / tau, start.gamma - t / tau)


@dataclass(frozen=True)
class IntegratorSpec:
    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    max_step: float = 0.5
    t_end: float = 10.0
    pole_guard: float = 1e-6
    min_step: float = 1e-12
    first_step: float | None = None

    def __post_init__(self):
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise ValueError("tolerances must be positive")
        if not self.max_step > 0:
            raise ValueError("max_step must be positive")
        if not self.min_step > 0:
            raise ValueError("min_step must be positive")


@dataclass(frozen=True)
class TrajectoryPoint:
    t: float
    cfg: PairConfiguration
    report: ConfigurationReport
    raw: np.ndarray

    def residuals(self, state: PairStateParams,
                  constants: PhysicalConstants = DEFAULT_CONSTANTS) -> dict[str, float]:
        return conservation_residuals(state, self.raw, self.report, constants)


def conservation_residuals(state: PairStateParams, raw: np.ndarray, report: ConfigurationReport,
                           constants: PhysicalConstants = DEFAULT_CONSTANTS) -> dict[str, float]:
    """Deviations of the constants of motion at one configuration.

    ``energy`` takes the quantum potential from the Laplacian of psi, so it is
    independent of the phase gradient that drives the motion.
    """
    m1, m2 = report.momenta.m1, report.momenta.m2
    energy = float(report.kinetic + quantum_potential_laplacian(state, raw, constants)
                   - constants.energy)
    res = {"mz_sum": float(m1[2] + m2[2]),
           "energy": energy,
           "len_diff": float(report.len1 - report.len2)}
    for k, (m, a, b) in enumerate(((m1, raw[0], raw[1]), (m2, raw[3], raw[4])), start=1):
        e = np.array([math.sin(a) * math.sin(b), math.sin(a) * math.cos(b), math.cos(a)])
        res[f"e{k}_proj"] = float(e @ m - 0.5)
    return res


# Dormand-Prince 5(4) tableau
_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_B4 = np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40])
_E = _B5 - _B4


class _Guard(Exception):
    """A stage landed inside the pole or node guard band."""


def _field(state, y, spec, inertia):
    if min(abs(math.sin(y[0])), abs(math.sin(y[3]))) < spec.pole_guard:
        raise _Guard
    v, r2 = _rates(state, y, inertia)
    if not r2 > NODE_THRESHOLD or not np.all(np.isfinite(v)):
        raise _Guard
    return v


def _step(state, y, f0, h, spec, inertia):
    k = [f0]
    for i in range(1, 7):
        yi = y + h * sum(a * kk for a, kk in zip(_A[i], k))
        k.append(_field(state, yi, spec, inertia))
    y_new = y + h * (_B5 @ np.array(k))
    err = h * (_E @ np.array(k))
    return y_new, err, k[-1]


def _hermite(t0, y0, f0, t1, y1, f1, t):
    h = t1 - t0
    s = (t - t0) / h
    h00 = (1 + 2 * s) * (1 - s) ** 2
    h10 = s * (1 - s) ** 2
    h01 = s * s * (3 - 2 * s)
    h11 = s * s * (s - 1)
    return h00 * y0 + h10 * h * f0 + h01 * y1 + h11 * h * f1


@dataclass
class Trajectory:
    times: np.ndarray
    states: np.ndarray          # raw (unwrapped) angles, one row per requested time
    n_accepted: int
    n_rejected: int
    n_guard_rejections: int

    def point(self, k: int, state: PairStateParams,
              constants: PhysicalConstants = DEFAULT_CONSTANTS) -> TrajectoryPoint:
        raw = self.states[k]
        cfg = PairConfiguration.from_angles(*raw)
        return TrajectoryPoint(float(self.times[k]), cfg,
                               configuration_report(state, raw, constants), raw)

    def points(self, state: PairStateParams, constants: PhysicalConstants = DEFAULT_CONSTANTS):
        return [self.point(k, state, constants) for k in range(len(self.times))]


def integrate(state: PairStateParams, start, spec: IntegratorSpec, times=None,
              constants: PhysicalConstants = DEFAULT_CONSTANTS) -> Trajectory:
    """Adaptive Dormand-Prince 5(4) from ``t = 0`` to ``spec.t_end`` (either sign).

    Steps whose stages enter the guard bands are rejected and halved; a step
    below ``spec.min_step`` raises :class:`StepUnderflow`. Output at ``times``
    (default: 101 uniform points) by cubic Hermite interpolation.
    """
    y = _raw(start).copy()
    velocity_field(state, y, constants)
    inertia = constants.inertia
    t_end = float(spec.t_end)
    direction = 1.0 if t_end >= 0 else -1.0
    if times is None:
        times = np.linspace(0.0, t_end, 101)
    times = np.asarray(times, dtype=float)
    if np.any(direction * np.diff(times) < 0) or np.any(direction * times < 0) \
            or np.any(direction * (times - t_end) > 0):
        raise ValueError("output times must be ordered within [0, t_end]")
    out = np.empty((len(times), 6))
    t = 0.0
    f = _field(state, y, spec, inertia)
    h = spec.first_step or min(spec.max_step, 1e-3 * max(1.0, abs(t_end)))
    n_acc = n_rej = n_guard = 0
    nxt = 0
    while nxt < len(times) and times[nxt] == 0.0:
        out[nxt] = y
        nxt += 1
    while direction * (t_end - t) > 0:
        h = min(h, spec.max_step, abs(t_end - t))
        if h < spec.min_step:
            raise StepUnderflow(f"step {h:.3e} below minimum at t={t:.6g}, "
                                f"config={np.array2string(y, precision=6)}")
        try:
            y_new, err, f_new = _step(state, y, f, direction * h, spec, inertia)
            _field(state, y_new, spec, inertia)
        except _Guard:
            n_guard += 1
            h *= 0.5
            continue
        scale = spec.abs_tol + spec.rel_tol * np.maximum(np.abs(y), np.abs(y_new))
        e = float(np.sqrt(np.mean((err / scale) ** 2)))
        if e <= 1.0:
            t_new = t + direction * h
            while nxt < len(times) and direction * (times[nxt] - t_new) <= 0:
                out[nxt] = _hermite(t, y, f, t_new, y_new, f_new, times[nxt])
                nxt += 1
            t, y, f = t_new, y_new, f_new
            n_acc += 1
            h *= min(5.0, 0.9 * e ** -0.2) if e > 0 else 5.0
        else:
            n_rej += 1
            h *= max(0.2, 0.9 * e ** -0.2)
    while nxt < len(times):
        out[nxt] = y
        nxt += 1
    return Trajectory(times, out, n_acc, n_rej, n_guard)


def conservation_drift(traj: Trajectory, state: PairStateParams,
                       constants: PhysicalConstants = DEFAULT_CONSTANTS) -> dict[str, float]:
    """Largest change of each conserved quantity from its start value, per unit time."""
    pts = traj.points(state, constants)
    r0 = pts[0].residuals(state, constants)
    span = max(abs(traj.times[-1] - traj.times[0]), 1.0)
    drift = {k: 0.0 for k in r0}
    for p in pts[1:]:
        for k, v in p.residuals(state, constants).items():
            if math.isfinite(v) and math.isfinite(r0[k]):
                drift[k] = max(drift[k], abs(v - r0[k]) / span)
    return drift


def retrace(state: PairStateParams, start, spec: IntegratorSpec,
            constants: PhysicalConstants = DEFAULT_CONSTANTS) -> tuple[np.ndarray, np.ndarray]:
    """Integrate to ``t_end`` and back; returns (end point, returned start)."""
    fwd = integrate(state, start, spec, times=[spec.t_end], constants=constants)
    end = fwd.states[-1]
    back_spec = IntegratorSpec(spec.rel_tol, spec.abs_tol, spec.max_step, -spec.t_end,
                               spec.pole_guard, spec.min_step, spec.first_step)
    back = integrate(state, end, back_spec, times=[-spec.t_end], constants=constants)
    return end, back.states[-1]
