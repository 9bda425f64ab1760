"""Acceptance suite: every criterion at its stated tolerance and desk scale.

Each ``criterion_*`` function returns a :class:`CriterionResult`. Ensembles are
cached per (state, sampler), so the suite makes one pass per state.
"""

from __future__ import annotations

import functools
import json
import math
import os
import subprocess
import sys
from collections.abc import Callable
from dataclasses import dataclass, field

import numpy as np

from . import bell, dynamics, entropy, oracles
from .ensemble.engine import HistogramSpec
from .ensemble.estimators import Ensemble, Histogram1D, angle_statistics, correlation_tensor
from .ensemble.reduction import pairwise_sum
from .ensemble.sampling import GridSpec, LatticeSpec
from .momenta import kinetic_energy, momentum_pair, quantum_potential_laplacian
from .rotor import PairStateParams

PI = math.pi
THETAS = (0.0, PI / 6, PI / 3, PI / 2)
PHIS = (0.0, PI / 2, PI)
# rounding floor added to grid error bars in 3-se comparisons
SE_FLOOR = 1e-12


@dataclass(frozen=True)
class Scale:
    grid_n: int = 128
    lattice_n: int = 128
    n_random: int = 100_000
    n_setups: int = 1000
    threads: int = field(default_factory=lambda: os.cpu_count() or 1)
    determinism_grid_n: int = 32


DESK = Scale()


@dataclass(frozen=True)
class CriterionResult:
    number: int
    name: str
    passed: bool
    checks: tuple[tuple[str, bool, str], ...]

    def line(self) -> str:
        return f"[{'PASS' if self.passed else 'FAIL'}] criterion {self.number:2d}: {self.name}"

    def report(self) -> str:
        out = [self.line()]
        out += [f"    {'ok ' if ok else 'BAD'} {label}: {detail}" for label, ok, detail in self.checks]
        return "\n".join(out)


class _Checks:
    def __init__(self):
        self.items: list[tuple[str, bool, str]] = []

    def close(self, label: str, value: float, target: float, tol: float) -> None:
        err = abs(value - target)
        self.items.append((label, bool(err <= tol),
                           f"{value:.8g} vs {target:.8g} (|diff| {err:.2e}, tol {tol:.1e})"))

    def bound(self, label: str, value: float, limit: float) -> None:
        self.items.append((label, bool(value <= limit), f"{value:.3e} <= {limit:.1e}"))

    def flag(self, label: str, ok: bool, detail: str = "") -> None:
        self.items.append((label, bool(ok), detail))

    def result(self, number: int, name: str) -> CriterionResult:
        return CriterionResult(number, name, all(ok for _, ok, _ in self.items), tuple(self.items))


@functools.lru_cache(maxsize=None)
def _grid_ensemble(theta: float, phi: float, n: int, threads: int) -> Ensemble:
    return Ensemble(PairStateParams(theta, phi), GridSpec.cube(n), threads=threads)


@functools.lru_cache(maxsize=None)
def _lattice_ensemble(theta: float, phi: float, n: int, threads: int) -> Ensemble:
    return Ensemble(PairStateParams(theta, phi), LatticeSpec.cube(n), threads=threads,
                    grid_errors=False)


def _grid(scale: Scale, theta: float, phi: float) -> Ensemble:
    return _grid_ensemble(theta, phi, scale.grid_n, scale.threads)


# --- 1 -------------------------------------------------------------------------

def _random_configs(n: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    return np.column_stack([np.arccos(rng.uniform(-1, 1, n)), rng.uniform(0, 2 * PI, n),
                            rng.uniform(0, 4 * PI, n), np.arccos(rng.uniform(-1, 1, n)),
                            rng.uniform(0, 2 * PI, n), rng.uniform(0, 4 * PI, n)])


def criterion_1(scale: Scale = DESK) -> CriterionResult:
    """Pointwise identities on random configurations.

    Residuals are compared with ``1e-10 * max(1, size)``, where size is the
    magnitude of the cancelling terms (|M| or the kinetic energy): near a node
    |M| diverges and double rounding alone exceeds any fixed absolute bound.
    """
    chk = _Checks()
    cfg = _random_configs(scale.n_random, seed=1)
    tol = 1e-10
    for theta in THETAS:
        for phi in PHIS:
            st = PairStateParams(theta, phi)
            pair = momentum_pair(st, cfg)
            m1, m2 = pair.m1, pair.m2
            l1, l2 = np.linalg.norm(m1, axis=1), np.linalg.norm(m2, axis=1)
            lsc = np.maximum(1.0, np.maximum(l1, l2))
            e1 = np.column_stack([np.sin(cfg[:, 0]) * np.sin(cfg[:, 1]),
                                  np.sin(cfg[:, 0]) * np.cos(cfg[:, 1]), np.cos(cfg[:, 0])])
            e2 = np.column_stack([np.sin(cfg[:, 3]) * np.sin(cfg[:, 4]),
                                  np.sin(cfg[:, 3]) * np.cos(cfg[:, 4]), np.cos(cfg[:, 3])])
            kin = kinetic_energy(pair)
            q = quantum_potential_laplacian(st, cfg)
            tag = f"theta={theta:.4f} phi={phi:.4f}"
            r = {
                "M1z+M2z": np.abs(m1[:, 2] + m2[:, 2]) / lsc,
                "e1.M1-1/2": np.abs(np.einsum("ij,ij->i", e1, m1) - 0.5) / lsc,
                "e2.M2-1/2": np.abs(np.einsum("ij,ij->i", e2, m2) - 0.5) / lsc,
                "kinetic+Q-3/4": np.abs(kin + q - 0.75) / np.maximum(1.0, kin),
            }
            for name, v in r.items():
                chk.bound(f"{tag} {name} (scaled)", float(v.max()), tol)
            chk.bound(f"{tag} 1/2-min|M|", float(0.5 - min(l1.min(), l2.min())), tol)
            if theta == PI / 2:
                chk.bound(f"{tag} |M1|-|M2| (scaled)", float((np.abs(l1 - l2) / lsc).max()), tol)
    return chk.result(1, "pointwise invariants")


# --- 2 -------------------------------------------------------------------------

DENSITY_CASES = (
    # (theta, observable feature, closed-form observable, mu range)
    (PI / 2, "m1_len_sq", "m_len_sq", (0.0, 5.0)),
    (0.0, "m1_len_sq", "m_len_sq", (0.0, 5.0)),
    (PI / 2, "m1z", "m1z", (-5.0, 5.0)),
    (PI / 2, "m1z_sq", "m1z_sq", (0.0, 5.0)),
    (PI / 2, "m1_xy", "mxy", (0.0, 5.0)),
    (0.0, "m1x", "m1x", (-5.0, 5.0)),
    (0.0, "m1_xy", "mxy", (0.0, 5.0)),
    (PI / 2, "t_zz", "m1z_m2z", (-5.0, 5.0)),
)
EPSILON = 1e-3


def density_histograms(scale: Scale = DESK, epsilon: float = EPSILON):
    """Lattice histograms of every closed-form case, one pass per state."""
    out = {}
    for theta in sorted({c[0] for c in DENSITY_CASES}):
        ens = _lattice_ensemble(theta, 0.0, scale.lattice_n, scale.threads)
        cases = [c for c in DENSITY_CASES if c[0] == theta]
        specs = [HistogramSpec(f, lo, hi, epsilon) for _, f, _, (lo, hi) in cases]
        acc = ens.accumulate(specs)
        for k, ((_, f, name, _), sp) in enumerate(zip(cases, specs)):
            out[(theta, f)] = (_hist_from(acc, k, sp, f), oracles.overlay_for(name, ens.state))
    return out


def _hist_from(acc, k, spec, name):
    nb = spec.n_bins
    clip = pairwise_sum(acc.hist_clip[:, k, :])
    return Histogram1D(spec.mu_min, spec.mu_min + nb * spec.bin_width, spec.bin_width,
                       pairwise_sum(acc.hist_w[:, k, :nb]), pairwise_sum(acc.hist_w2[:, k, :nb]),
                       float(pairwise_sum(acc.totals[:, 0])), float(clip[0]), float(clip[1]),
                       observable=name)


def sup_error(hist, dist, epsilon: float = EPSILON) -> tuple[float, float]:
    """Largest |estimate - bin-averaged closed form| away from the kinks, and its location."""
    ref = dist.bin_average(hist.edges)
    lo, hi = hist.edges[:-1], hist.edges[1:]
    keep = np.ones(len(ref), dtype=bool)
    for k in dist.kinks:
        keep &= (hi <= k - 2 * epsilon) | (lo >= k + 2 * epsilon)
    err = np.abs(hist.density - ref)
    err[~keep] = 0.0
    i = int(np.argmax(err))
    return float(err[i]), float(hist.centers[i])


def criterion_2(scale: Scale = DESK) -> CriterionResult:
    chk = _Checks()
    for (theta, f), (hist, dist) in density_histograms(scale).items():
        e, at = sup_error(hist, dist)
        chk.flag(f"theta={theta:.4f} {f} sup-norm", e <= 1e-2,
                 f"{e:.3e} <= 1.0e-02 (worst bin at mu={at:.4f}; clipped "
                 f"{hist.clipped_fraction:.1e})")
    return chk.result(2, "closed-form densities")


# --- 3, 4 ----------------------------------------------------------------------

def criterion_3(scale: Scale = DESK) -> CriterionResult:
    chk = _Checks()
    for theta in THETAS:
        for phi in PHIS:
            ens = _grid(scale, theta, phi)
            m = dict(zip(["m1z", "m1_len_sq", "m1_xy"], ens.means(["m1z", "m1_len_sq", "m1_xy"])))
            tag = f"theta={theta:.4f} phi={phi:.4f}"
            chk.close(f"{tag} <M1z>", m["m1z"], 0.5 * math.cos(theta), 1e-3)
            chk.close(f"{tag} <|M1|^2>", m["m1_len_sq"], 0.5, 1e-3)
            if theta == 0.0:
                chk.close(f"{tag} <Mxy>", m["m1_xy"], PI / 8, 2e-3)
            if theta == PI / 2:
                chk.close(f"{tag} <Mxy>", m["m1_xy"], PI / 6, 2e-3)
    return chk.result(3, "ensemble averages")


def criterion_4(scale: Scale = DESK) -> CriterionResult:
    chk = _Checks()
    for theta in THETAS:
        for phi in PHIS:
            q = float(_grid(scale, theta, phi).means(["qpot"])[0])
            chk.close(f"theta={theta:.4f} phi={phi:.4f} <Q>", q, 0.25, 1e-3)
    return chk.result(4, "virial theorem")


# --- 5, 6 ----------------------------------------------------------------------

def criterion_5(scale: Scale = DESK) -> CriterionResult:
    chk = _Checks()
    for phi in PHIS:
        ens = _grid(scale, PI / 2, phi)
        pred = oracles.bohmian_reference_ratios(ens.state)
        tensor = correlation_tensor(ens).raw
        tag = f"phi={phi:.4f}"
        chk.bound(f"{tag} max|T - (2/3) T_qm|", float(np.abs(tensor - pred.tensor).max()), 2e-3)
        dot, tot = ens.means(["m1_dot_m2", "m_sum_sq"])
        chk.close(f"{tag} <M1.M2>", float(dot), pred.m1_dot_m2, 2e-3)
        if phi == PI:
            chk.close(f"{tag} <(M1+M2)^2>", float(tot), 0.0, 2e-3)
    return chk.result(5, "two-thirds relations")


def criterion_6(scale: Scale = DESK) -> CriterionResult:
    chk = _Checks()
    for phi in PHIS:
        stats = angle_statistics(_grid(scale, PI / 2, phi))
        chk.close(f"theta=pi/2 phi={phi:.4f} <cos Phi>", stats.cos_big_phi.value,
                  (2 * math.cos(phi) - 1) / 3, 2e-3)
        if phi == PI:
            chk.close("singlet Delta cos Phi", stats.delta_cos_big_phi, 0.0, 1e-3)
    chk.close("theta=0 <cos Phi>", angle_statistics(_grid(scale, 0.0, 0.0)).cos_big_phi.value,
              -16 / 25, 2e-3)
    theta = PI / 3
    cb = []
    for phi in (0.0, PI / 4, PI / 2):
        st = angle_statistics(_grid(scale, theta, phi))
        cb.append((phi, st))
    # C_B from each phi; decoupling means a common C_B and no quadrature component
    vals = [(s.c_b.value, s.c_b.std_error + SE_FLOOR) for _, s in cb]
    for (phi, s), (v, e) in zip(cb, vals):
        ortho = -s.cos_az.value * math.sin(phi) + s.sin_az.value * math.cos(phi)
        ortho_se = math.hypot(s.cos_az.std_error * math.sin(phi),
                              s.sin_az.std_error * math.cos(phi)) + SE_FLOOR
        chk.flag(f"theta=pi/3 phi={phi:.4f} <sin(phi_rel - phi)> = 0", abs(ortho) <= 3 * ortho_se,
                 f"{ortho:.3e} vs 3 se {3 * ortho_se:.3e}")
    for i in range(len(vals)):
        for j in range(i + 1, len(vals)):
            d = abs(vals[i][0] - vals[j][0])
            se = math.hypot(vals[i][1], vals[j][1])
            chk.flag(f"common C_B phi={cb[i][0]:.4f} vs {cb[j][0]:.4f}", d <= 3 * se,
                     f"|{vals[i][0]:.6f} - {vals[j][0]:.6f}| = {d:.2e} vs 3 se {3 * se:.2e}")
    return chk.result(6, "momentum geometry")


# --- 7 -------------------------------------------------------------------------

H_MAXENT = math.log2(1.25 * math.exp(0.25))


def criterion_7(scale: Scale = DESK) -> CriterionResult:
    chk = _Checks()
    hist, _ = density_histograms(scale)[(PI / 2, "m1z")]
    h = entropy.differential_entropy(hist)
    chk.close("h(theta=pi/2)", h, H_MAXENT, 5e-3)
    chk.close("H_8 - 8", entropy.discretized_entropy(hist, 8) - 8, H_MAXENT, 1e-2)
    for theta, want in ((0.0, 0.0), (PI / 2, 1.0), (PI, 0.0)):
        got = entropy.entanglement_of_formation(PairStateParams(theta, 0.0))
        chk.flag(f"eof(theta={theta:.4f})", got == want, f"{got!r} == {want!r}")
    return chk.result(7, "entropies")


# --- 8 -------------------------------------------------------------------------

def criterion_8(scale: Scale = DESK) -> CriterionResult:
    chk = _Checks()
    setup = bell.PolarizerSetup.optimal_singlet()
    singlet = PairStateParams(PI / 2, PI)
    qm = bell.chsh_value(setup, lambda a, b: bell.qm_correlator(singlet, a, b))
    chk.close("CHSH (quantum, optimal singlet setup)", qm, 2 * math.sqrt(2), 1e-12)
    ens = _grid(scale, PI / 2, PI)
    bohm = bell.bohm_chsh(setup, ens)
    chk.close("CHSH (Bohmian, theta=pi/2)", bohm.value, 2 * math.sqrt(2), 5e-3)
    rng = np.random.default_rng(8)
    for phi in PHIS:
        ens = _grid(scale, PI / 2, phi)
        worst = 0.0
        for _ in range(scale.n_setups):
            a, b = rng.standard_normal((2, 3))
            a /= np.linalg.norm(a)
            b /= np.linalg.norm(b)
            r = bell.bohm_correlator(ens.state, a, b, ens)
            c = bell.qm_correlator(ens.state, a, b)
            worst = max(worst, abs(r.value - c) / (3 * (r.std_error + SE_FLOOR)))
        chk.flag(f"phi={phi:.4f} max |B - C| / (3 se) over {scale.n_setups} setups", worst <= 1.0,
                 f"{worst:.3f} <= 1")
    return chk.result(8, "Bell correlators")


# --- 9 -------------------------------------------------------------------------

def criterion_9(scale: Scale = DESK) -> CriterionResult:
    chk = _Checks()
    product = PairStateParams(0.0, 0.0)
    start = np.array([1.1, 0.4, 0.3, 2.0, 1.3, 0.2])
    tau = dynamics.precession_time(start[0])
    tau2 = 4.0 * math.sin(0.5 * start[3]) ** 2
    times = np.linspace(0.0, 10 * tau, 201)
    traj = dynamics.integrate(product, start, dynamics.IntegratorSpec(t_end=10 * tau), times)
    exact = np.column_stack([np.full_like(times, start[0]), start[1] - times / tau,
                             start[2] - times / tau, np.full_like(times, start[3]),
                             start[4] + times / tau2, start[5] - times / tau2])
    chk.bound("theta=0 max |lambda - exact| over 10 tau", float(np.abs(traj.states - exact).max()),
              1e-8)

    spec = dynamics.IntegratorSpec(rel_tol=1e-10, abs_tol=1e-12, t_end=20.0)
    for phi in (0.0, PI):
        st = PairStateParams(PI / 2, phi)
        for k in range(3):
            y0 = _random_configs(1, seed=100 + k)[0]
            tr = dynamics.integrate(st, y0, spec, np.linspace(0.0, spec.t_end, 81))
            drift = dynamics.conservation_drift(tr, st)
            chk.bound(f"phi={phi:.4f} start {k} max drift per unit time",
                      max(drift.values()), 1e-8)
    st = PairStateParams(PI / 3, PI / 4)
    y0 = _random_configs(1, seed=7)[0]
    end, back = dynamics.retrace(st, y0, spec)
    tight = dynamics.IntegratorSpec(rel_tol=1e-13, abs_tol=1e-15, t_end=spec.t_end)
    ref = dynamics.integrate(st, y0, tight, [spec.t_end]).states[-1]
    fwd_err = float(np.abs(end - ref).max())
    ret_err = float(np.abs(back - y0).max())
    chk.flag("retrace within 10x forward error", ret_err <= 10 * max(fwd_err, 1e-13),
             f"retrace {ret_err:.2e}, forward {fwd_err:.2e}")
    return chk.result(9, "trajectories")


# --- 10 ------------------------------------------------------------------------

def _cli_bytes(args: list[str], threads: int) -> bytes:
    env = dict(os.environ)
    env.pop("BOHMPAIR_THREADS", None)
    out = subprocess.run([sys.executable, "-m", "bohmpair.cli", *args, "--threads", str(threads)],
                         check=True, capture_output=True, env=env)
    return out.stdout


def criterion_10(scale: Scale = DESK) -> CriterionResult:
    chk = _Checks()
    n = str(scale.determinism_grid_n)
    runs = {
        "corr grid": ["corr", "--theta", "60deg", "--phi", "45deg", "--grid", n, "--format", "json"],
        "dist lattice": ["dist", "--observable", "m1z", "--theta", "90deg", "--sampler", "lattice",
                         "--grid", n, "--format", "csv"],
        "dist mc": ["dist", "--observable", "m_len_sq", "--sampler", "mc", "--samples", "300000",
                    "--seed", "5", "--format", "csv"],
    }
    for name, args in runs.items():
        outputs = {t: _cli_bytes(args, t) for t in (1, 2, 4)}
        same = len(set(outputs.values())) == 1
        chk.flag(f"{name}: threads 1/2/4 byte-identical", same,
                 f"{len(outputs[1])} bytes" if same else "outputs differ")
    return chk.result(10, "determinism across thread counts")


CRITERIA: dict[int, Callable[[Scale], CriterionResult]] = {
    1: criterion_1, 2: criterion_2, 3: criterion_3, 4: criterion_4, 5: criterion_5,
    6: criterion_6, 7: criterion_7, 8: criterion_8, 9: criterion_9, 10: criterion_10,
}


def run(numbers=None, scale: Scale = DESK, stream=None) -> list[CriterionResult]:
    results = []
    for k in numbers or sorted(CRITERIA):
        r = CRITERIA[k](scale)
        results.append(r)
        if stream is not None:
            print(r.report(), file=stream, flush=True)
    return results


def summary_json(results: list[CriterionResult]) -> str:
    return json.dumps([{"criterion": r.number, "name": r.name, "passed": r.passed,
                        "checks": [{"check": c, "passed": ok, "detail": d}
                                   for c, ok, d in r.checks]} for r in results], indent=2)
