"""Command-line front end.

Every output embeds the resolved configuration and the library version. Worker
count is left out of the embedded configuration because it does not change
any result, so outputs stay byte-identical across ``--threads``.

Exit codes: 0 success, 1 selftest failure, 2 invalid configuration,
3 an invariant monitor tripped, 4 the computation itself failed.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import re
import sys
from collections.abc import Sequence

import numpy as np

from . import __version__, acceptance, bell, dynamics, entropy, oracles
from .ensemble.engine import HistogramSpec
from .ensemble.estimators import (
    Ensemble,
    angle_statistics,
    correlation_tensor,
    estimate_density,
)
from .ensemble.features import feature_index
from .ensemble.sampling import GridSpec, LatticeSpec, McSpec
from .errors import BohmPairError
from .rotor import NODE_THRESHOLD, PairStateParams, density

SCHEMA = "bohmpair.result/1"
ENV_PREFIX = "BOHMPAIR_"
MONITOR_TOL = 1e-9

# observable -> (feature, range kind)
OBSERVABLES = {
    "m1x": ("m1x", "signed"),
    "m1z": ("m1z", "signed"),
    "m2z": ("m2z", "signed"),
    "m_len": ("m1_len", "positive"),
    "m_len_sq": ("m1_len_sq", "positive"),
    "mxy": ("m1_xy", "positive"),
    "m1x_m2x": ("t_xx", "signed"),
    "m1z_m2z": ("t_zz", "signed"),
    "norm_prod_z": ("n_zz", "unit"),
    "cos_polar": ("cos_polar1", "unit"),
}

_ANGLE = re.compile(r"^\s*([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)\s*(deg|rad)?\s*$")


class ConfigError(ValueError):
    pass


def parse_angle(text: str) -> float:
    """Radians from ``"1.2"``, ``"1.2rad"`` or ``"90deg"``."""
    m = _ANGLE.match(str(text))
    if not m:
        raise argparse.ArgumentTypeError(f"not an angle: {text!r} (use e.g. 90deg or 1.57rad)")
    value = float(m.group(1))
    return math.radians(value) if m.group(2) == "deg" else value


def _angle_list(text: str) -> list[float]:
    return [parse_angle(x) for x in text.split(",") if x.strip()]


def _env(name: str, default):
    return os.environ.get(ENV_PREFIX + name.upper().replace("-", "_"), default)


def _common_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("state and sampling")
    g.add_argument("--theta", type=parse_angle, default=parse_angle(_env("theta", "90deg")),
                   help="entanglement angle (default 90deg)")
    g.add_argument("--phi", type=parse_angle, default=parse_angle(_env("phi", "0")),
                   help="relative phase (default 0)")
    g.add_argument("--sampler", choices=("grid", "lattice", "mc"), default=_env("sampler", "grid"))
    g.add_argument("--grid", type=int, default=int(_env("grid", 128)),
                   help="points per axis of the grid; the lattice uses grid^4 nodes")
    g.add_argument("--samples", type=int, default=int(_env("samples", 10_000_000)),
                   help="Monte Carlo sample count")
    g.add_argument("--seed", type=int, default=int(_env("seed", 0)))
    g.add_argument("--bins", type=int, default=_opt_int(_env("bins", None)),
                   help="bin count; overrides --epsilon")
    g.add_argument("--epsilon", type=float, default=float(_env("epsilon", 1e-3)),
                   help="histogram bin width")
    g.add_argument("--mu-max", type=float, default=float(_env("mu_max", 5.0)),
                   help="histogram upper limit for unbounded observables")
    g.add_argument("--threads", type=int, default=int(_env("threads", os.cpu_count() or 1)))
    g.add_argument("--output", default=_env("output", "-"), help="output path, - for stdout")
    g.add_argument("--format", choices=("csv", "json"), default=_env("format", "json"))
    return p


def _opt_int(x):
    return None if x in (None, "") else int(x)


def build_parser() -> argparse.ArgumentParser:
    common = _common_parser()
    parser = argparse.ArgumentParser(prog="bohmpair", description=__doc__.splitlines()[0],
                                     parents=[common])
    parser.add_argument("--version", action="version", version=f"bohmpair {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    d = sub.add_parser("dist", parents=[common], help="histogram of one observable")
    d.add_argument("--observable", choices=sorted(OBSERVABLES), required=True)

    c = sub.add_parser("corr", parents=[common], help="correlation tensors and angle statistics")
    c.add_argument("--sweep", type=int, default=0,
                   help="evaluate at this many theta values from 0 to 90deg instead of --theta")

    e = sub.add_parser("entropy", parents=[common], help="entropies of the M1z distribution")
    e.add_argument("--nu", type=lambda s: [int(x) for x in s.split(",")], default=[2, 4, 6, 8])
    e.add_argument("--sweep", type=int, default=0)

    b = sub.add_parser("bell", parents=[common], help="CHSH with quantum and Bohmian correlators")
    b.add_argument("--optimal", action="store_true", help="coplanar setup 0, 90, 45, 315 deg")
    b.add_argument("--angles", type=_angle_list, default=None,
                   help="in-plane polarizer angles a,a',b,b' (unit suffix allowed)")
    b.add_argument("--random", type=int, default=0, help="also evaluate this many random setups")

    t = sub.add_parser("traj", parents=[common], help="integrate one trajectory")
    t.add_argument("--start", type=_angle_list, default=None,
                   help="a1,b1,g1,a2,b2,g2 (default: random from --seed)")
    t.add_argument("--t-end", type=float, default=10.0)
    t.add_argument("--points", type=int, default=201)
    t.add_argument("--rtol", type=float, default=1e-10)
    t.add_argument("--atol", type=float, default=1e-12)
    t.add_argument("--max-step", type=float, default=0.5)
    t.add_argument("--backward", action="store_true",
                   help="retrace to t=0 and report the return error")

    s = sub.add_parser("selftest", parents=[common], help="run the acceptance suite")
    s.add_argument("--quick", action="store_true", help="reduced scale smoke run")
    s.add_argument("--criteria", type=lambda x: [int(k) for k in x.split(",")], default=None)
    return parser


# --- plumbing ------------------------------------------------------------------

def _state(args) -> PairStateParams:
    try:
        return PairStateParams(args.theta, args.phi)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def _sampler(args):
    if args.sampler == "grid":
        return GridSpec.cube(args.grid)
    if args.sampler == "lattice":
        return LatticeSpec.cube(args.grid)
    return McSpec(args.samples, seed=args.seed)


def _config(args, **extra) -> dict:
    cfg = {"command": args.command, "theta": args.theta, "phi": args.phi}
    if args.command in ("dist", "corr", "entropy", "bell"):
        cfg["sampler"] = _sampler(args).to_dict()
        if args.sampler == "grid":
            cfg["error_estimate"] = "full minus half resolution"
        elif args.sampler == "mc":
            cfg["error_estimate"] = "batch means over chunks"
    cfg.update(extra)
    return cfg


def _monitors(ens: Ensemble) -> tuple[dict, bool]:
    mon = ens.summary().monitor_summary()
    ok = (mon["e1_residual"] <= MONITOR_TOL and mon["e2_residual"] <= MONITOR_TOL
          and mon["mz_sum_residual"] <= MONITOR_TOL and mon["min_len"] >= 0.5 - MONITOR_TOL)
    if abs(ens.state.theta - math.pi / 2) < 1e-12:
        ok = ok and mon["len_diff_abs"] <= MONITOR_TOL
    return mon, ok


def _envelope(config: dict, result, monitors: dict | None = None) -> dict:
    env = {"schema": SCHEMA, "version": __version__, "config": config}
    if monitors is not None:
        env["monitors"] = monitors
    env["result"] = result
    return env


def _csv_text(config: dict, header: list[str], rows, comments=()) -> str:
    buf = io.StringIO()
    buf.write(f"# bohmpair {__version__} {SCHEMA}\n")
    buf.write("# config: " + json.dumps(config, sort_keys=True) + "\n")
    for line in comments:
        buf.write(f"# {line}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(x) for x in row])
    return buf.getvalue()


def _fmt(x) -> str:
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def _emit(args, text: str) -> None:
    if args.output in ("-", ""):
        sys.stdout.write(text)
    else:
        with open(args.output, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def _json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=False, default=_json_default) + "\n"


def _json_default(x):
    if isinstance(x, np.ndarray):
        return x.tolist()
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    raise TypeError(type(x))


# --- subcommands ---------------------------------------------------------------

def _range(args, kind: str) -> tuple[float, float]:
    if kind == "unit":
        return -1.0, 1.0
    if kind == "signed":
        return -args.mu_max, args.mu_max
    return 0.0, args.mu_max


def cmd_dist(args) -> int:
    state = _state(args)
    feature, kind = OBSERVABLES[args.observable]
    lo, hi = _range(args, kind)
    width = (hi - lo) / args.bins if args.bins else args.epsilon
    if not width > 0:
        raise ConfigError("bin width must be positive")
    spec = HistogramSpec(feature, lo, hi, width)
    ens = Ensemble(state, _sampler(args), threads=args.threads)
    hist = estimate_density(ens, feature, spec)
    avg = ens.average(feature)
    dist = oracles.overlay_for(args.observable, state)
    overlay = dist.bin_average(hist.edges) if dist is not None else None
    mon, ok = _monitors(ens)
    config = _config(args, observable=args.observable, mu_min=lo, mu_max=hi, bin_width=width)
    markers = {"ensemble_average": avg.to_dict(),
               "analytic_average": dist.moment(1) if dist is not None else None,
               "analytic_form": dist.kind.value if dist is not None else None,
               "clipped_below": hist.clipped_below / hist.total_weight,
               "clipped_above": hist.clipped_above / hist.total_weight}
    if args.format == "csv":
        header = ["mu", "density", "std_error"] + (["analytic"] if overlay is not None else [])
        dens, err = hist.density, hist.std_error
        rows = ([c, dens[k], err[k]] + ([overlay[k]] if overlay is not None else [])
                for k, c in enumerate(hist.centers))
        comments = [f"{k}: {json.dumps(v, default=_json_default)}" for k, v in markers.items()]
        comments.append("monitors: " + json.dumps(mon))
        _emit(args, _csv_text(config, header, rows, comments))
    else:
        result = {"mu": hist.centers, "density": hist.density, "std_error": hist.std_error,
                  "analytic": overlay, **markers}
        _emit(args, _json(_envelope(config, result, mon)))
    return 0 if ok else 3


def _corr_point(state: PairStateParams, args) -> tuple[dict, dict, bool]:
    ens = Ensemble(state, _sampler(args), threads=args.threads)
    tensor = correlation_tensor(ens)
    stats = angle_statistics(ens)
    qm = oracles.qm_reference(state)
    dot = ens.average("m1_dot_m2")
    tot = ens.average("m_sum_sq")
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(np.abs(qm.spin_tensor) > 1e-12, tensor.raw / qm.spin_tensor, np.nan)
    diag = {"tensor_ratio_to_qm": [[None if not np.isfinite(v) else float(v) for v in row]
                                   for row in ratio],
            "m1_dot_m2_ratio_to_qm": dot.value / qm.s1_dot_s2 if qm.s1_dot_s2 else None}
    if abs(state.theta - math.pi / 2) < 1e-12:
        pred = oracles.bohmian_reference_ratios(state)
        diag["predicted"] = {"tensor": pred.tensor, "m1_dot_m2": pred.m1_dot_m2,
                             "total_sq": pred.total_sq}
    mon, ok = _monitors(ens)
    out = {"theta": state.theta, "phi": state.phi, **tensor.to_dict(), **stats.to_dict(),
           "m1_dot_m2": dot.to_dict(), "total_sq": tot.to_dict(),
           "qm": {"spin_tensor": qm.spin_tensor, "s1_dot_s2": qm.s1_dot_s2, "eof": qm.eof},
           "two_thirds": diag}
    return out, mon, ok


def _thetas(args) -> list[float]:
    if args.sweep and args.sweep > 0:
        if args.sweep == 1:
            return [0.0]
        return [0.5 * math.pi * k / (args.sweep - 1) for k in range(args.sweep)]
    return [args.theta]


def cmd_corr(args) -> int:
    _state(args)
    points, monitors, ok = [], [], True
    for theta in _thetas(args):
        res, mon, good = _corr_point(PairStateParams(theta, args.phi), args)
        points.append(res)
        monitors.append(mon)
        ok &= good
    config = _config(args, sweep=args.sweep)
    if args.format == "csv":
        header = ["theta", "phi", "b_x", "b_x_err", "b_z", "b_z_err", "c_m", "c_m_err", "c_b",
                  "c_b_err", "cos_big_phi", "cos_big_phi_err", "delta_cos_big_phi",
                  "m1_dot_m2", "m1_dot_m2_err", "s1_dot_s2_qm"]
        header += [f"t_{i}{j}" for i in "xyz" for j in "xyz"]
        header += [f"n_{i}{j}" for i in "xyz" for j in "xyz"]
        rows = []
        for p in points:
            rows.append([p["theta"], p["phi"], p["b_x"]["value"], p["b_x"]["std_error"],
                         p["b_z"]["value"], p["b_z"]["std_error"], p["c_m"]["value"],
                         p["c_m"]["std_error"], p["c_b"]["value"], p["c_b"]["std_error"],
                         p["cos_big_phi"]["value"], p["cos_big_phi"]["std_error"],
                         p["delta_cos_big_phi"], p["m1_dot_m2"]["value"],
                         p["m1_dot_m2"]["std_error"], p["qm"]["s1_dot_s2"]]
                        + list(np.ravel(p["raw"])) + list(np.ravel(p["normalized"])))
        _emit(args, _csv_text(config, header, rows, ["monitors: " + json.dumps(monitors)]))
    else:
        _emit(args, _json(_envelope(config, points, monitors)))
    return 0 if ok else 3


def cmd_entropy(args) -> int:
    _state(args)
    reports, monitors, ok = [], [], True
    for theta in _thetas(args):
        state = PairStateParams(theta, args.phi)
        ens = Ensemble(state, _sampler(args), threads=args.threads, grid_errors=False)
        width = 2 * args.mu_max / args.bins if args.bins else args.epsilon
        hist = estimate_density(ens, "m1z", entropy.centered_spec("m1z", width, args.mu_max))
        rep = entropy.entropy_report(hist, state, args.nu)
        mon, good = _monitors(ens)
        ok &= good
        monitors.append(mon)
        reports.append({"theta": theta, "p1": state.p_up, **rep.to_dict(),
                        "h_nu_over_nu": [[n, h / n] for n, h in rep.h_nu],
                        "h_nu_minus_nu": [[n, h - n] for n, h in rep.h_nu]})
    config = _config(args, sweep=args.sweep, nu=args.nu, observable="m1z",
                     bin_width=(2 * args.mu_max / args.bins if args.bins else args.epsilon))
    if args.format == "csv":
        header = ["theta", "p1", "p_plus", "h_binary_pm", "eof", "h_diff"]
        header += [f"h_nu_{n}_over_nu" for n in args.nu]
        rows = [[r["theta"], r["p1"], r["p_plus"], r["h_binary_pm"], r["eof"], r["h_diff"]]
                + [v for _, v in r["h_nu_over_nu"]] for r in reports]
        _emit(args, _csv_text(config, header, rows, ["monitors: " + json.dumps(monitors)]))
    else:
        _emit(args, _json(_envelope(config, reports, monitors)))
    return 0 if ok else 3


def cmd_bell(args) -> int:
    state = _state(args)
    if args.angles is not None:
        if len(args.angles) != 4:
            raise ConfigError("--angles needs four values a,a',b,b'")
        a, ap, b, bp = args.angles
        setup = bell.PolarizerSetup(bell.in_plane(a), bell.in_plane(b), bell.in_plane(ap),
                                    bell.in_plane(bp))
    else:
        setup = bell.PolarizerSetup.optimal_singlet()
    ens = Ensemble(state, _sampler(args), threads=args.threads)

    def record(s: bell.PolarizerSetup) -> dict:
        pairs = {"ab": (s.a, s.b), "ab'": (s.a, s.b_prime), "a'b": (s.a_prime, s.b),
                 "a'b'": (s.a_prime, s.b_prime)}
        c = {k: bell.qm_correlator(state, *v) for k, v in pairs.items()}
        bb = {k: bell.bohm_correlator(state, *v, ens).to_dict() for k, v in pairs.items()}
        chsh_b = bell.bohm_chsh(s, ens)
        return {"setup": s.to_dict(), "C": c, "B": bb,
                "chsh_C": bell.chsh_value(s, lambda x, y: bell.qm_correlator(state, x, y)),
                "chsh_B": {"value": chsh_b.value, "std_error": chsh_b.std_error}}

    result = {"note": "B is a pre-measurement ensemble correlation of the momenta, "
                      "not a distribution of measurement outcomes",
              "setups": [record(setup)]}
    rng = np.random.default_rng(args.seed)
    for _ in range(args.random):
        result["setups"].append(record(bell.PolarizerSetup.random(rng)))
    mon, ok = _monitors(ens)
    config = _config(args, random_setups=args.random)
    if args.format == "csv":
        header = ["setup", "pair", "C", "B", "B_err", "chsh_C", "chsh_B", "chsh_B_err"]
        rows = []
        for k, r in enumerate(result["setups"]):
            for pair in r["C"]:
                rows.append([k, pair, r["C"][pair], r["B"][pair]["value"],
                             r["B"][pair]["std_error"], r["chsh_C"], r["chsh_B"]["value"],
                             r["chsh_B"]["std_error"]])
        _emit(args, _csv_text(config, header, rows, [result["note"], "monitors: " + json.dumps(mon)]))
    else:
        _emit(args, _json(_envelope(config, result, mon)))
    return 0 if ok else 3


def _random_start(state: PairStateParams, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    while True:
        y = np.array([math.acos(rng.uniform(-1, 1)), rng.uniform(0, 2 * math.pi),
                      rng.uniform(0, 4 * math.pi), math.acos(rng.uniform(-1, 1)),
                      rng.uniform(0, 2 * math.pi), rng.uniform(0, 4 * math.pi)])
        if float(density(state, y)) > NODE_THRESHOLD * 1e12:
            return y


def cmd_traj(args) -> int:
    state = _state(args)
    if args.start is not None:
        if len(args.start) != 6:
            raise ConfigError("--start needs six angles")
        y0 = np.array(args.start)
    else:
        y0 = _random_start(state, args.seed)
    spec = dynamics.IntegratorSpec(rel_tol=args.rtol, abs_tol=args.atol, max_step=args.max_step,
                                   t_end=args.t_end)
    times = np.linspace(0.0, args.t_end, max(2, args.points))
    traj = dynamics.integrate(state, y0, spec, times)
    pts = traj.points(state)
    extra = {"start": y0.tolist(), "t_end": args.t_end, "rtol": args.rtol, "atol": args.atol,
             "max_step": args.max_step, "points": len(times)}
    info = {"accepted_steps": traj.n_accepted, "rejected_steps": traj.n_rejected,
            "guard_rejections": traj.n_guard_rejections,
            "drift_per_unit_time": dynamics.conservation_drift(traj, state)}
    if args.backward:
        end, back = dynamics.retrace(state, y0, spec)
        info["retrace_error"] = float(np.abs(back - y0).max())
    drift = dict(info["drift_per_unit_time"])
    if abs(state.theta - math.pi / 2) > 1e-12:
        drift.pop("len_diff")  # conserved only at maximal entanglement
    ok = max(drift.values()) <= 1e-8
    residual_names = ["mz_sum", "e1_proj", "e2_proj", "energy", "len_diff"]
    header = (["t", "alpha1", "beta1", "gamma1", "alpha2", "beta2", "gamma2",
               "m1x", "m1y", "m1z", "m2x", "m2y", "m2z", "cos_big_phi", "qpot"]
              + [f"res_{k}" for k in residual_names])
    rows = []
    for p in pts:
        r = p.residuals(state)
        rows.append([p.t, *p.cfg.as_array(), *p.report.momenta.m1, *p.report.momenta.m2,
                     float(p.report.cos_big_phi), float(p.report.qpot)]
                    + [r[k] for k in residual_names])
    config = _config(args, **extra)
    if args.format == "csv":
        _emit(args, _csv_text(config, header, rows, [json.dumps(info)]))
    else:
        _emit(args, _json(_envelope(config, {"columns": header, "rows": rows, **info})))
    return 0 if ok else 3


def cmd_selftest(args) -> int:
    scale = acceptance.Scale(threads=args.threads)
    if args.quick:
        scale = acceptance.Scale(grid_n=32, lattice_n=32, n_random=20_000, n_setups=100,
                                 threads=args.threads)
    # reports go to stdout; --output additionally receives the JSON summary
    results = acceptance.run(args.criteria, scale, stream=sys.stdout)
    if args.output not in ("-", ""):
        _emit(args, acceptance.summary_json(results) + "\n")
    return 0 if all(r.passed for r in results) else 1


COMMANDS = {"dist": cmd_dist, "corr": cmd_corr, "entropy": cmd_entropy, "bell": cmd_bell,
            "traj": cmd_traj, "selftest": cmd_selftest}


def main(argv: Sequence[str] | None = None) -> int:
    try:
        return _main(argv)
    except BrokenPipeError:  # e.g. piped into head
        sys.stderr.close()
        return 0


def _main(argv: Sequence[str] | None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except ValueError as exc:  # malformed environment override
        parser.error(str(exc))
    if args.threads < 1:
        parser.error("--threads must be >= 1")
    try:
        return COMMANDS[args.command](args)
    except (ConfigError, KeyError) as exc:
        print(f"bohmpair: error: {exc}", file=sys.stderr)
        return 2
    except BohmPairError as exc:
        print(f"bohmpair: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 4
    except ValueError as exc:
        print(f"bohmpair: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
