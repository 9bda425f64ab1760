"""Throughput of the compiled kernels against the numpy fallback.

    python3 benchmarks/bench_kernels.py [--grid 24] [--lattice 300000] [--repeat 3]
"""

import argparse
import time

from bohmpair.ensemble.engine import HistogramSpec, accumulate
from bohmpair.ensemble.kernels import BACKENDS
from bohmpair.ensemble.sampling import GridSpec, LatticeSpec, McSpec
from bohmpair.rotor import PairStateParams

HIST = (HistogramSpec("m1z", -5, 5, 1e-3), HistogramSpec("t_zz", -5, 5, 1e-3))


def best_of(repeat, fn):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--grid", type=int, default=24)
    ap.add_argument("--lattice", type=int, default=300_000)
    ap.add_argument("--mc", type=int, default=100_000)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--threads", type=int, default=1)
    args = ap.parse_args()

    state = PairStateParams(1.0, 0.5)
    samplers = {"grid": GridSpec.cube(args.grid),
                "lattice": LatticeSpec(n_points=args.lattice, chunk_size=1 << 16),
                "mc": McSpec(args.mc, seed=1)}
    sizes = {"grid": args.grid**4, "lattice": args.lattice, "mc": args.mc}
    print(f"{'sampler':8s} {'backend':8s} {'points':>10s} {'seconds':>9s} {'ns/point':>9s} {'speedup':>8s}")
    for name, spec in samplers.items():
        base = None
        for backend in ("python", "cython"):
            if backend not in BACKENDS:
                print(f"{name:8s} {backend:8s} {'(not built)':>10s}")
                continue
            t = best_of(args.repeat, lambda: accumulate(state, spec, HIST, threads=args.threads,
                                                          backend=backend))
            base = base or t
            print(f"{name:8s} {backend:8s} {sizes[name]:10d} {t:9.3f} {1e9 * t / sizes[name]:9.1f} "
                  f"{base / t:7.1f}x")


if __name__ == "__main__":
    main()
