"""Time the compiled and NumPy LLG kernels on the two device grids.

    python3 benchmarks/bench_kernels.py [--steps N]
"""

import argparse
import time

import numpy as np

from dwlink import _backend
from dwlink.device import BENCHMARK_GEOMETRY, CIRCUIT_GEOMETRY, init_racetrack
from dwlink.magnetics import LLGSolver, MaterialParams


def time_backend(name, geom, p, steps, repeats=3):
    kern = _backend.get_kernels(name)
    best = np.inf
    for _ in range(repeats):
        g = init_racetrack(geom, p, "down-left", 40e-9, relax_steps=0)
        s = LLGSolver(g, p, kernel_module=kern)
        t0 = time.perf_counter()
        s.run(steps, 1e12)
        best = min(best, time.perf_counter() - t0)
    return best / steps, g.m


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--steps", type=int, default=200)
    args = ap.parse_args()
    p = MaterialParams()
    names = _backend.available_backends()
    print(f"{'grid':>8s} {'backend':>8s} {'us/step':>10s} {'speedup':>8s} {'max |dm|':>10s}")
    for label, geom in (("100x10", CIRCUIT_GEOMETRY), ("100x80", BENCHMARK_GEOMETRY)):
        res = {n: time_backend(n, geom, p, args.steps) for n in names}
        base = res["numpy"][0]
        for n in names:
            t, m = res[n]
            dm = np.max(np.abs(m - res["numpy"][1]))
            print(f"{label:>8s} {n:>8s} {t * 1e6:10.1f} {base / t:8.1f} {dm:10.2e}")


if __name__ == "__main__":
    main()
