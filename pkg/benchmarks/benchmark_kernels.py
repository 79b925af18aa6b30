"""Benchmark the numba step kernels against the pure-numpy fallback.

Runs both implementations of the split-step kernel and of the joint
state/derivative kernel over a range of lattice sizes, plus an end-to-end
Fisher-information trajectory, and prints per-step timings with speedups.

Usage:
    python3 benchmarks/benchmark_kernels.py [--steps 2000]

The numpy fallback timings are what you get with QWSENSE_NO_NUMBA=1.
"""

import argparse
import math
import time

import numpy as np

from qwsense import kernels
from qwsense.metrology import fisher_at_defect
from qwsense.walk import WalkParams, default_initial_state

PI = math.pi


def time_kernel(fn, args, steps):
    fn(*args)  # warm-up (numba compiles here)
    start = time.perf_counter()
    for _ in range(steps):
        fn(*args)
    return (time.perf_counter() - start) / steps


def bench_step(n, steps):
    rng = np.random.default_rng(n)
    amps = rng.normal(size=(n, 2)) + 1j * rng.normal(size=(n, 2))
    amps /= np.linalg.norm(amps)
    a1 = rng.uniform(-PI, PI, size=n)
    a2 = rng.uniform(-PI, PI, size=n)
    tables = (np.cos(a1 / 2), np.sin(a1 / 2), np.cos(a2 / 2), np.sin(a2 / 2))
    out = np.empty_like(amps)
    numpy_t = time_kernel(kernels.split_step_numpy, (amps, *tables, out), steps)
    rows = [("numpy", numpy_t, 1.0)]
    if kernels.NUMBA_ENABLED:
        numba_t = time_kernel(kernels.split_step_loops, (amps, *tables, out), steps)
        rows.append(("numba", numba_t, numpy_t / numba_t))
    return rows


def bench_pair(n, steps):
    rng = np.random.default_rng(n + 7)
    amps = rng.normal(size=(n, 2)) + 1j * rng.normal(size=(n, 2))
    amps /= np.linalg.norm(amps)
    damps = rng.normal(size=(n, 2)) + 1j * rng.normal(size=(n, 2))
    a1 = rng.uniform(-PI, PI, size=n)
    a2 = rng.uniform(-PI, PI, size=n)
    tables = (np.cos(a1 / 2), np.sin(a1 / 2), np.cos(a2 / 2), np.sin(a2 / 2))
    defect = (n - 1) // 2
    out, dout = np.empty_like(amps), np.empty_like(amps)
    args = (amps, damps, *tables, defect, out, dout)
    numpy_t = time_kernel(kernels.split_step_pair_numpy, args, steps)
    rows = [("numpy", numpy_t, 1.0)]
    if kernels.NUMBA_ENABLED:
        numba_t = time_kernel(kernels.split_step_pair_loops, args, steps)
        rows.append(("numba", numba_t, numpy_t / numba_t))
    return rows


def bench_trajectory():
    """End-to-end FI series (t <= 100), the workload behind the experiments."""
    params = WalkParams(0.9 * PI, 0.75 * PI, -0.55 * PI, 203)
    initial = default_initial_state(203)
    fisher_at_defect(params, initial, 100)  # warm-up
    start = time.perf_counter()
    reps = 20
    for _ in range(reps):
        fisher_at_defect(params, initial, 100)
    return (time.perf_counter() - start) / reps


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--steps", type=int, default=2000, help="kernel calls per timing")
    args = parser.parse_args()

    print(f"active backend: {kernels.BACKEND}")
    if not kernels.NUMBA_ENABLED:
        print("numba unavailable or disabled; only the numpy path is timed\n")

    for label, bench in (("split_step", bench_step), ("split_step_pair", bench_pair)):
        print(f"\n{label}  (per call, averaged over {args.steps} calls)")
        print(f"  {'N':>6}  {'impl':<6} {'time':>10}   speedup")
        for n in (203, 1001, 5001):
            for impl, seconds, speedup in bench(n, args.steps):
                print(f"  {n:>6}  {impl:<6} {seconds * 1e6:9.2f}us   {speedup:6.2f}x")

    per_series = bench_trajectory()
    print(f"\nfisher_at_defect, N=203, 100 steps (backend={kernels.BACKEND}): "
          f"{per_series * 1e3:.2f} ms per series")


if __name__ == "__main__":
    main()
