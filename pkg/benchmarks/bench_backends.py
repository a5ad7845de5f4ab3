#!/usr/bin/env python3
"""Time each hot kernel under the numba build and the numpy fallback.

Run: python3 benchmarks/bench_backends.py [--repeats N]
"""

import argparse
import math
import time

import numpy as np

from photodetect_sim import _kernels as K
from photodetect_sim import backend


def bench_bs_matrix(fn):
    fn(30, math.sqrt(0.7), math.sqrt(0.3))


def bench_deadtime_scan(fn, data={}):
    if not data:
        rng = np.random.default_rng(0)
        data["times"] = np.sort(rng.uniform(0.0, 1.0, 1_000_000))
        data["uniforms"] = rng.uniform(size=1_000_000)
    fn(data["times"], data["uniforms"], 0.9, 2e-6)


def bench_conditioned_density(fn, data={}):
    if not data:
        rng = np.random.default_rng(1)
        data["weights"] = (rng.uniform(size=(192, 192)) < 0.2).astype(float)
        data["psi"] = rng.normal(size=(192, 192)) + 1j * rng.normal(size=(192, 192))
    fn(data["weights"], data["psi"], 0.05, 0.05, 0.05)


def bench_nport_enumerate(fn):
    fn(6, 8, 0.7)


CASES = {
    "bs_matrix (dim=30)": ("bs_matrix", bench_bs_matrix),
    "deadtime_scan (1e6 events)": ("deadtime_scan", bench_deadtime_scan),
    "conditioned_density (192 grid)": ("conditioned_density", bench_conditioned_density),
    "nport_enumerate (n=6, N=8)": ("nport_enumerate", bench_nport_enumerate),
}


def median_time(runner, fn, repeats):
    runner(fn)  # warm-up (includes jit compilation)
    samples = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        runner(fn)
        samples.append(time.perf_counter() - t0)
    return sorted(samples)[len(samples) // 2]


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()

    print(f"numba available: {backend.NUMBA_AVAILABLE}")
    print(f"{'kernel':<32} {'numpy':>12} {'numba':>12} {'speedup':>9}")
    for label, (name, runner) in CASES.items():
        numba_fn, numpy_fn = K.PAIRS[name]
        t_np = median_time(runner, numpy_fn, args.repeats)
        if numba_fn is None:
            print(f"{label:<32} {t_np * 1e3:>10.2f}ms {'-':>12} {'-':>9}")
            continue
        t_nb = median_time(runner, numba_fn, args.repeats)
        print(
            f"{label:<32} {t_np * 1e3:>10.2f}ms {t_nb * 1e3:>10.2f}ms "
            f"{t_np / t_nb:>8.1f}x"
        )


if __name__ == "__main__":
    main()
