"""Time the numba kernels against the numpy fallback.

    python benchmarks/bench_kernels.py [--repeat N]

Both backends are imported directly, so RYDSUB_NUMBA has no effect here.
The first numba call (compilation) is excluded from the timings.
"""

import argparse
import time

import numpy as np

from rydsub import _kernels_nb, _kernels_np


def _cases(rng, n):
    for _ in range(n):
        k = int(rng.integers(1, 5))
        yield np.sort(rng.uniform(0.5, 19.5, k)), np.sort(rng.uniform(0.5, 19.5, k)), \
            float(rng.uniform(0.1, 6.0))


def _time(fn, repeat):
    best = np.inf
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t)
    return best


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--configs", type=int, default=200)
    args = ap.parse_args()

    cases = list(_cases(np.random.default_rng(0), args.configs))
    rng = np.random.default_rng(1)
    outcomes = rng.integers(0, 5, (20000, 12))
    counts = rng.integers(0, 13, 20000)

    jobs = {
        "phi (split)": lambda m: [m.phi_kernel(x, y, d, 20.0, 1e-10, 1e9, 0) for x, y, d in cases],
        "phi (direct)": lambda m: [m.phi_kernel(x, y, d, 20.0, 1e-10, 1e9, 1) for x, y, d in cases],
        "exponent": lambda m: [m.exponent_kernel(x, 20.0, d, 1e-10, 1e9) for x, _, d in cases],
        "rk4 h=1/64": lambda m: [m.rk4_field(x, d, 20.0, 1 / 64, 1e9) for x, _, d in cases[:20]],
        "tally": lambda m: m.tally_decohered(outcomes, counts, 4),
    }
    print(f"{'kernel':<14}{'numpy [s]':>12}{'numba [s]':>12}{'speed-up':>10}")
    for name, job in jobs.items():
        job(_kernels_nb)  # compile
        t_np = _time(lambda: job(_kernels_np), args.repeat)
        t_nb = _time(lambda: job(_kernels_nb), args.repeat)
        print(f"{name:<14}{t_np:>12.4f}{t_nb:>12.4f}{t_np / t_nb:>9.1f}x")


if __name__ == "__main__":
    main()
