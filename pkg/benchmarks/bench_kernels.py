"""Benchmark the numba-accelerated kernels against their pure fallbacks.

Run with the package installed:

    python benchmarks/bench_kernels.py

The same fallbacks are selected package-wide by SKOROKHOD_SDE_NO_NUMBA=1.
"""
import time

import numpy as np

from skorokhod_sde import _kernels


def timeit(fn, *args, repeat=5):
    best = float("inf")
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best, out


def main():
    rng = np.random.default_rng(0)

    print(f"numba enabled: {_kernels.NUMBA_ENABLED}")
    print(f"{'kernel':<22}{'size':>10}{'fallback':>12}{'accelerated':>14}{'speedup':>10}")

    w = np.cumsum(rng.standard_normal(1_000_000) * 0.03)
    w[0] = abs(w[0])
    _kernels.reflect_scan_1d(w[:10], 0.0)  # warm the JIT
    t_fast, (xi_f, phi_f) = timeit(_kernels.reflect_scan_1d, w, 0.0)
    t_py, (xi_p, phi_p) = timeit(_kernels._reflect_scan_py, w, 0.0, repeat=1)
    assert np.array_equal(phi_f, phi_p)
    print(f"{'reflect_scan_1d':<22}{w.size:>10}{t_py:>12.4f}{t_fast:>14.4f}{t_py / t_fast:>10.1f}")

    values = np.ascontiguousarray(rng.standard_normal((3000, 2)))
    times = np.linspace(0.0, 1.0, 3000)
    _kernels.holder_pair_max(values[:10], times[:10], 0.25)
    t_fast, h_f = timeit(_kernels.holder_pair_max, values, times, 0.25)
    t_np, h_n = timeit(_kernels._holder_max_np, values, times, 0.25, repeat=1)
    assert abs(h_f - h_n) < 1e-9 * max(1.0, abs(h_n))
    print(f"{'holder_pair_max':<22}{values.shape[0]:>10}{t_np:>12.4f}{t_fast:>14.4f}{t_np / t_fast:>10.1f}")


if __name__ == "__main__":
    main()
