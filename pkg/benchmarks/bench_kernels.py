"""Time the numba and numpy backends of the hot kernels.

Run with ``python3 benchmarks/bench_kernels.py``.  Each kernel is warmed up
once per backend (so numba compilation is excluded), then timed as the best
of ``--repeat`` runs.  Both backends are checked against each other.
"""

import argparse
import time

import numpy as np

from lambdacool import _kernels
from lambdacool.core import hz
from lambdacool.rir import thermal_distribution


def best_of(fn, repeat):
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_recoil_sum(n_delta, repeat):
    omega_r = hz(3.77e3)
    gamma = hz(10e3)
    grid = thermal_distribution(21e-6, omega_r, gamma_coh=gamma)
    delta = np.linspace(hz(-600e3), hz(600e3), n_delta)
    results = {}
    times = {}
    for backend in ("numba", "numpy"):
        _kernels.set_backend(backend)
        results[backend] = _kernels.recoil_sum(delta, grid.p_values, grid.weights, omega_r, gamma)
        times[backend] = best_of(
            lambda: _kernels.recoil_sum(delta, grid.p_values, grid.weights, omega_r, gamma), repeat)
    diff = np.max(np.abs(results["numba"] - results["numpy"])) / np.max(np.abs(results["numpy"]))
    return f"recoil_sum  {n_delta} x {grid.n_points}", times, diff


def bench_rir_rhs(repeat, calls=200):
    omega_r = hz(3.77e3)
    gamma = hz(10e3)
    grid = thermal_distribution(21e-6, omega_r, gamma_coh=gamma)
    n = grid.n_points
    p = grid.p_values
    fp = np.ascontiguousarray(4 * omega_r * (2 * p + 1))
    fm = np.ascontiguousarray(4 * omega_r * (2 * p - 1))
    pi_th = (1e8 * grid.weights).astype(complex)
    rng = np.random.default_rng(0)
    y = rng.normal(size=3 * n) + 1j * rng.normal(size=3 * n)
    args = (y, n, grid.steps_per_recoil, fp, fm, gamma, 0.1 * gamma, 1e3 + 2e2j, pi_th)
    results = {}
    times = {}
    for backend in ("numba", "numpy"):
        _kernels.set_backend(backend)
        results[backend] = _kernels.rir_rhs(*args)

        def loop():
            for _ in range(calls):
                _kernels.rir_rhs(*args)

        times[backend] = best_of(loop, repeat) / calls
    diff = np.max(np.abs(results["numba"] - results["numpy"])) / np.max(np.abs(results["numpy"]))
    return f"rir_rhs     3 x {n} (per call)", times, diff


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n-delta", type=int, default=4001)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    if _kernels.numba is None:
        raise SystemExit("numba is not importable; nothing to compare")
    original = _kernels.get_backend()
    try:
        rows = [bench_recoil_sum(args.n_delta, args.repeat), bench_rir_rhs(args.repeat)]
    finally:
        _kernels.set_backend(original)
    print(f"{'kernel':34s} {'numba [s]':>11s} {'numpy [s]':>11s} {'speedup':>8s} {'max rel diff':>13s}")
    for name, t, diff in rows:
        print(f"{name:34s} {t['numba']:11.3e} {t['numpy']:11.3e} "
              f"{t['numpy'] / t['numba']:8.1f} {diff:13.2e}")


if __name__ == "__main__":
    main()
