"""Benchmark the jitted hot kernels against their pure-numpy fallbacks.

Run:
    python benchmarks/bench_accel.py

The same comparison is what SPHERELAB_NO_NUMBA=1 switches at import
time; here both paths are timed in one process (the jitted functions are
warmed up first so compilation is not measured).
"""

import time

import numpy as np

from spherelab import _accel


def timeit(fn, *args, repeat=5):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def bench_monomial_matrix(rng):
    points = rng.standard_normal((40_000, 2)) + 1j * rng.standard_normal((40_000, 2))
    alphas = np.array([(i, j) for m in range(10, 36) for i in range(m + 1) for j in [m - i]][:600],
                      dtype=np.int64)
    scale = rng.uniform(0.5, 2.0, alphas.shape[0])
    if _accel.USE_NUMBA:
        _accel._monomial_matrix_nb(points[:64], alphas, scale)  # warm up
        t_nb = timeit(_accel._monomial_matrix_nb, points, alphas, scale)
    else:
        t_nb = float("nan")
    t_np = timeit(_accel._monomial_matrix_np, points, alphas, scale)
    check = np.allclose(_accel._monomial_matrix_np(points[:256], alphas, scale),
                        _accel.monomial_matrix(points[:256], alphas, scale))
    return "monomial_matrix (40k x 600)", t_np, t_nb, check


def bench_band_power_sum(rng):
    q = (rng.standard_normal(400_000) + 1j * rng.standard_normal(400_000)) * 0.4
    ms = np.arange(17, 97, dtype=np.int64)
    coeffs = (10.0 ** rng.uniform(-10, 2, ms.size)).astype(np.complex128)
    if _accel.USE_NUMBA:
        _accel._band_power_sum_nb(q[:64], ms, coeffs)
        t_nb = timeit(_accel._band_power_sum_nb, q, ms, coeffs)
    else:
        t_nb = float("nan")
    t_np = timeit(_accel._band_power_sum_np, q, ms, coeffs)
    check = np.allclose(_accel._band_power_sum_np(q[:512], ms, coeffs),
                        _accel.band_power_sum(q[:512], ms, coeffs))
    return "band_power_sum (400k x 80)", t_np, t_nb, check


def bench_regularized_sums(rng):
    n = 1_000_000
    w = rng.uniform(0.0, 1.0, n)
    numer = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    fsq = rng.uniform(0.0, 1.0, n)
    deltas = np.array([1e-2, 1e-3, 1e-4, 1e-5, 1e-6])
    if _accel.USE_NUMBA:
        _accel._regularized_sums_nb(w[:64], numer[:64], fsq[:64], deltas)
        t_nb = timeit(_accel._regularized_sums_nb, w, numer, fsq, deltas)
    else:
        t_nb = float("nan")
    t_np = timeit(_accel._regularized_sums_np, w, numer, fsq, deltas)
    a = _accel._regularized_sums_np(w, numer, fsq, deltas)
    b = _accel.regularized_sums(w, numer, fsq, deltas)
    return "regularized_sums (1M x 5)", t_np, t_nb, np.allclose(a, b)


def main():
    rng = np.random.default_rng(1)
    print(f"numba path active: {_accel.USE_NUMBA}")
    print(f"{'kernel':<30} {'numpy [s]':>10} {'numba [s]':>10} {'speedup':>8}  agree")
    for bench in (bench_monomial_matrix, bench_band_power_sum, bench_regularized_sums):
        name, t_np, t_nb, check = bench(rng)
        speed = t_np / t_nb if t_nb == t_nb else float("nan")
        print(f"{name:<30} {t_np:>10.4f} {t_nb:>10.4f} {speed:>7.1f}x  {check}")


if __name__ == "__main__":
    main()
