"""Compare the numba kernels against the pure-numpy fallbacks.

Run with the package installed:

    python3 benchmarks/bench_kernels.py

Set RECOVER_NO_NUMBA=1 to confirm the fallback path is what the library then
uses end to end (the timings below always measure both implementations).
"""

import time

import numpy as np

from sparseinterp import _kernels as K


def timeit(fn, *args, repeat=5):
    fn(*args)  # warm up (and trigger jit compilation)
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    rng = np.random.default_rng(0)
    n = 2_000_000
    times = rng.uniform(0.0, 1.0, n)
    freqs = rng.uniform(-1000, 1000, 4)
    coeffs = rng.normal(size=4) + 1j * rng.normal(size=4)
    bits = times.view(np.uint64)
    table = rng.normal(size=16385)

    print(f"numba available: {K._HAS_NUMBA}, in use: {K.USE_NUMBA}")
    print(f"arrays: {n} samples, 4 tones\n")

    rows = [
        ("tone_sum", (freqs, coeffs, times),
         K._tone_sum_np, getattr(K, "_tone_sum_nb", None)),
        ("prf_gauss", (np.uint64(7), bits, 0.5),
         K._prf_gauss_np, getattr(K, "_prf_gauss_nb", None)),
        ("table_cubic", (table, -0.25, 1.5 / 16384, times),
         K._table_cubic_np, getattr(K, "_table_cubic_nb", None)),
    ]
    for name, args, np_fn, nb_fn in rows:
        t_np = timeit(np_fn, *args)
        if nb_fn is not None:
            t_nb = timeit(nb_fn, *args)
            print(f"{name:12s}  numpy {t_np * 1e3:8.2f} ms   "
                  f"numba {t_nb * 1e3:8.2f} ms   speedup {t_np / t_nb:5.2f}x")
        else:
            print(f"{name:12s}  numpy {t_np * 1e3:8.2f} ms   (numba unavailable)")


if __name__ == "__main__":
    main()
