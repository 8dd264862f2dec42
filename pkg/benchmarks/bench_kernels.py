"""Time the jitted kernels against their pure-numpy fallbacks.

Runs both implementations of the two hot kernels (ADC accumulation and PQ
subspace encoding) on realistic shapes and prints a small table with the
speedup. The library picks the jitted path automatically; setting
``BITEXTMINE_NO_NUMBA=1`` forces the numpy path at import time, and this
script times both paths directly regardless of the flag.

Usage: python3 benchmarks/bench_kernels.py [--rows N] [--repeats R]
"""
import argparse
import time

import numpy as np

from bitextmine import kernels


def best_of(fn, repeats):
    timings = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        timings.append(time.perf_counter() - t0)
    return min(timings)


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--rows", type=int, default=200_000,
                        help="code rows per ADC scan (default 200k)")
    parser.add_argument("--repeats", type=int, default=5,
                        help="timing repeats, best is reported (default 5)")
    args = parser.parse_args()

    rng = np.random.default_rng(0)
    m, k, sub_dim = 64, 256, 12
    codes = rng.integers(0, k, size=(args.rows, m), dtype=np.uint8)
    lut = rng.standard_normal((m, k))
    sub_vectors = rng.standard_normal((args.rows // 2, sub_dim))
    centroids = rng.standard_normal((k, sub_dim))

    cases = [
        (
            f"adc_accumulate ({args.rows}x{m})",
            lambda: kernels.adc_accumulate_numpy(codes, lut),
            (lambda: kernels._adc_accumulate_jit(codes, lut))
            if kernels.HAS_NUMBA
            else None,
        ),
        (
            f"encode_subspace ({args.rows // 2}x{sub_dim}, k={k})",
            lambda: kernels.encode_subspace_numpy(sub_vectors, centroids),
            (lambda: kernels._encode_subspace_jit(sub_vectors, centroids))
            if kernels.HAS_NUMBA
            else None,
        ),
    ]

    print(f"numba available: {kernels.HAS_NUMBA}; "
          f"selected path: {'jit' if kernels.numba_enabled() else 'numpy'} "
          f"(set {kernels.ENV_FLAG}=1 to force numpy)")
    print(f"{'kernel':44} {'numpy':>10} {'jit':>10} {'speedup':>8}")
    for name, numpy_fn, jit_fn in cases:
        t_numpy = best_of(numpy_fn, args.repeats)
        if jit_fn is None:
            print(f"{name:44} {t_numpy * 1e3:9.2f}ms {'n/a':>10} {'n/a':>8}")
            continue
        jit_fn()  # compile outside the timed region
        t_jit = best_of(jit_fn, args.repeats)
        drift = float(np.max(np.abs(
            np.asarray(numpy_fn(), dtype=np.float64)
            - np.asarray(jit_fn(), dtype=np.float64)
        )))
        print(f"{name:44} {t_numpy * 1e3:9.2f}ms {t_jit * 1e3:8.2f}ms "
              f"{t_numpy / t_jit:7.1f}x  (max |diff| {drift:.2e})")


if __name__ == "__main__":
    main()
