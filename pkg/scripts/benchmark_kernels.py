#!/usr/bin/env python3
"""Benchmark the jitted kernels against the pure-numpy fallbacks.

The fallback is what you get with SAMPLERLANG_PURE_NUMPY=1; this script runs
both implementations in-process and checks they agree bit-for-bit.

Run: python3 scripts/benchmark_kernels.py [N]
"""
import sys
import time

import numpy as np

from samplerlang import kernels


def bench(label, fn, *args, repeats=5):
    fn(*args)  # warm-up (includes JIT compilation)
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = fn(*args)
        best = min(best, time.perf_counter() - t0)
    print(f"  {label:<28} {best * 1e3:9.3f} ms")
    return out


def main():
    n = int(sys.argv[1]) if len(sys.argv) > 1 else 5_000_000
    seed = kernels.derive_seed(kernels.DEFAULT_SEED, "bench")
    print(f"LCG state generation, n={n}")
    a = bench("numpy (affine doubling)", kernels._lcg_states_numpy, seed, n)
    if kernels.HAS_NUMBA:
        b = bench(
            "numba (sequential jit)",
            kernels._lcg_states_numba,
            np.uint64(seed),
            np.int64(n),
        )
        print(f"  bit-identical: {np.array_equal(a, b)}")
    else:
        print("  numba unavailable or disabled; fallback only")

    values = kernels.lcg_uniforms(seed, n)
    weights = np.ones(n)
    print(f"weighted prefix sums, n={n}")
    c = bench("numpy (cumsum)", kernels._weighted_sums_numpy, values, weights)
    if kernels.HAS_NUMBA:
        d = bench("numba (loop)", kernels._weighted_sums_numba, values, weights)
        close = np.allclose(c[0], d[0]) and np.allclose(c[1], d[1])
        print(f"  agree within float tolerance: {close}")


if __name__ == "__main__":
    main()
