#!/usr/bin/env python3
"""Benchmark the numba hot kernels against the pure-numpy fallback.

Usage:  python3 benchmarks/bench_kernels.py [--repeats N]

Sizes match the desk-scale operating point (64x64 images, 6x6 patches,
36x144 dictionary, 16-channel denoiser).  The first numba call in each
section includes JIT compilation unless a disk cache is already warm, so
each kernel is warmed up once before timing.
"""

import argparse
import time

import numpy as np

from blips._kernels import numba_impl, numpy_impl
from blips.patches import init_overcomplete_idct


def timeit(fn, repeats):
    fn()  # warmup (JIT compile / cache load)
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()
    rng = np.random.default_rng(0)

    rows = []

    # SOUP-DIL sweep: 36x144 dictionary over the patches of a 64x64 image
    P = rng.standard_normal((36, 4096)) + 1j * rng.standard_normal((36, 4096))
    D0 = init_overcomplete_idct(36, 144)
    Z0 = np.zeros((144, 4096), dtype=complex)

    def soup(mod):
        D, Z = D0.copy(), Z0.copy()
        mod.soup_sweep(P, D, Z, 0.2, True)

    rows.append(("soup_sweep 36x144x4096",
                 timeit(lambda: soup(numpy_impl), args.repeats),
                 timeit(lambda: soup(numba_impl), args.repeats)))

    # patch extract / aggregate on 64x64, 6x6 patches
    x = rng.standard_normal((64, 64)) + 1j * rng.standard_normal((64, 64))
    pm = rng.standard_normal((36, 4096)) + 1j * rng.standard_normal((36, 4096))
    rows.append(("extract_patches 64x64/6",
                 timeit(lambda: numpy_impl.extract_patches(x, 6), args.repeats),
                 timeit(lambda: numba_impl.extract_patches(x, 6), args.repeats)))
    rows.append(("aggregate_patches 64x64/6",
                 timeit(lambda: numpy_impl.aggregate_patches(pm, 6, 64, 64), args.repeats),
                 timeit(lambda: numba_impl.aggregate_patches(pm, 6, 64, 64), args.repeats)))

    # 3x3 periodic conv, 16 channels on 64x64
    xc = rng.standard_normal((16, 64, 64))
    w = rng.standard_normal((16, 16, 3, 3))
    b = rng.standard_normal(16)
    g = rng.standard_normal((16, 64, 64))
    rows.append(("conv3x3 fwd 16ch 64x64",
                 timeit(lambda: numpy_impl.conv3x3_forward(xc, w, b), args.repeats),
                 timeit(lambda: numba_impl.conv3x3_forward(xc, w, b), args.repeats)))
    rows.append(("conv3x3 bwd 16ch 64x64",
                 timeit(lambda: numpy_impl.conv3x3_backward(xc, w, g), args.repeats),
                 timeit(lambda: numba_impl.conv3x3_backward(xc, w, g), args.repeats)))

    # dart throwing on a 256 grid
    cand = np.stack([rng.integers(0, 256, 60000), rng.integers(0, 256, 60000)],
                    axis=1).astype(np.int64)
    rows.append(("dart_throw 60k cands r=4",
                 timeit(lambda: numpy_impl.dart_throw(cand, 4.0, 256, 256), args.repeats),
                 timeit(lambda: numba_impl.dart_throw(cand, 4.0, 256, 256), args.repeats)))

    name_w = max(len(r[0]) for r in rows)
    print(f"{'kernel':<{name_w}}  {'numpy':>10}  {'numba':>10}  {'speedup':>8}")
    for name, t_np, t_nb in rows:
        print(f"{name:<{name_w}}  {t_np * 1e3:>8.2f}ms  {t_nb * 1e3:>8.2f}ms  "
              f"{t_np / t_nb:>7.1f}x")


if __name__ == "__main__":
    main()
