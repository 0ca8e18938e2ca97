"""Compare the compiled kernels with the numpy fallback.

    python3 benchmarks/bench_kernels.py [--repeat N]
"""

import argparse
import timeit

import numpy as np

from collabradar import _fallback

try:
    from collabradar import _kernels
except ImportError:
    _kernels = None


def cases(rng):
    t, d = 20_000, 32
    a = rng.standard_normal((t, d)) + 1j * rng.standard_normal((t, d))
    b = rng.standard_normal((t, d)) + 1j * rng.standard_normal((t, d))
    m = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    n = 40_000
    s = np.sort(rng.standard_normal(n))
    group = np.arange(n, dtype=np.int_)
    label = rng.integers(0, 2, n).astype(np.uint8)
    counts = rng.poisson(1.0, (50, n)).astype(float)
    return {
        "bilinear_rows (20000 x 32)": ("bilinear_rows", (a, m, b)),
        "grouped_auc (40000)": ("grouped_auc", (group, label, np.ones(n))),
        "bootstrap_auc (50 x 40000)": ("bootstrap_auc", (group, label, counts)),
    }, s


def main():
    p = argparse.ArgumentParser()
    p.add_argument("--repeat", type=int, default=5)
    args = p.parse_args()
    table, _ = cases(np.random.default_rng(0))
    print(f"{'kernel':32s} {'numpy [ms]':>12s} {'cython [ms]':>12s} {'speedup':>8s}")
    for label, (name, inputs) in table.items():
        t_np = min(timeit.repeat(lambda: getattr(_fallback, name)(*inputs), number=1, repeat=args.repeat))
        if _kernels is None:
            print(f"{label:32s} {1e3 * t_np:12.2f} {'n/a':>12s}")
            continue
        ref = getattr(_fallback, name)(*inputs)
        got = getattr(_kernels, name)(*inputs)
        assert np.allclose(ref, got, rtol=1e-10), name
        t_cy = min(timeit.repeat(lambda: getattr(_kernels, name)(*inputs), number=1, repeat=args.repeat))
        print(f"{label:32s} {1e3 * t_np:12.2f} {1e3 * t_cy:12.2f} {t_np / t_cy:7.1f}x")
    from collabradar import kernels
    print(f"active backend: {kernels.BACKEND} (bilinear_rows always uses the BLAS path)")


if __name__ == "__main__":
    main()
