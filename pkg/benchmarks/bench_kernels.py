"""Compare the compiled and pure-Python kernel backends.

Run with ``python benchmarks/bench_kernels.py [--repeat N]``.  Each kernel
is timed on both backends with identical inputs; outputs are checked for
agreement before timing so a fast but wrong kernel cannot pass unnoticed.
"""
import argparse
import timeit

import numpy as np

from resodecay._kernels import compiled_available, get_backend


def cases():
    rng = np.random.default_rng(0)
    values = rng.exponential(5.0, 1_000_000)
    labels = rng.integers(0, 2, values.size).astype(np.int64)
    edges = np.linspace(0.0, 50.0, 101)
    energies = rng.uniform(1.0, 3.0, 1_000_000)
    z = energies + 0j
    poles = np.array([2 + 0.1j, 1 + 1j, 3 + 0.5j])
    mults = np.array([1, 2, 1])
    coeffs = np.array([1.0, 0.5 - 0.2j, 0.3j])
    return {
        "random_uniforms (1e6)": lambda k: k.random_uniforms(1234, 42, 3, 1_000_000),
        "bin_counts (1e6, 2 channels)": lambda k: k.bin_counts(values, labels, edges, 2),
        "rational_eval (1e6, 3 terms)": lambda k: k.rational_eval(z, poles, mults, coeffs),
        "bw_intensity (1e6, const bg)": lambda k: k.bw_intensity(energies, 2.0, 0.2, 1.0, (0.1 + 0.05j,), 1.0),
    }


def _same(a, b):
    if isinstance(a, tuple):
        return all(_same(x, y) for x, y in zip(a, b))
    a, b = np.asarray(a), np.asarray(b)
    if a.dtype.kind in "iu":
        return np.array_equal(a, b)
    return np.allclose(a, b, rtol=1e-13, atol=0.0)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    py = get_backend("python")
    if not compiled_available():
        print("compiled backend not built; timing the Python fallback only")
    cy = get_backend("cython") if compiled_available() else None
    print(f"{'kernel':32s} {'python [ms]':>12s} {'cython [ms]':>12s} {'speed-up':>9s}")
    for name, fn in cases().items():
        t_py = min(timeit.repeat(lambda: fn(py), number=1, repeat=args.repeat)) * 1e3
        if cy is None:
            print(f"{name:32s} {t_py:12.2f} {'-':>12s} {'-':>9s}")
            continue
        if not _same(fn(py), fn(cy)):
            raise SystemExit(f"{name}: backends disagree")
        t_cy = min(timeit.repeat(lambda: fn(cy), number=1, repeat=args.repeat)) * 1e3
        print(f"{name:32s} {t_py:12.2f} {t_cy:12.2f} {t_py / t_cy:8.1f}x")


if __name__ == "__main__":
    main()
