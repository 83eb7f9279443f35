#!/usr/bin/env python3
"""Time the compiled kernels against the numpy fallbacks.

    python benchmarks/bench_kernels.py [--repeat 3] [--json out.json]
"""
import argparse
import json
import time

import numpy as np

from primevar import _fallback
from primevar.lfunctions import BERN
from primevar.primesums import small_primes

try:
    from primevar import _kernels
except ImportError:  # extension not built
    _kernels = None


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def cases():
    base = small_primes(40000)
    s = (0.5 + 1j * np.linspace(10, 400, 2000)).astype(np.complex128)
    n = np.ceil(10 + np.abs(s.imag)).astype(np.int64)
    lam = np.array([0.70710678118654752, 0.57735026918962576, 0.31830988618379067])
    return {
        "primes_in_window [1e9, 1e9+4e6)": lambda m: m.primes_in_window(10**9, 10**9 + 4 * 10**6, base),
        "hurwitz_regular 2000 points": lambda m: m.hurwitz_regular(s, 0.25, n, BERN),
        "dio_scan k=3 to 2e6": lambda m: m.dio_scan(lam, 1, 2 * 10**6, 1e-3),
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--json", default=None)
    args = ap.parse_args()
    rows = []
    for name, fn in cases().items():
        py = best_of(lambda: fn(_fallback), args.repeat)
        cy = best_of(lambda: fn(_kernels), args.repeat) if _kernels else None
        rows.append(dict(kernel=name, python_s=py, cython_s=cy,
                         speedup=(py / cy) if cy else None))
        sp = f"{py / cy:6.1f}x" if cy else "   n/a"
        print(f"{name:34s} python {py:8.4f}s  cython {cy if cy else float('nan'):8.4f}s  {sp}")
    if args.json:
        with open(args.json, "w") as fh:
            json.dump(rows, fh, indent=2)


if __name__ == "__main__":
    main()
