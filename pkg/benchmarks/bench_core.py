"""Compare the compiled kernels with the pure-Python fallback.

    python benchmarks/bench_core.py [--repeat N]
"""
import argparse
import timeit

import numpy as np

from ftlsim import _core_py

try:
    from ftlsim import _core
except ImportError:
    _core = None


def cases():
    rng = np.random.default_rng(0)
    sizes = rng.poisson(100, 10_000)
    offsets = np.concatenate([[0], np.cumsum(sizes)]).astype(np.int64)
    times = np.concatenate([np.sort(rng.uniform(0, 1.01, n)) for n in sizes])
    edges = np.array([0.01, 0.025, 0.05, 0.1, 0.26, 0.51, 1.01])
    values = rng.integers(0, 100, (10_000, 8)).astype(np.int64)
    idx = rng.integers(0, 10_000, (100, 10_000)).astype(np.int64)
    return {
        "posterior_chain (gap 0.05)": lambda m: m.posterior_chain(0.01, 0.9, 0.95, 1e-9, 10**6),
        "window_counts (1e4 cycles)": lambda m: m.window_counts(times, offsets, edges),
        "bootstrap_sums (100 x 1e4)": lambda m: m.bootstrap_sums(values, idx),
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if _core is None:
        print("compiled extension not built; only the fallback is available")
    print(f"{'kernel':30s} {'python ms':>10s} {'cython ms':>10s} {'speedup':>8s}")
    for name, fn in cases().items():
        py = min(timeit.repeat(lambda: fn(_core_py), number=1, repeat=args.repeat)) * 1e3
        if _core is None:
            print(f"{name:30s} {py:10.2f} {'-':>10s} {'-':>8s}")
            continue
        cy = min(timeit.repeat(lambda: fn(_core), number=1, repeat=args.repeat)) * 1e3
        print(f"{name:30s} {py:10.2f} {cy:10.2f} {py / cy:7.1f}x")


if __name__ == "__main__":
    main()
