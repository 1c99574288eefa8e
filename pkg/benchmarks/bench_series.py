"""Benchmark the zonal-series hot kernel: compiled extension vs numpy fallback.

Both backends implement the same contract (zonal_series); this script times
them on identical inputs across batch sizes and series lengths.

    python3 benchmarks/bench_series.py [--sizes 1000,10000] [--terms 64,256]
"""

import argparse
import time

import numpy as np

from bbesov import _series_py


def _load_backends():
    backends = [("python", _series_py.zonal_series)]
    try:
        from bbesov import _ext
        backends.append(("cython", _ext.zonal_series))
    except ImportError:
        print("compiled extension not available; benchmarking fallback only")
    return backends


def bench(fn, coeffs, nu, w, a2, repeats):
    fn(coeffs, nu, w, a2)  # warm up
    best = np.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(coeffs, nu, w, a2)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", default="1000,10000,100000")
    ap.add_argument("--terms", default="32,128,512")
    ap.add_argument("--repeats", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    rng = np.random.default_rng(args.seed)
    backends = _load_backends()
    print(f"{'points':>8} {'terms':>6}", end="")
    for name, _ in backends:
        print(f" {name + ' (ms)':>14}", end="")
    if len(backends) == 2:
        print(f" {'speedup':>8}", end="")
    print()

    for m in (int(v) for v in args.sizes.split(",")):
        r = 0.97 * rng.uniform(0.1, 1.0, m)
        w = r * rng.uniform(-1.0, 1.0, m)
        a2 = r**2
        for K in (int(v) for v in args.terms.split(",")):
            coeffs = (1.0 + np.arange(K + 1.0)) ** 1.5 / (1 + np.arange(K + 1.0))
            times = [bench(fn, coeffs, 0.5, w, a2, args.repeats)
                     for _, fn in backends]
            # agreement sanity check
            vals = [fn(coeffs, 0.5, w, a2) for _, fn in backends]
            if len(vals) == 2:
                scale = np.abs(vals[0]).max()
                assert np.abs(vals[0] - vals[1]).max() <= 1e-12 * max(scale, 1.0)
            print(f"{m:>8} {K:>6}", end="")
            for t in times:
                print(f" {1e3 * t:>14.3f}", end="")
            if len(times) == 2:
                print(f" {times[0] / times[1]:>8.2f}x", end="")
            print()


if __name__ == "__main__":
    main()
