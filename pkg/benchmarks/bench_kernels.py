"""Compare the compiled and pure-numpy kernel backends.

Usage: python3 benchmarks/bench_kernels.py [--repeat N]
"""
import argparse
import time

import numpy as np

from latslice import Lattice, _kernels


def _lattice(d, seed=0):
    rng = np.random.default_rng(seed)
    b = np.eye(d) + 0.2 * rng.normal(size=(d, d))
    return Lattice(b / abs(np.linalg.det(b)) ** (1 / d))


def _best_time(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def cases():
    for d, r in ((3, 25.0), (5, 6.0), (6, 4.5), (8, 3.2)):
        lat = _lattice(d)
        b2 = lat.gram_schmidt_norms**2
        c = np.zeros(d)
        yield f"fp_enumerate d={d} r={r}", lambda m, lat=lat, b2=b2, c=c, r=r: \
            m.fp_enumerate(lat.mu, b2, c, r * r, 10**8)
        bounds = (r * 1.25 ** np.arange(3)) ** 2
        yield f"fp_shell_sums d={d} r={r}", lambda m, lat=lat, b2=b2, c=c, bounds=bounds: \
            m.fp_shell_sums(lat.mu, b2, c, bounds, 1.0, 10**8)
    rng = np.random.default_rng(1)
    pts = rng.integers(-3, 4, size=(20_000, 5))
    ks = rng.integers(-3, 4, size=(64, 5))
    yield "count_orthogonal 20000x64 d=5", lambda m: m.count_orthogonal(pts, ks)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    if _kernels.compiled is None:
        print("compiled extension not built; run `python3 setup.py build_ext --inplace`")
    print(f"{'case':34s} {'numpy (s)':>10s} {'cython (s)':>11s} {'speedup':>8s}")
    for name, fn in cases():
        t_py = _best_time(lambda: fn(_kernels.fallback), args.repeat)
        if _kernels.compiled is None:
            print(f"{name:34s} {t_py:10.4f} {'-':>11s} {'-':>8s}")
            continue
        t_c = _best_time(lambda: fn(_kernels.compiled), args.repeat)
        print(f"{name:34s} {t_py:10.4f} {t_c:11.4f} {t_py / t_c:7.1f}x")


if __name__ == "__main__":
    main()
