"""Compare the numba and numpy kernel backends on periodic grids.

Usage: python3 benchmarks/bench_kernels.py [--sizes 10 30 100] [--repeat 20]

Both backends are imported directly so one process times both; the numba
functions are called once before timing to exclude compilation.
"""

import argparse
import time

import numpy as np

from invflow.fixtures import torus_grid
from invflow.geometry import InversiveWeights
from invflow.kernels import numba_impl, numpy_impl


def best_of(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[10, 30, 100])
    ap.add_argument("--repeat", type=int, default=20)
    ap.add_argument("--batch", type=int, default=32, help="rows for the batched curvature kernel")
    args = ap.parse_args()
    if numba_impl is None:
        raise SystemExit("numba backend unavailable (not installed or INVFLOW_DISABLE_NUMBA set)")

    rng = np.random.default_rng(0)
    print(f"{'grid':>8} {'faces':>7} {'kernel':>16} {'numpy ms':>10} {'numba ms':>10} {'speedup':>8} {'max diff':>9}")
    for m in args.sizes:
        s = torus_grid(m, m)
        w = InversiveWeights(rng.uniform(0.0, 2.0, s.n_edges)).on_faces(s)
        tri = s.face_array
        n = s.n_vertices
        r = np.exp(rng.uniform(-1, 1, n))
        R = np.exp(rng.uniform(-1, 1, (args.batch, n)))
        cases = {
            "curvature": lambda impl: impl.curvature(r, tri, w, n),
            "curvature_batch": lambda impl: impl.curvature_batch(R, tri, w),
            "face_jacobians": lambda impl: impl.face_jacobians(r, tri, w),
        }
        for name, call in cases.items():
            a = call(numpy_impl)
            b = call(numba_impl)  # compile
            both = np.isfinite(a) & np.isfinite(b)
            diff = float(np.max(np.abs(a[both] - b[both]))) if both.any() else 0.0
            tn = best_of(lambda: call(numpy_impl), args.repeat)
            tb = best_of(lambda: call(numba_impl), args.repeat)
            print(f"{m}x{m:<5} {s.n_faces:>7} {name:>16} {1e3 * tn:>10.3f} {1e3 * tb:>10.3f} {tn / tb:>8.1f} {diff:>9.1e}")


if __name__ == "__main__":
    main()
