"""Time the compiled SMO kernel against the pure-Python fallback.

    python3 benchmarks/bench_smo.py [--sizes 50 200 800] [--dim 300] [--repeat 3]

Both backends consume the same random-start stream, so they must return
bitwise-identical solutions; the script checks this before reporting timings.
"""

import argparse
import statistics
import time

import numpy as np

from evgr.svm import SmoParams, train_smo
from evgr.svm.smo import BACKEND


def sparse_text_like(n, dim, seed):
    """Non-negative sparse count matrix with a noisy linear label."""
    rng = np.random.default_rng(seed)
    X = rng.poisson(0.05, size=(n, dim)).astype(float)
    w = rng.normal(size=dim)
    score = X @ w + 0.5 * rng.normal(size=n)
    y = (score > np.median(score)).astype(int)
    return X, y


def best_time(fn, repeat):
    times = []
    for _ in range(repeat):
        start = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - start)
    return min(times), statistics.median(times), out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[50, 200, 800])
    ap.add_argument("--dim", type=int, default=300)
    ap.add_argument("--c", type=float, default=1.0)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    if BACKEND != "cython":
        raise SystemExit("compiled kernel not available; build with `pip install -e . --no-build-isolation`")

    params = SmoParams(c=args.c)
    print(f"{'n':>6} {'iters':>8} {'python s':>10} {'cython s':>10} {'speedup':>8}  identical")
    for n in args.sizes:
        X, y = sparse_text_like(n, args.dim, seed=n)
        py_best, _, (mp, dp) = best_time(lambda: train_smo(X, y, params, backend="python"), args.repeat)
        cy_best, _, (mc, dc) = best_time(lambda: train_smo(X, y, params, backend="cython"), args.repeat)
        same = dp.alphas.tobytes() == dc.alphas.tobytes() and mp.bias == mc.bias
        print(f"{n:>6} {mc.training_meta.iterations:>8} {py_best:>10.4f} {cy_best:>10.4f} "
              f"{py_best / cy_best:>7.1f}x  {same}")


if __name__ == "__main__":
    main()
