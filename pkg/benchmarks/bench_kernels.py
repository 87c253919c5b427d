"""Time the compiled kernel backend against the pure-numpy fallback.

Workloads mirror the shipped pipeline: a few hundred training rows, a
handful of selected features, a 12x12 correlation matrix, and a
500-tree forest arena. Run from the repository root:

    python3 benchmarks/bench_kernels.py [--repeats N] [--trees N]

The first call of every kernel is a discarded warmup so numba's
compilation (or disk-cache load) never lands in a measured time.
"""

import argparse
import time

import numpy as np

from hcvpipe.forest import train_forest
from hcvpipe.kernels import numba_backend, numpy_backend


def build_workloads(trees):
    rng = np.random.default_rng(2024)
    n, q, p = 564, 4, 12

    X = rng.standard_normal((n, q))
    w_true = np.array([1.4, -1.1, 0.7, 0.2])
    margin = X @ w_true + 0.4 * rng.standard_normal(n)
    y01 = (margin > 0.6).astype(np.int64)
    y_pm = np.where(y01 == 0, 1.0, -1.0)
    K = X @ X.T

    S = np.corrcoef(rng.standard_normal((n, p)).T)

    boot = rng.integers(0, n, n)
    Xb = np.ascontiguousarray(X[boot])
    yb = np.ascontiguousarray(y01[boot])
    subsets = np.sort(
        np.argsort(rng.random((2 * n + 1, q)), axis=1)[:, :2], axis=1
    ).astype(np.int64)

    forest = train_forest(X, y01, trees=trees, seed=7)
    Xq = rng.standard_normal((615, q))

    h = 8
    init = np.random.default_rng(5)

    def mlp_args():
        return (
            X, y01.astype(np.float64),
            init.uniform(-0.5, 0.5, (h, q)), init.uniform(-0.5, 0.5, h),
            init.uniform(-0.5, 0.5, h), np.array([0.1]), 0.05, 2000,
        )

    return [
        ("smo_solve (n=564)",
         lambda b: b.smo_solve(K, y_pm, 1.0, 1e-3, 10 * n)),
        ("mlp_train (2000 epochs)",
         lambda b: b.mlp_train(*mlp_args())),
        ("jacobi_eigh (12x12)",
         lambda b: b.jacobi_eigh(S, 1e-12, 100)),
        ("best_split_scan (564x2)",
         lambda b: b.best_split_scan(Xb[:, :2], yb)),
        ("grow_tree_arrays (564 rows)",
         lambda b: b.grow_tree_arrays(Xb, yb, subsets, 1)),
        (f"forest_vote_counts ({trees} trees, 615 rows)",
         lambda b: b.forest_vote_counts(
             forest.feature, forest.threshold, forest.left, forest.right,
             forest.leaf_class, forest.roots, Xq)),
    ]


def best_time(fn, backend, repeats):
    fn(backend)  # warmup: compile or load cache
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(backend)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeats", type=int, default=5,
                    help="timed repetitions per kernel (best is kept)")
    ap.add_argument("--trees", type=int, default=500,
                    help="forest size for the voting benchmark")
    args = ap.parse_args()

    rows = []
    for name, fn in build_workloads(args.trees):
        t_nb = best_time(fn, numba_backend, args.repeats)
        t_np = best_time(fn, numpy_backend, args.repeats)
        rows.append((name, t_nb * 1e3, t_np * 1e3, t_np / t_nb))

    width = max(len(r[0]) for r in rows)
    print(f"{'kernel':<{width}}  {'numba ms':>10}  {'numpy ms':>10}  {'speedup':>8}")
    for name, nb_ms, np_ms, ratio in rows:
        print(f"{name:<{width}}  {nb_ms:>10.3f}  {np_ms:>10.3f}  {ratio:>7.1f}x")


if __name__ == "__main__":
    main()
