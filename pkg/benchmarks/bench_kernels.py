"""Time each hot kernel under numba and under the numpy fallback.

    python benchmarks/bench_kernels.py [--repeat 5]

Both variants are called directly, so the environment flag does not matter
here.  The first numba call (compilation) is excluded from the timings.
"""
import argparse
import time

import numpy as np

from monodimer import kernels
from monodimer.graph import sample_erdos_renyi, sample_galton_watson
from monodimer.offspring import OffspringDistribution
from monodimer.rng import stream


def best_of(fn, repeat):
    fn()
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t)
    return min(times)


def cases():
    rng = stream(7, 1)
    n = 18
    W = np.triu((rng.random((n, n)) < 0.3).astype(float), 1)
    W = W + W.T
    xv = np.ones(n)
    ptr, idx = kernels._nbr_lists(n, W)
    Z = np.zeros(1 << n)

    P = OffspringDistribution.poisson(2.0)
    t = sample_galton_watson(P, P, 14, 3)
    tx, tw = np.ones(t.n), np.ones(t.n)

    N = 10**6
    vals = rng.random(N)
    counts = P.sample(rng, N)
    picks = rng.integers(0, N, size=int(counts.sum()))

    g = sample_erdos_renyi(20000, 2.0, 5)
    verts = np.arange(g.n, dtype=np.int64)

    yield f"subset table (n={n})", lambda: kernels._subset_table_nb(xv, W, ptr, idx, Z), lambda: kernels._subset_table_np(
        xv, W, ptr, idx, Z
    )
    yield f"tree pass ({t.n} vertices)", lambda: kernels._tree_q_nb(t.parent, tx, tw, t.n), lambda: kernels._tree_q_np(
        t.parent, tx, tw, t.n, t.gen_ptr
    )
    yield f"population gather (N={N})", lambda: kernels._gather_sums_nb(vals, counts, picks), lambda: kernels._gather_sums_np(
        vals, counts, picks
    )
    small = sample_erdos_renyi(2000, 2.0, 5)
    sv = np.arange(small.n, dtype=np.int64)
    yield f"local bounds (ER n={small.n}, radius 5)", lambda: kernels._local_bounds_nb(
        small.indptr, small.indices, sv, 5, 1.0
    ), lambda: kernels._local_bounds_py(small.indptr, small.indices, sv, 5, 1.0)
    yield f"tree-ball flags (ER n={g.n}, radius 5)", lambda: kernels._ball_tree_flags_nb(
        g.indptr, g.indices, verts, 5
    ), lambda: kernels._ball_tree_flags_np(g.indptr, g.indices, verts, 5)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    print(f"{'kernel':42s} {'numba [s]':>10s} {'numpy [s]':>10s} {'speedup':>8s}")
    for name, nb, npy in cases():
        a, b = best_of(nb, args.repeat), best_of(npy, args.repeat)
        print(f"{name:42s} {a:10.4f} {b:10.4f} {b / a:8.1f}x")


if __name__ == "__main__":
    main()
