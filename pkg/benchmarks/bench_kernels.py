"""Benchmark the similarity kernels: numba JIT vs pure numpy.

Run:

    python3 benchmarks/bench_kernels.py [--rows 20000] [--dim 256] [--queries 20]

Both paths produce identical scores (the test suite asserts parity); this
script only measures wall-clock time. The JIT warm-up compile is excluded
from timing. If numba is unavailable (or QA_PURE_NUMPY=1), only the numpy
path is measured.
"""

import argparse
import statistics
import time

import numpy as np

from contractqa.index import kernels


def time_path(fn, args, repeats):
    durations = []
    for _ in range(repeats):
        start = time.perf_counter()
        fn(*args)
        durations.append(time.perf_counter() - start)
    return durations


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--rows", type=int, default=20000)
    parser.add_argument("--dim", type=int, default=256)
    parser.add_argument("--queries", type=int, default=20)
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()

    rng = np.random.default_rng(7)
    matrix = np.ascontiguousarray(rng.normal(size=(args.rows, args.dim)))
    norms = np.sqrt(np.einsum("ij,ij->i", matrix, matrix))
    queries = rng.normal(size=(args.queries, args.dim))

    def run_numpy():
        for q in queries:
            kernels.cosine_scores_numpy(matrix, norms, q)
            kernels.neg_euclidean_scores_numpy(matrix, q)
            kernels.neg_manhattan_scores_numpy(matrix, q)

    def run_numba():
        for q in queries:
            kernels._cosine_jit(matrix, norms, q)
            kernels._neg_euclidean_jit(matrix, q)
            kernels._neg_manhattan_jit(matrix, q)

    print(f"rows={args.rows} dim={args.dim} queries={args.queries} "
          f"repeats={args.repeats} backend={kernels.backend()}")

    if kernels.HAVE_NUMBA:
        print("[warmup] compiling jitted kernels (unmeasured)")
        kernels.warmup()

    rows = [("numpy", time_path(run_numpy, (), args.repeats))]
    if kernels.HAVE_NUMBA:
        rows.append(("numba", time_path(run_numba, (), args.repeats)))
    else:
        print("[info] numba path unavailable; measuring numpy only")

    header = f"{'path':8s} {'mean(s)':>10s} {'std(s)':>9s}  per-run"
    print(header)
    print("-" * len(header))
    for name, durations in rows:
        mean = statistics.mean(durations)
        std = statistics.pstdev(durations) if len(durations) > 1 else 0.0
        runs = " ".join(f"{d:.4f}" for d in durations)
        print(f"{name:8s} {mean:10.4f} {std:9.4f}  {runs}")

    if len(rows) == 2:
        speedup = statistics.mean(rows[0][1]) / statistics.mean(rows[1][1])
        print(f"\nspeedup (numpy / numba): {speedup:.2f}x")


if __name__ == "__main__":
    main()
