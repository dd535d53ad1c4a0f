"""Similarity scoring kernels: the index's hot loop.

Each metric has a numba-jitted implementation and a pure-numpy one. The
jitted path is used when numba imports cleanly; set ``QA_PURE_NUMPY=1`` to
force the numpy path (useful for debugging and for the benchmark baseline).

All kernels take a float64 C-contiguous matrix of stored vectors and a
float64 query, and return one score per row, higher = more similar (for
the distance metrics the score is the negated distance). Accumulation is
float64 throughout so that self-similarity under cosine is 1.0 to within
a few ulp, which the store's score guarantees rely on.
"""

from __future__ import annotations

import math
import os

import numpy as np

_FORCE_NUMPY = os.environ.get("QA_PURE_NUMPY", "").strip().lower() in {"1", "true", "yes"}

try:
    if _FORCE_NUMPY:
        raise ImportError("QA_PURE_NUMPY set")
    from numba import njit

    HAVE_NUMBA = True
except ImportError:
    HAVE_NUMBA = False


def backend() -> str:
    return "numba" if HAVE_NUMBA else "numpy"


# -- pure numpy ---------------------------------------------------------------

def cosine_scores_numpy(matrix: np.ndarray, norms: np.ndarray, query: np.ndarray) -> np.ndarray:
    qnorm = math.sqrt(float(query @ query))
    dots = matrix @ query
    denom = norms * qnorm
    out = np.zeros(matrix.shape[0], dtype=np.float64)
    nonzero = denom > 0.0
    out[nonzero] = dots[nonzero] / denom[nonzero]
    return out


def neg_euclidean_scores_numpy(matrix: np.ndarray, query: np.ndarray) -> np.ndarray:
    diff = matrix - query
    return -np.sqrt(np.einsum("ij,ij->i", diff, diff))


def neg_manhattan_scores_numpy(matrix: np.ndarray, query: np.ndarray) -> np.ndarray:
    return -np.abs(matrix - query).sum(axis=1)


# -- numba --------------------------------------------------------------------

if HAVE_NUMBA:

    @njit(cache=True)
    def _cosine_jit(matrix, norms, query):  # pragma: no cover - jitted
        n, d = matrix.shape
        qsq = 0.0
        for j in range(d):
            qsq += query[j] * query[j]
        qnorm = math.sqrt(qsq)
        out = np.zeros(n, dtype=np.float64)
        for i in range(n):
            dot = 0.0
            for j in range(d):
                dot += matrix[i, j] * query[j]
            denom = norms[i] * qnorm
            if denom > 0.0:
                out[i] = dot / denom
        return out

    @njit(cache=True)
    def _neg_euclidean_jit(matrix, query):  # pragma: no cover - jitted
        n, d = matrix.shape
        out = np.empty(n, dtype=np.float64)
        for i in range(n):
            acc = 0.0
            for j in range(d):
                diff = matrix[i, j] - query[j]
                acc += diff * diff
            out[i] = -math.sqrt(acc)
        return out

    @njit(cache=True)
    def _neg_manhattan_jit(matrix, query):  # pragma: no cover - jitted
        n, d = matrix.shape
        out = np.empty(n, dtype=np.float64)
        for i in range(n):
            acc = 0.0
            for j in range(d):
                acc += abs(matrix[i, j] - query[j])
            out[i] = -acc
        return out


# -- dispatch -----------------------------------------------------------------

def cosine_scores(matrix: np.ndarray, norms: np.ndarray, query: np.ndarray) -> np.ndarray:
    if HAVE_NUMBA:
        return _cosine_jit(matrix, norms, query)
    return cosine_scores_numpy(matrix, norms, query)


def neg_euclidean_scores(matrix: np.ndarray, query: np.ndarray) -> np.ndarray:
    if HAVE_NUMBA:
        return _neg_euclidean_jit(matrix, query)
    return neg_euclidean_scores_numpy(matrix, query)


def neg_manhattan_scores(matrix: np.ndarray, query: np.ndarray) -> np.ndarray:
    if HAVE_NUMBA:
        return _neg_manhattan_jit(matrix, query)
    return neg_manhattan_scores_numpy(matrix, query)


def warmup() -> None:
    """Trigger JIT compilation once so it never lands inside a timed path."""
    m = np.ones((2, 3), dtype=np.float64)
    q = np.ones(3, dtype=np.float64)
    n = np.sqrt((m * m).sum(axis=1))
    cosine_scores(m, n, q)
    neg_euclidean_scores(m, q)
    neg_manhattan_scores(m, q)
