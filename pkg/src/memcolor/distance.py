"""Set-theoretic partition distance between colorings.

The distance is the minimum number of vertices that must change class to
turn one partition into the other; it is label-invariant.  The exact value
comes from a maximum-weight matching on the class-overlap matrix (Hungarian
method, used as a test oracle and on small instances).  The hot path uses a
greedy approximation that repeatedly locks in the largest remaining overlap;
it never underestimates the exact distance.
"""

from __future__ import annotations

import numpy as np
from numba import njit, prange
from scipy.optimize import linear_sum_assignment

from .coloring import Coloring


def _as_assign_pair(a, b):
    aa = a.assign if isinstance(a, Coloring) else np.asarray(a, dtype=np.int32)
    bb = b.assign if isinstance(b, Coloring) else np.asarray(b, dtype=np.int32)
    if aa.shape != bb.shape:
        raise ValueError("colorings must cover the same vertex set")
    ka = (a.k if isinstance(a, Coloring) else int(aa.max()) + 1) if aa.size else 0
    kb = (b.k if isinstance(b, Coloring) else int(bb.max()) + 1) if bb.size else 0
    return aa, bb, max(ka, kb)


def overlap_matrix(a, b, k=None):
    """M[c, c'] = number of vertices in class c of `a` and class c' of `b`."""
    aa, bb, kk = _as_assign_pair(a, b)
    if k is None:
        k = kk
    m = np.zeros((k, k), dtype=np.int64)
    np.add.at(m, (aa, bb), 1)
    return m


@njit(cache=True)
def _greedy_match_total(m, k):
    """Total overlap captured by greedily pairing largest entries first.

    Scanning entries in (-value, row, col) order and skipping used rows and
    columns is exactly "repeatedly take the largest remaining entry with
    lexicographic ties, then exclude its row and column".
    """
    k2 = k * k
    flat = np.empty(k2, dtype=np.int64)
    for r in range(k):
        for c in range(k):
            flat[r * k + c] = m[r, c]
    # sort cell indices by (value desc, row asc, col asc): since index order
    # is already (row, col) lexicographic, a stable argsort on -value works
    order = np.argsort(-flat, kind="mergesort")
    row_used = np.zeros(k, dtype=np.uint8)
    col_used = np.zeros(k, dtype=np.uint8)
    total = np.int64(0)
    matched = 0
    for pos in range(k2):
        idx = order[pos]
        r = idx // k
        c = idx % k
        if row_used[r] or col_used[c]:
            continue
        row_used[r] = 1
        col_used[c] = 1
        total += flat[idx]
        matched += 1
        if matched == k:
            break
    return total


def approx_partition_distance(a, b):
    """Greedy upper bound on the partition distance; O(n + k^2 log k)."""
    aa, bb, k = _as_assign_pair(a, b)
    m = overlap_matrix(aa, bb, k)
    return int(aa.size - _greedy_match_total(m, k))


def exact_partition_distance(a, b):
    """Exact partition distance via maximum-weight assignment."""
    aa, bb, k = _as_assign_pair(a, b)
    m = overlap_matrix(aa, bb, k)
    rows, cols = linear_sum_assignment(m, maximize=True)
    return int(aa.size - m[rows, cols].sum())


@njit(cache=True, parallel=True)
def _pairwise_kernel(pop, off, k, cross, within):
    p, n = pop.shape
    q = off.shape[0]
    total = p * q + q * (q - 1) // 2
    for job in prange(total):
        if job < p * q:
            i = job // q
            j = job % q
            m = np.zeros((k, k), dtype=np.int64)
            for v in range(n):
                m[pop[i, v], off[j, v]] += 1
            cross[i, j] = n - _greedy_match_total(m, k)
        else:
            r = job - p * q
            # unrank the (i < j) pair within the offspring set
            i = 0
            left = r
            row_len = q - 1
            while left >= row_len:
                left -= row_len
                i += 1
                row_len -= 1
            j = i + 1 + left
            m = np.zeros((k, k), dtype=np.int64)
            for v in range(n):
                m[off[i, v], off[j, v]] += 1
            d = n - _greedy_match_total(m, k)
            within[i, j] = d
            within[j, i] = d


def pairwise_distances(pop, offspring, k=None, thread_count=None):
    """All pop-vs-offspring and offspring-vs-offspring approximate distances.

    Returns (cross, within): cross[i, j] = d(pop_i, off_j); within is the
    symmetric offspring matrix with a zero diagonal.  Deterministic and
    independent of the thread count (pure functions per pair).
    """
    import numba

    if thread_count:
        numba.set_num_threads(max(1, min(thread_count, numba.config.NUMBA_NUM_THREADS)))

    pop_arr = (
        np.stack([c.assign for c in pop])
        if len(pop) and isinstance(pop[0], Coloring)
        else np.asarray(pop)
    )
    off_arr = (
        np.stack([c.assign for c in offspring])
        if len(offspring) and isinstance(offspring[0], Coloring)
        else np.asarray(offspring)
    )
    pop_arr = pop_arr.astype(np.int32)
    off_arr = off_arr.astype(np.int32)
    if k is None:
        k = 1 + max(
            int(pop_arr.max()) if pop_arr.size else 0,
            int(off_arr.max()) if off_arr.size else 0,
        )
    p, q = pop_arr.shape[0], off_arr.shape[0]
    cross = np.zeros((p, q), dtype=np.int32)
    within = np.zeros((q, q), dtype=np.int32)
    _pairwise_kernel(pop_arr, off_arr, k, cross, within)
    return cross, within
