"""Greedy partition crossover and surrogate-guided offspring selection."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit, prange

from .coloring import Coloring
from .rng import TAG_CROSS, TAG_SELECT, Stream, stream_key, u64_below


@njit(cache=True)
def _gpx_into(pa, pb, k, key, child):
    """One offspring: alternately inherit the largest remaining class.

    Round r takes, from parent1 on even r and parent2 on odd r, the class
    with the most not-yet-assigned vertices (ties: lowest class id), gives
    those vertices color r, and deletes them from both working parents.
    Unassigned vertices after k rounds get uniform random colors.
    """
    n = pa.shape[0]
    cnt_a = np.zeros(k, dtype=np.int64)
    cnt_b = np.zeros(k, dtype=np.int64)
    for v in range(n):
        cnt_a[pa[v]] += 1
        cnt_b[pb[v]] += 1
        child[v] = -1
    ctr = np.int64(0)
    for r in range(k):
        use_a = r % 2 == 0
        best = 0
        if use_a:
            for c in range(1, k):
                if cnt_a[c] > cnt_a[best]:
                    best = c
            if cnt_a[best] == 0:
                continue
        else:
            for c in range(1, k):
                if cnt_b[c] > cnt_b[best]:
                    best = c
            if cnt_b[best] == 0:
                continue
        for v in range(n):
            if child[v] < 0:
                src = pa[v] if use_a else pb[v]
                if src == best:
                    child[v] = r
                    cnt_a[pa[v]] -= 1
                    cnt_b[pb[v]] -= 1
    for v in range(n):
        if child[v] < 0:
            child[v] = np.int32(u64_below(key, np.uint64(ctr), np.uint64(k)))
            ctr += 1
    return ctr


@njit(cache=True, parallel=True)
def _gpx_batch(pop, matches, k, keys, out):
    p, K = matches.shape
    for job in prange(p * K):
        i = job // K
        j = job % K
        _gpx_into(pop[i], pop[matches[i, j]], k, keys[job], out[i, j])


def gpx(parent1, parent2, k, stream):
    """Single crossover of two colorings over the same vertex set."""
    pa = parent1.assign if isinstance(parent1, Coloring) else np.asarray(parent1)
    pb = parent2.assign if isinstance(parent2, Coloring) else np.asarray(parent2)
    if pa.shape != pb.shape:
        raise ValueError("parents must cover the same vertex set")
    child = np.empty(pa.shape[0], dtype=np.int32)
    key = stream.key if isinstance(stream, Stream) else int(stream)
    _gpx_into(pa.astype(np.int32), pb.astype(np.int32), k, np.uint64(key), child)
    return Coloring(child, k)


def build_offspring_batch(pop_assigns, matches, k, master_seed, generation):
    """All p*K offspring; per-pair RNG streams keep the batch deterministic."""
    p, K = matches.shape
    n = pop_assigns.shape[1]
    keys = np.array(
        [stream_key(master_seed, TAG_CROSS, generation, job) for job in range(p * K)],
        dtype=np.uint64,
    )
    out = np.empty((p, K, n), dtype=np.int32)
    _gpx_batch(
        pop_assigns.astype(np.int32), matches.astype(np.int64), k, keys, out
    )
    return out


@dataclass
class OffspringBatch:
    candidates: np.ndarray  # (p, K, n)
    predicted: np.ndarray  # (p, K) raw-scale surrogate scores (NaN if unused)
    selected_index: np.ndarray  # (p,)
    selected_assigns: np.ndarray  # (p, n)


def build_and_select_offspring(
    pop, matches, net, master_seed, generation, use_surrogate=True
):
    """K offspring per individual; keep the argmin-predicted one.

    With the surrogate disabled (the ablation baseline) the kept offspring
    is drawn uniformly among the K candidates instead.
    """
    cands = build_offspring_batch(pop.assigns, matches, pop.k, master_seed, generation)
    p, K, n = cands.shape
    predicted = np.full((p, K), np.nan)
    if use_surrogate:
        flat = cands.reshape(p * K, n)
        predicted = net.predict_assigns(flat, pop.k).reshape(p, K)
        selected = predicted.argmin(axis=1)
    else:
        selected = np.array(
            [
                Stream.derive(master_seed, TAG_SELECT, generation, i).below(K)
                for i in range(p)
            ],
            dtype=np.int64,
        )
    sel_assigns = cands[np.arange(p), selected]
    return OffspringBatch(
        candidates=cands,
        predicted=predicted,
        selected_index=selected,
        selected_assigns=sel_assigns.copy(),
    )
