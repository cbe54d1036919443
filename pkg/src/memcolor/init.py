"""Population initialization.

Weighted runs start from randomized greedy colorings (always legal); the
palette size k for the whole run is the largest color count any individual
used.  Plain k-coloring runs start from uniform random assignments.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .coloring import Coloring
from .rng import TAG_INIT, Stream


@dataclass
class InitOutcome:
    colorings: list
    k: int


def greedy_order(g):
    """Vertices by weight desc, then degree desc, then id asc."""
    # lexsort uses the last key as primary; negate for descending order
    return np.lexsort((np.arange(g.n), -g.degrees, -g.weights))


def greedy_wvcp_init(g, stream):
    """Randomized greedy coloring: legal by construction.

    Each vertex (heaviest first) takes a uniformly random already-open color
    that creates no conflict; when none qualifies a new color is opened.
    """
    assign = -np.ones(g.n, dtype=np.int32)
    used = 0
    for v in greedy_order(g):
        blocked = {int(assign[u]) for u in g.adjacency[v] if assign[u] >= 0}
        allowed = [c for c in range(used) if c not in blocked]
        if allowed:
            assign[v] = allowed[stream.below(len(allowed))]
        else:
            assign[v] = used
            used += 1
    return Coloring(assign, used)


def random_col_init(n, k, stream):
    """Each vertex gets an i.i.d. uniform color in [0, k)."""
    if k < 1:
        raise ValueError("k must be at least 1")
    assign = np.fromiter((stream.below(k) for _ in range(n)), dtype=np.int32, count=n)
    return Coloring(assign, k)


def init_wvcp_population(g, p, master_seed):
    """p independent greedy colorings, re-padded to the common palette size."""
    colorings = [
        greedy_wvcp_init(g, Stream.derive(master_seed, TAG_INIT, i)) for i in range(p)
    ]
    k = max(c.k for c in colorings)
    colorings = [Coloring(c.assign, k) for c in colorings]
    return InitOutcome(colorings=colorings, k=k)


def init_col_population(n, k, p, master_seed):
    colorings = [
        random_col_init(n, k, Stream.derive(master_seed, TAG_INIT, i)) for i in range(p)
    ]
    return InitOutcome(colorings=colorings, k=k)
