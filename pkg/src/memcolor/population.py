"""Distance-and-quality population update and nearest-neighbor matching.

The pool update merges the incumbent population with the freshly improved
individuals, then greedily admits candidates in fitness order subject to a
minimum pairwise spacing; when spacing would starve the pool, the remaining
slots are filled by the best leftover candidates regardless of spacing so
the population size stays a structural constant.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .coloring import Coloring
from .distance import pairwise_distances


def min_spacing(n, divisor=10):
    return n // divisor


@dataclass
class Population:
    assigns: np.ndarray  # (p, n) int32
    k: int
    fitness: np.ndarray  # (p,) int64
    dist: np.ndarray  # (p, p) int32, symmetric, zero diagonal
    generation: int = 0
    admitted_by_rule: np.ndarray = None  # bool mask; False = fallback fill

    @property
    def p(self):
        return self.assigns.shape[0]

    @property
    def n(self):
        return self.assigns.shape[1]

    def colorings(self):
        return [Coloring(self.assigns[i], self.k) for i in range(self.p)]

    @classmethod
    def from_colorings(cls, colorings, fitness, generation=0):
        assigns = np.stack([c.assign for c in colorings]).astype(np.int32)
        k = colorings[0].k
        _, within = pairwise_distances(assigns[:0], assigns, k=k)
        return cls(
            assigns=assigns,
            k=k,
            fitness=np.asarray(fitness, dtype=np.int64),
            dist=within,
            generation=generation,
            admitted_by_rule=np.ones(len(colorings), dtype=bool),
        )


def update_population(pop, improved_assigns, improved_fitness, cross, within, ms):
    """Merge 2p candidates and keep the best p subject to spacing > ms.

    Candidates are ranked by fitness ascending; at equal fitness incumbents
    come before newcomers, then lower index.  A candidate is admitted only
    if its distance to every already admitted candidate exceeds ms; if fewer
    than p candidates pass, the best rejected ones fill the remaining slots.
    """
    p = pop.p
    improved_assigns = np.asarray(improved_assigns, dtype=np.int32)
    improved_fitness = np.asarray(improved_fitness, dtype=np.int64)
    q = improved_assigns.shape[0]

    cand_fit = np.concatenate([pop.fitness, improved_fitness])
    origin = np.concatenate([np.zeros(p, dtype=np.int64), np.ones(q, dtype=np.int64)])
    index_in_origin = np.concatenate([np.arange(p), np.arange(q)])
    order = np.lexsort((index_in_origin, origin, cand_fit))

    def dist(i, j):
        # candidate ids: 0..p-1 incumbents, p..p+q-1 newcomers
        if i < p and j < p:
            return pop.dist[i, j]
        if i < p:
            return cross[i, j - p]
        if j < p:
            return cross[j, i - p]
        return within[i - p, j - p]

    admitted = []
    by_rule = []
    rejected = []
    for cid in order:
        cid = int(cid)
        if len(admitted) == p:
            break
        if all(dist(cid, other) > ms for other in admitted):
            admitted.append(cid)
            by_rule.append(True)
        else:
            rejected.append(cid)
    for cid in rejected:
        if len(admitted) == p:
            break
        admitted.append(cid)
        by_rule.append(False)

    new_assigns = np.empty_like(pop.assigns)
    new_fit = np.empty(p, dtype=np.int64)
    for slot, cid in enumerate(admitted):
        if cid < p:
            new_assigns[slot] = pop.assigns[cid]
        else:
            new_assigns[slot] = improved_assigns[cid - p]
        new_fit[slot] = cand_fit[cid]
    new_dist = np.zeros((p, p), dtype=np.int32)
    for a in range(p):
        for b in range(a + 1, p):
            d = dist(admitted[a], admitted[b])
            new_dist[a, b] = d
            new_dist[b, a] = d

    return Population(
        assigns=new_assigns,
        k=pop.k,
        fitness=new_fit,
        dist=new_dist,
        generation=pop.generation + 1,
        admitted_by_rule=np.array(by_rule, dtype=bool),
    )


def match_parents(pop, K):
    """K nearest neighbors of each individual (ties broken by lower index)."""
    p = pop.p
    if not (0 < K < p):
        raise ValueError("need 0 < K < p")
    matches = np.empty((p, K), dtype=np.int64)
    idx = np.arange(p)
    for i in range(p):
        order = np.lexsort((idx, pop.dist[i]))
        row = order[order != i][:K]
        matches[i] = row
    return matches
