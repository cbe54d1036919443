"""Independent reference computations used as test oracles.

Everything here is deliberately brute force and shares no code with the
library's incremental/approximate paths.
"""

from itertools import permutations

import numpy as np

from memcolor.graph import WeightedGraph
from memcolor.rng import Stream


def rand_graph(seed, n, edge_prob=0.4, wmax=9):
    """Random G(n, p) with uniform integer weights in [1, wmax]."""
    s = Stream(seed)
    edges = [
        (u, v) for u in range(n) for v in range(u + 1, n) if s.uniform() < edge_prob
    ]
    weights = [1 + s.below(wmax) for _ in range(n)]
    return WeightedGraph(n, edges, weights, name=f"rand{seed}")


def rand_coloring(seed, n, k):
    s = Stream(seed)
    return np.array([s.below(k) for _ in range(n)], dtype=np.int32)


def scratch_wvcp(g, assign, k):
    """Score and conflicts recomputed with plain loops."""
    score = 0
    for c in range(k):
        mx = 0
        for v in range(g.n):
            if assign[v] == c and g.weights[v] > mx:
                mx = int(g.weights[v])
        score += mx
    conf = sum(1 for u, v in g.edges if assign[u] == assign[v])
    return score, conf


def brute_force_wvcp(g):
    """Exact optimum by enumerating legal partitions (weight-sorted B&B)."""
    order = sorted(range(g.n), key=lambda v: (-int(g.weights[v]), v))
    adj = [set(map(int, g.adjacency[v])) for v in range(g.n)]
    best = {"score": None, "assign": None}
    assign = {}
    class_members = []

    def recurse(idx, score):
        if best["score"] is not None and score >= best["score"]:
            return
        if idx == g.n:
            best["score"] = score
            best["assign"] = dict(assign)
            return
        v = order[idx]
        # vertices come heaviest-first, so joining a class never raises its max
        for c, members in enumerate(class_members):
            if not (members & adj[v]):
                members.add(v)
                assign[v] = c
                recurse(idx + 1, score)
                members.discard(v)
        class_members.append({v})
        assign[v] = len(class_members) - 1
        recurse(idx + 1, score + int(g.weights[v]))
        class_members.pop()

    recurse(0, 0)
    k = max(best["assign"].values()) + 1
    out = np.zeros(g.n, dtype=np.int32)
    for v, c in best["assign"].items():
        out[v] = c
    return best["score"], out, k


def brute_force_partition_distance(a, b, k):
    """Exact distance by trying every bijection between class labels."""
    a = np.asarray(a)
    b = np.asarray(b)
    m = np.zeros((k, k), dtype=np.int64)
    for u, v in zip(a, b):
        m[u, v] += 1
    best = 0
    for perm in permutations(range(k)):
        best = max(best, sum(m[i, perm[i]] for i in range(k)))
    return int(a.size - best)
