"""Problem instances: DIMACS loading, validation, clique-based reduction.

Instances are undirected graphs with strictly positive integer vertex
weights.  A ``.col`` file without a companion weight file is treated as the
unit-weight case (plain vertex coloring as weighted coloring).
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

import numpy as np


class DimacsError(ValueError):
    """Malformed instance or weight file; carries the offending line number."""

    def __init__(self, message, line_no=None):
        if line_no is not None:
            message = f"line {line_no}: {message}"
        super().__init__(message)
        self.line_no = line_no


class WeightedGraph:
    """Immutable undirected graph with positive integer vertex weights.

    Vertices are 0-based internally.  Adjacency is kept both as per-vertex
    arrays and as a CSR pair (adj_indptr, adj_indices) for the numba kernels.
    """

    def __init__(self, n, edges, weights, name=""):
        if n <= 0:
            raise ValueError("graph must have at least one vertex")
        self.n = int(n)
        self.name = name

        dedup = set()
        for u, v in edges:
            u, v = int(u), int(v)
            if u == v:
                raise ValueError(f"self-loop on vertex {u}")
            if not (0 <= u < n and 0 <= v < n):
                raise ValueError(f"edge endpoint out of range: ({u}, {v})")
            dedup.add((u, v) if u < v else (v, u))
        self.edges = np.array(sorted(dedup), dtype=np.int32).reshape(-1, 2)
        self.m = len(self.edges)

        self.weights = np.asarray(weights, dtype=np.int64)
        if self.weights.shape != (self.n,):
            raise ValueError(f"expected {self.n} weights, got {self.weights.shape}")
        if (self.weights < 1).any():
            bad = int(np.argmax(self.weights < 1))
            raise ValueError(f"non-positive weight {self.weights[bad]} on vertex {bad}")

        nbrs = [[] for _ in range(self.n)]
        for u, v in self.edges:
            nbrs[u].append(v)
            nbrs[v].append(u)
        self.adjacency = [np.array(sorted(a), dtype=np.int32) for a in nbrs]
        self.degrees = np.array([len(a) for a in self.adjacency], dtype=np.int32)

        self.adj_indptr = np.zeros(self.n + 1, dtype=np.int64)
        np.cumsum(self.degrees, out=self.adj_indptr[1:])
        self.adj_indices = (
            np.concatenate(self.adjacency) if self.m else np.empty(0, dtype=np.int32)
        ).astype(np.int32)

        self.max_weight = int(self.weights.max())
        # dense rank of each vertex weight among distinct values (ascending)
        self.weight_values = np.unique(self.weights)
        self.weight_ranks = np.searchsorted(self.weight_values, self.weights).astype(np.int32)

        self._edge_set = dedup

    def has_edge(self, u, v):
        return ((u, v) if u < v else (v, u)) in self._edge_set

    def neighbors(self, v):
        return self.adjacency[v]

    def density(self):
        possible = self.n * (self.n - 1) / 2
        return self.m / possible if possible else 0.0

    def __eq__(self, other):
        return (
            isinstance(other, WeightedGraph)
            and self.n == other.n
            and np.array_equal(self.edges, other.edges)
            and np.array_equal(self.weights, other.weights)
        )

    def __repr__(self):
        return f"WeightedGraph(name={self.name!r}, n={self.n}, m={self.m})"


@dataclass
class ReductionReport:
    """What the preprocessing removed and how to map back to original ids."""

    removed: list = field(default_factory=list)  # original ids, removal order
    kept_to_original: np.ndarray = None  # reduced id -> original id
    cliques_found: int = 0

    def summary(self):
        return {
            "removed_count": len(self.removed),
            "cliques_found": self.cliques_found,
            "kept_count": 0 if self.kept_to_original is None else len(self.kept_to_original),
        }


def parse_dimacs(text, weights_text=None, name=""):
    """Parse DIMACS .col content plus an optional weight file content.

    The weight file has one positive integer per line, line i giving the
    weight of (1-based) vertex i.  Without it all weights default to 1.
    Duplicate edges and both orientations of the same edge are merged.
    """
    n = None
    m_declared = None
    edges = []
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        parts = line.split()
        if parts[0] == "p":
            if n is not None:
                raise DimacsError("duplicate problem line", line_no)
            if len(parts) != 4 or parts[1] not in ("edge", "edges", "col"):
                raise DimacsError(f"malformed problem line: {line!r}", line_no)
            try:
                n, m_declared = int(parts[2]), int(parts[3])
            except ValueError:
                raise DimacsError(f"malformed problem line: {line!r}", line_no) from None
            if n <= 0:
                raise DimacsError(f"vertex count must be positive, got {n}", line_no)
        elif parts[0] == "e":
            if n is None:
                raise DimacsError("edge before problem line", line_no)
            if len(parts) != 3:
                raise DimacsError(f"malformed edge line: {line!r}", line_no)
            try:
                u, v = int(parts[1]), int(parts[2])
            except ValueError:
                raise DimacsError(f"malformed edge line: {line!r}", line_no) from None
            if u == v:
                raise DimacsError(f"self-loop 'e {u} {v}'", line_no)
            if not (1 <= u <= n and 1 <= v <= n):
                raise DimacsError(f"edge endpoint out of range [1, {n}]: ({u}, {v})", line_no)
            edges.append((u - 1, v - 1))
        # other line types (n, x, d, ...) are ignored like comments

    if n is None:
        raise DimacsError("missing 'p edge n m' line")

    weights = np.ones(n, dtype=np.int64)
    if weights_text is not None:
        vals = []
        for line_no, raw in enumerate(weights_text.splitlines(), start=1):
            line = raw.strip()
            if not line:
                continue
            try:
                w = int(line)
            except ValueError:
                raise DimacsError(f"malformed weight: {line!r}", line_no) from None
            if w < 1:
                raise DimacsError(f"non-positive weight {w}", line_no)
            vals.append(w)
        if len(vals) != n:
            raise DimacsError(f"weight count {len(vals)} != vertex count {n}")
        weights = np.array(vals, dtype=np.int64)

    return WeightedGraph(n, edges, weights, name=name)


def write_dimacs(g):
    """Serialize back to (col_text, weights_text); inverse of parse_dimacs."""
    lines = [f"p edge {g.n} {g.m}"]
    for u, v in g.edges:
        lines.append(f"e {u + 1} {v + 1}")
    col_text = "\n".join(lines) + "\n"
    weights_text = "\n".join(str(int(w)) for w in g.weights) + "\n"
    return col_text, weights_text


def load_instance(path, weights_path=None):
    """Load a .col file; weights from weights_path or '<path>.w' when present."""
    with open(path, "r", encoding="utf-8", errors="replace") as f:
        text = f.read()
    if weights_path is None:
        candidate = str(path) + ".w"
        weights_path = candidate if os.path.exists(candidate) else None
    wtext = None
    if weights_path is not None:
        with open(weights_path, "r", encoding="utf-8", errors="replace") as f:
            wtext = f.read()
    name = os.path.splitext(os.path.basename(str(path)))[0]
    return parse_dimacs(text, wtext, name=name)


def reduce_graph(g, clique_budget=None):
    """Remove vertices that can never raise the optimal score.

    For a clique C of size l whose smallest weight is w', any vertex outside
    C with current degree exactly l-1 and weight strictly below w' can be
    dropped: in any legal coloring the clique members occupy l classes whose
    max weights are all >= w', and the dropped vertex blocks at most l-1 of
    them, so it can always be re-inserted without changing the score.  Each
    removal is validated against the current graph (all clique members still
    present, current degree), so re-insertion in reverse order stays sound.
    Iterates until fixpoint or until the clique budget is exhausted.
    """
    if clique_budget is None:
        clique_budget = 10 * g.n

    alive = np.ones(g.n, dtype=bool)
    cur_degree = g.degrees.astype(np.int64).copy()
    adj_sets = [set(map(int, a)) for a in g.adjacency]
    removed = []
    cliques_found = 0
    budget_left = clique_budget

    changed = True
    while changed and budget_left > 0:
        changed = False
        live = [v for v in range(g.n) if alive[v]]
        live_adj = {v: {u for u in adj_sets[v] if alive[u]} for v in live}
        live_deg = {v: len(live_adj[v]) for v in live}
        cliques = _greedy_cliques_on(live, live_adj, live_deg, budget_left)
        budget_left -= len(cliques)
        cliques_found += len(cliques)
        for clique in cliques:
            if not all(alive[u] for u in clique):
                continue
            l = len(clique)
            w_min = min(int(g.weights[u]) for u in clique)
            cl_set = set(clique)
            for v in range(g.n):
                if not alive[v] or v in cl_set:
                    continue
                if cur_degree[v] == l - 1 and g.weights[v] < w_min:
                    alive[v] = False
                    removed.append(v)
                    for u in adj_sets[v]:
                        if alive[u]:
                            cur_degree[u] -= 1
                    changed = True

    kept = np.flatnonzero(alive)
    old_to_new = -np.ones(g.n, dtype=np.int64)
    old_to_new[kept] = np.arange(len(kept))
    new_edges = [
        (old_to_new[u], old_to_new[v]) for u, v in g.edges if alive[u] and alive[v]
    ]
    reduced = WeightedGraph(len(kept), new_edges, g.weights[kept], name=g.name)
    report = ReductionReport(
        removed=removed, kept_to_original=kept.astype(np.int64), cliques_found=cliques_found
    )
    return reduced, report


def _greedy_cliques_on(vertices, adj, deg, budget):
    """Grow one maximal clique from each vertex, highest degree first.

    Deterministic; stops after `budget` cliques.  Only cliques of size >= 2
    count (isolated vertices contribute nothing).  Completeness affects how
    much gets reduced, never correctness of the removals.
    """
    order = sorted(vertices, key=lambda v: (-deg[v], v))
    cliques = []
    for start in order:
        if len(cliques) >= budget:
            break
        if not adj[start]:
            continue
        clique = [start]
        for cand in sorted(adj[start], key=lambda v: (-deg[v], v)):
            if all(cand in adj[u] for u in clique):
                clique.append(cand)
        cliques.append(clique)
    return cliques


def expand_coloring(original, report, reduced_assign, k):
    """Re-express a reduced-graph coloring on the original vertex set.

    Removed vertices are re-inserted in reverse removal order; each takes a
    color absent from its (already colored) neighbors whose class max weight
    is at least its own weight, so legality and score are both preserved.
    """
    assign = -np.ones(original.n, dtype=np.int32)
    assign[report.kept_to_original] = reduced_assign
    kmax = int(k)

    class_max = np.zeros(kmax + len(report.removed), dtype=np.int64)
    for v in report.kept_to_original:
        c = assign[v]
        class_max[c] = max(class_max[c], original.weights[v])

    for v in reversed(report.removed):
        used = {int(assign[u]) for u in original.adjacency[v] if assign[u] >= 0}
        w = int(original.weights[v])
        choice = -1
        for c in range(kmax):
            if c not in used and class_max[c] >= w:
                choice = c
                break
        if choice < 0:
            # should not happen for valid reductions; fall back defensively
            for c in range(kmax):
                if c not in used:
                    choice = c
                    break
        if choice < 0:
            choice = kmax
            kmax += 1
        assign[v] = choice
        class_max[choice] = max(class_max[choice], w)

    return assign.astype(np.int32), kmax
