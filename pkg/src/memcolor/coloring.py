"""Solution representation and objective evaluation.

A coloring is a partition of the vertices into at most k classes, stored as
a per-vertex color array.  Two objectives share the representation: the
weighted score (sum over nonempty classes of the class's max vertex weight)
and the conflict count (monochromatic edges).  The eval structures support
O(1)-ish deltas for single-vertex recolorings; the numba search kernels in
``localsearch`` maintain the same bookkeeping in array form.
"""

from __future__ import annotations

import numpy as np


class Coloring:
    """Per-vertex color assignment over a fixed palette of k slots."""

    def __init__(self, assign, k):
        self.assign = np.asarray(assign, dtype=np.int32).copy()
        self.k = int(k)
        if self.assign.size == 0:
            raise ValueError("empty coloring")
        if (self.assign < 0).any() or (self.assign >= self.k).any():
            raise ValueError("color id out of range [0, k)")

    @property
    def n(self):
        return self.assign.size

    @property
    def group_sizes(self):
        return np.bincount(self.assign, minlength=self.k)

    def copy(self):
        return Coloring(self.assign, self.k)

    def __eq__(self, other):
        return (
            isinstance(other, Coloring)
            and self.k == other.k
            and np.array_equal(self.assign, other.assign)
        )

    def __repr__(self):
        return f"Coloring(n={self.n}, k={self.k})"


def _as_assign(s):
    return s.assign if isinstance(s, Coloring) else np.asarray(s)


def wvcp_score(g, s):
    """(score, conflicts) computed from scratch.

    Score is the sum over nonempty classes of the class's largest weight;
    empty classes contribute nothing.  Conflicts counts monochromatic edges.
    """
    assign = _as_assign(s)
    k = int(assign.max()) + 1 if not isinstance(s, Coloring) else s.k
    score = 0
    for c in range(k):
        members = assign == c
        if members.any():
            score += int(g.weights[members].max())
    conflicts = col_conflicts(g, assign)
    return score, conflicts


def col_conflicts(g, s):
    """Number of edges whose endpoints share a color."""
    assign = _as_assign(s)
    if g.m == 0:
        return 0
    return int((assign[g.edges[:, 0]] == assign[g.edges[:, 1]]).sum())


def is_legal(g, s):
    return col_conflicts(g, s) == 0


def penalized_score(score, conflicts, phi):
    """Extended objective: raw score plus phi per conflicting edge."""
    if phi <= 0:
        raise ValueError("phi must be positive")
    return float(score) + float(phi) * float(conflicts)


class WvcpEval:
    """Incremental evaluation state for the weighted objective.

    Keeps, per color class, a count of member vertices at each weight rank
    (ranks index the sorted distinct weight values of the graph), so the
    class max under a move is recoverable without rescanning the class.
    Also keeps the standard per-vertex neighbor-color table for conflicts.
    """

    def __init__(self, g, coloring):
        self.g = g
        self.k = coloring.k
        self.assign = coloring.assign.copy()
        n, k = g.n, self.k
        nranks = len(g.weight_values)

        self.weight_counts = np.zeros((k, nranks), dtype=np.int32)
        for v in range(n):
            self.weight_counts[self.assign[v], g.weight_ranks[v]] += 1

        self.neighbor_colors = np.zeros((n, k), dtype=np.int32)
        for u, v in g.edges:
            self.neighbor_colors[u, self.assign[v]] += 1
            self.neighbor_colors[v, self.assign[u]] += 1

        self.score, self.conflicts = wvcp_score(g, coloring)

    def class_max_rank(self, c):
        nz = np.flatnonzero(self.weight_counts[c])
        return int(nz[-1]) if nz.size else -1

    def _max_value(self, c):
        r = self.class_max_rank(c)
        return int(self.g.weight_values[r]) if r >= 0 else 0

    def _max_value_without(self, c, rank):
        """Class max if one vertex at `rank` were removed from class c."""
        counts = self.weight_counts[c]
        top = self.class_max_rank(c)
        if top != rank or counts[rank] > 1:
            return int(self.g.weight_values[top]) if top >= 0 else 0
        nz = np.flatnonzero(counts[:rank])
        return int(self.g.weight_values[nz[-1]]) if nz.size else 0

    def move_delta(self, v, to):
        """(d_score, d_conflicts) for recoloring v to `to`; pure query."""
        frm = int(self.assign[v])
        if to == frm:
            raise ValueError("move must change the color")
        if not (0 <= to < self.k):
            raise ValueError("target color out of range")
        w = int(self.g.weights[v])
        rank = int(self.g.weight_ranks[v])

        d_src = self._max_value_without(frm, rank) - self._max_value(frm)
        tgt_max = self._max_value(to)
        d_tgt = max(0, w - tgt_max)
        d_conf = int(self.neighbor_colors[v, to]) - int(self.neighbor_colors[v, frm])
        return d_src + d_tgt, d_conf

    def apply(self, v, to):
        d_score, d_conf = self.move_delta(v, to)
        frm = int(self.assign[v])
        rank = int(self.g.weight_ranks[v])
        self.weight_counts[frm, rank] -= 1
        self.weight_counts[to, rank] += 1
        for u in self.g.adjacency[v]:
            self.neighbor_colors[u, frm] -= 1
            self.neighbor_colors[u, to] += 1
        self.assign[v] = to
        self.score += d_score
        self.conflicts += d_conf
        return d_score, d_conf

    def coloring(self):
        return Coloring(self.assign, self.k)


class ColEval:
    """Incremental conflict evaluation (the classic gamma table)."""

    def __init__(self, g, coloring):
        self.g = g
        self.k = coloring.k
        self.assign = coloring.assign.copy()
        self.neighbor_colors = np.zeros((g.n, self.k), dtype=np.int32)
        for u, v in g.edges:
            self.neighbor_colors[u, self.assign[v]] += 1
            self.neighbor_colors[v, self.assign[u]] += 1
        self.conflicts = col_conflicts(g, coloring)

    def move_delta(self, v, to):
        frm = int(self.assign[v])
        if to == frm:
            raise ValueError("move must change the color")
        return int(self.neighbor_colors[v, to]) - int(self.neighbor_colors[v, frm])

    def apply(self, v, to):
        d = self.move_delta(v, to)
        frm = int(self.assign[v])
        for u in self.g.adjacency[v]:
            self.neighbor_colors[u, frm] -= 1
            self.neighbor_colors[u, to] += 1
        self.assign[v] = to
        self.conflicts += d
        return d

    def coloring(self):
        return Coloring(self.assign, self.k)


def col_move_delta(eval_state, v, to):
    return eval_state.move_delta(v, to)


def wvcp_move_delta(eval_state, v, to):
    return eval_state.move_delta(v, to)


def write_solution(g, coloring, score):
    """Solution text: 's <score>' then one 'v <vertex-1-based> <color>' per vertex."""
    lines = [f"s {int(score)}"]
    for v in range(g.n):
        lines.append(f"v {v + 1} {int(coloring.assign[v])}")
    return "\n".join(lines) + "\n"


def read_solution(g, text):
    """Parse and validate a solution file; rejects illegal colorings."""
    score = None
    assign = -np.ones(g.n, dtype=np.int32)
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        parts = line.split()
        if parts[0] == "s":
            score = int(parts[1])
        elif parts[0] == "v":
            v, c = int(parts[1]) - 1, int(parts[2])
            if not (0 <= v < g.n):
                raise ValueError(f"line {line_no}: vertex {v + 1} out of range")
            if c < 0:
                raise ValueError(f"line {line_no}: negative color")
            assign[v] = c
    if score is None:
        raise ValueError("missing 's <score>' line")
    if (assign < 0).any():
        missing = int(np.argmax(assign < 0)) + 1
        raise ValueError(f"vertex {missing} has no color")
    coloring = Coloring(assign, int(assign.max()) + 1)
    if not is_legal(g, coloring):
        raise ValueError("solution is not a legal coloring")
    got, _ = wvcp_score(g, coloring)
    if got != score:
        raise ValueError(f"declared score {score} != recomputed {got}")
    return score, coloring
