import numpy as np
import pytest

from memcolor.coloring import (
    ColEval,
    Coloring,
    WvcpEval,
    col_conflicts,
    col_move_delta,
    is_legal,
    penalized_score,
    read_solution,
    write_solution,
    wvcp_move_delta,
    wvcp_score,
)
from memcolor.graph import WeightedGraph, load_instance
from memcolor.rng import Stream
from oracles import brute_force_wvcp, rand_coloring, rand_graph, scratch_wvcp


def test_single_vertex_single_class():
    g = WeightedGraph(1, [], [7])
    assert wvcp_score(g, Coloring([0], 1)) == (7, 0)


def test_edge_same_vs_split():
    g = WeightedGraph(2, [(0, 1)], [3, 5])
    assert wvcp_score(g, Coloring([0, 0], 1)) == (5, 1)
    assert wvcp_score(g, Coloring([0, 1], 2)) == (8, 0)


def test_empty_classes_contribute_nothing():
    g = WeightedGraph(2, [], [3, 5])
    assert wvcp_score(g, Coloring([0, 3], 5)) == (8, 0)


def test_p06_optimum_is_565(instances):
    g = load_instance(instances("p06.col"))
    score, assign, k = brute_force_wvcp(g)
    assert score == 565
    got = wvcp_score(g, Coloring(assign, k))
    assert got == (565, 0)


def test_score_invariant_under_color_permutation():
    g = rand_graph(17, 10, 0.4)
    s = Stream(5)
    assign = rand_coloring(23, g.n, 4)
    base = wvcp_score(g, Coloring(assign, 4))
    perm = np.array([2, 0, 3, 1])
    assert wvcp_score(g, Coloring(perm[assign], 4)) == base


def test_conflicts_zero_iff_legal_edge_scan():
    for seed in range(20):
        g = rand_graph(300 + seed, 9, 0.4)
        assign = rand_coloring(seed, g.n, 3)
        manual = sum(1 for u, v in g.edges if assign[u] == assign[v])
        c = col_conflicts(g, assign)
        assert c == manual
        assert (c == 0) == is_legal(g, assign)


def test_penalized_score_examples():
    assert penalized_score(10, 0, 4.0) == 10.0
    assert penalized_score(10, 3, 4.0) == 22.0
    assert penalized_score(565, 0, 123.456) == 565.0
    with pytest.raises(ValueError):
        penalized_score(1, 0, 0.0)


def test_move_sole_vertex_to_empty_class():
    g = WeightedGraph(3, [], [4, 2, 1])
    ev = WvcpEval(g, Coloring([0, 1, 1], 3))
    d_score, d_conf = wvcp_move_delta(ev, 0, 2)
    assert d_score == 0 and d_conf == 0


def test_move_edge_out_of_shared_class():
    g = WeightedGraph(2, [(0, 1)], [3, 5])
    ev = WvcpEval(g, Coloring([0, 0], 2))
    d_score, d_conf = wvcp_move_delta(ev, 0, 1)
    assert (d_score, d_conf) == (3, -1)


def test_duplicate_max_keeps_class_max():
    g = WeightedGraph(2, [], [9, 9])
    ev = WvcpEval(g, Coloring([0, 0], 2))
    d_score, d_conf = wvcp_move_delta(ev, 0, 1)
    assert (d_score, d_conf) == (9, 0)


def test_wvcp_deltas_match_scratch_on_random_moves():
    checked = 0
    for seed in range(40):
        g = rand_graph(700 + seed, 6 + seed % 6, 0.5)
        k = 3 + seed % 3
        assign = rand_coloring(seed, g.n, k)
        ev = WvcpEval(g, Coloring(assign, k))
        s = Stream(seed)
        for _ in range(5):
            v = s.below(g.n)
            to = s.below(k)
            if to == ev.assign[v]:
                to = (to + 1) % k
            d_score, d_conf = ev.move_delta(v, to)
            before = (ev.score, ev.conflicts)
            new_assign = ev.assign.copy()
            new_assign[v] = to
            want = scratch_wvcp(g, new_assign, k)
            assert (before[0] + d_score, before[1] + d_conf) == want
            ev.apply(v, to)
            assert (ev.score, ev.conflicts) == want
            checked += 1
    assert checked == 200


def test_col_deltas_exhaustive_scratch():
    g = rand_graph(901, 8, 0.5)
    k = 3
    assign = rand_coloring(31, g.n, k)
    ev = ColEval(g, Coloring(assign, k))
    for v in range(g.n):
        for to in range(k):
            if to == assign[v]:
                continue
            d = col_move_delta(ev, v, to)
            new_assign = assign.copy()
            new_assign[v] = to
            assert ev.conflicts + d == col_conflicts(g, new_assign)


def test_triangle_and_even_cycle():
    tri = WeightedGraph(3, [(0, 1), (1, 2), (0, 2)], [1, 1, 1])
    assert col_conflicts(tri, Coloring([0, 0, 0], 1)) == 3
    cyc = WeightedGraph(6, [(i, (i + 1) % 6) for i in range(6)], [1] * 6)
    assert col_conflicts(cyc, Coloring([0, 1, 0, 1, 0, 1], 2)) == 0


def test_gamma_table_invariant():
    g = rand_graph(19, 10, 0.5)
    assign = rand_coloring(3, g.n, 4)
    ev = ColEval(g, Coloring(assign, 4))
    for v in range(g.n):
        for c in range(4):
            want = sum(1 for u in g.adjacency[v] if assign[u] == c)
            assert ev.neighbor_colors[v, c] == want


def test_group_sizes_partition():
    c = Coloring([0, 2, 2, 1, 0], 4)
    assert list(c.group_sizes) == [2, 1, 2, 0]
    assert c.group_sizes.sum() == c.n


def test_coloring_rejects_out_of_range():
    with pytest.raises(ValueError):
        Coloring([0, 3], 3)
    with pytest.raises(ValueError):
        Coloring([-1, 0], 2)


def test_solution_roundtrip_and_validation():
    g = WeightedGraph(3, [(0, 1)], [3, 5, 2])
    col = Coloring([0, 1, 0], 2)
    score, _ = wvcp_score(g, col)
    text = write_solution(g, col, score)
    got_score, got = read_solution(g, text)
    assert got_score == score
    assert np.array_equal(got.assign, col.assign)

    bad = text.replace("s 8", "s 9")
    with pytest.raises(ValueError):
        read_solution(g, bad)

    illegal = write_solution(g, Coloring([0, 0, 1], 2), 5)
    with pytest.raises(ValueError):
        read_solution(g, illegal)
