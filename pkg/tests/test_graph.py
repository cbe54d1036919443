import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from memcolor.graph import (
    DimacsError,
    WeightedGraph,
    expand_coloring,
    load_instance,
    parse_dimacs,
    reduce_graph,
    write_dimacs,
)
from oracles import brute_force_wvcp, rand_graph


def test_parse_basic_path():
    text = "c a comment\np edge 3 2\ne 1 2\ne 2 3\n"
    g = parse_dimacs(text, "3\n5\n2\n")
    assert g.n == 3
    assert g.m == 2
    assert list(g.weights) == [3, 5, 2]
    assert g.has_edge(0, 1) and g.has_edge(1, 2) and not g.has_edge(0, 2)


def test_parse_deduplicates_reversed_edges():
    text = "p edge 3 3\ne 1 2\ne 2 3\ne 2 1\n"
    g = parse_dimacs(text)
    assert g.m == 2


def test_parse_defaults_weights_to_one():
    g = parse_dimacs("p edge 2 1\ne 1 2\n")
    assert list(g.weights) == [1, 1]


@pytest.mark.parametrize(
    "text,wtext,fragment",
    [
        ("p edge x 2\ne 1 2\n", None, "malformed problem"),
        ("p edge 3 1\ne 1 4\n", None, "out of range"),
        ("p edge 3 1\ne 2 2\n", None, "self-loop"),
        ("p edge 3 0\n", "1\n2\n", "weight count"),
        ("p edge 2 0\n", "1\n-3\n", "non-positive"),
        ("e 1 2\n", None, "before problem line"),
        ("", None, "missing"),
    ],
)
def test_parse_rejects_malformed(text, wtext, fragment):
    with pytest.raises(DimacsError) as err:
        parse_dimacs(text, wtext)
    assert fragment in str(err.value)


def test_parse_error_carries_line_number():
    with pytest.raises(DimacsError) as err:
        parse_dimacs("p edge 3 2\ne 1 2\ne 3 3\n")
    assert err.value.line_no == 3


def test_p06_has_sixteen_vertices(instances):
    g = load_instance(instances("p06.col"))
    assert g.n == 16
    assert (g.weights >= 1).all()


def test_adjacency_invariants():
    g = rand_graph(3, 12, 0.5)
    for v in range(g.n):
        assert g.degrees[v] == len(g.adjacency[v])
        for u in g.adjacency[v]:
            assert v in g.adjacency[u]


def test_roundtrip_explicit():
    g = rand_graph(11, 9, 0.5, wmax=7)
    col_text, w_text = write_dimacs(g)
    g2 = parse_dimacs(col_text, w_text)
    assert g == g2


@settings(max_examples=25, deadline=None)
@given(st.integers(min_value=0, max_value=10_000))
def test_roundtrip_random_graphs(seed):
    g = rand_graph(seed, 1 + seed % 10, 0.4, wmax=9)
    col_text, w_text = write_dimacs(g)
    assert parse_dimacs(col_text, w_text) == g


def test_rejects_self_loop_and_bad_weights():
    with pytest.raises(ValueError):
        WeightedGraph(2, [(0, 0)], [1, 1])
    with pytest.raises(ValueError):
        WeightedGraph(2, [(0, 1)], [1, 0])


# --- reduction ---


def test_reduce_pendant_below_clique_min_weight():
    # edge clique (10, 5); pendant of weight 3 on the heavy end has degree 1
    # = l-1 and weight < 5, so it must be removed
    g = WeightedGraph(3, [(0, 1), (0, 2)], [10, 5, 3])
    reduced, report = reduce_graph(g)
    assert report.removed == [2]
    assert reduced.n == 2
    before, _, _ = brute_force_wvcp(g)
    after, _, _ = brute_force_wvcp(reduced)
    assert before == after == 15


def test_reduce_star_equal_min_weight_not_removed():
    # clique {center, leaf} has smallest weight 1; leaves are not strictly
    # below it, so nothing goes
    g = WeightedGraph(4, [(0, 1), (0, 2), (0, 3)], [10, 1, 1, 1])
    reduced, report = reduce_graph(g)
    assert report.removed == []
    assert reduced.n == 4


def test_reduce_equal_weights_noop():
    g = rand_graph(5, 10, 0.5, wmax=1)
    reduced, report = reduce_graph(g)
    assert report.removed == []
    assert reduced.n == g.n


def test_reduce_edgeless_noop():
    g = WeightedGraph(4, [], [4, 3, 2, 1])
    reduced, report = reduce_graph(g)
    assert report.removed == []
    assert report.cliques_found == 0


def test_reduce_report_partitions_vertices():
    g = rand_graph(21, 12, 0.3, wmax=9)
    reduced, report = reduce_graph(g)
    kept = set(int(v) for v in report.kept_to_original)
    assert kept.isdisjoint(report.removed)
    assert len(report.removed) + reduced.n == g.n


def test_reduce_preserves_bruteforce_optimum_on_random_graphs():
    hits = 0
    for seed in range(50):
        g = rand_graph(1000 + seed, 4 + seed % 7, 0.45, wmax=9)
        reduced, report = reduce_graph(g)
        before, _, _ = brute_force_wvcp(g)
        after, assign, k = brute_force_wvcp(reduced)
        assert before == after, f"seed {seed}: {before} != {after}"
        if report.removed:
            hits += 1
            # re-expression keeps legality and the score
            full_assign, full_k = expand_coloring(g, report, assign, k)
            from memcolor.coloring import Coloring, wvcp_score

            score, conflicts = wvcp_score(g, Coloring(full_assign, full_k))
            assert conflicts == 0
            assert score == before
    assert hits > 0, "no random graph exercised a removal; widen the generator"


def test_reduce_budget_degrades_gracefully():
    g = rand_graph(77, 14, 0.5, wmax=9)
    reduced_full, _ = reduce_graph(g)
    reduced_budget, _ = reduce_graph(g, clique_budget=1)
    before, _, _ = brute_force_wvcp(g)
    after, _, _ = brute_force_wvcp(reduced_budget)
    assert before == after
    assert reduced_budget.n >= reduced_full.n
