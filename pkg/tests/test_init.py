import numpy as np

from memcolor.coloring import col_conflicts, wvcp_score
from memcolor.graph import WeightedGraph
from memcolor.init import (
    greedy_wvcp_init,
    init_col_population,
    init_wvcp_population,
    random_col_init,
)
from memcolor.rng import TAG_INIT, Stream
from oracles import brute_force_wvcp, rand_graph


def test_edgeless_goes_into_one_class():
    g = WeightedGraph(3, [], [5, 3, 1])
    c = greedy_wvcp_init(g, Stream(0))
    assert c.k == 1
    assert wvcp_score(g, c) == (5, 0)


def test_triangle_needs_three_classes():
    g = WeightedGraph(3, [(0, 1), (1, 2), (0, 2)], [4, 4, 4])
    c = greedy_wvcp_init(g, Stream(1))
    assert c.k == 3
    assert wvcp_score(g, c) == (12, 0)


def test_k22_heavy_side_first():
    # K_{2,2} with the 9s on one side: greedy groups each side, score 10,
    # which equals the brute-force optimum here
    g = WeightedGraph(4, [(0, 2), (0, 3), (1, 2), (1, 3)], [9, 9, 1, 1])
    opt, _, _ = brute_force_wvcp(g)
    assert opt == 10
    for seed in range(10):
        c = greedy_wvcp_init(g, Stream(seed))
        score, conf = wvcp_score(g, c)
        assert conf == 0
        assert score == 10


def test_greedy_always_legal_on_random_graphs():
    for seed in range(100):
        g = rand_graph(2000 + seed, 4 + seed % 12, 0.5)
        c = greedy_wvcp_init(g, Stream(seed))
        assert col_conflicts(g, c) == 0


def test_greedy_reproducible():
    g = rand_graph(9, 15, 0.4)
    a = greedy_wvcp_init(g, Stream.derive(7, TAG_INIT, 0))
    b = greedy_wvcp_init(g, Stream.derive(7, TAG_INIT, 0))
    assert a == b


def test_random_col_k1_all_zero():
    c = random_col_init(5, 1, Stream(3))
    assert c.k == 1
    assert (c.assign == 0).all()


def test_random_col_reproducible():
    a = random_col_init(4, 4, Stream.derive(11, TAG_INIT, 2))
    b = random_col_init(4, 4, Stream.derive(11, TAG_INIT, 2))
    assert a == b


def test_random_col_frequencies_within_five_sigma():
    n, k = 10_000, 10
    c = random_col_init(n, k, Stream(12345))
    counts = np.bincount(c.assign, minlength=k)
    expected = n / k
    sigma = np.sqrt(n * (1 / k) * (1 - 1 / k))
    assert (np.abs(counts - expected) <= 5 * sigma).all()


def test_population_init_common_k_and_legality():
    g = rand_graph(77, 20, 0.4)
    out = init_wvcp_population(g, 16, master_seed=5)
    ks = [int(c.assign.max()) + 1 for c in out.colorings]
    assert out.k == max(ks)
    assert all(c.k == out.k for c in out.colorings)
    assert all(col_conflicts(g, c) == 0 for c in out.colorings)


def test_col_population_shapes():
    out = init_col_population(12, 3, 8, master_seed=9)
    assert len(out.colorings) == 8
    assert all(c.k == 3 for c in out.colorings)
    # different individuals draw from different streams
    assert any(
        not np.array_equal(out.colorings[0].assign, c.assign)
        for c in out.colorings[1:]
    )
