import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from memcolor.coloring import Coloring
from memcolor.distance import (
    approx_partition_distance,
    exact_partition_distance,
    overlap_matrix,
    pairwise_distances,
)
from memcolor.rng import Stream
from oracles import brute_force_partition_distance, rand_coloring


def test_identical_partitions_distance_zero():
    a = Coloring([0, 1, 2, 0], 3)
    assert approx_partition_distance(a, a) == 0
    assert exact_partition_distance(a, a) == 0


def test_label_permutation_is_free():
    a = Coloring([0, 0, 1, 1, 2], 3)
    b = Coloring([2, 2, 0, 0, 1], 3)
    assert approx_partition_distance(a, b) == 0
    assert exact_partition_distance(a, b) == 0


def test_single_reassignment_costs_one():
    a = Coloring([0, 0, 1, 1, 2, 2], 3)
    b = Coloring([0, 0, 1, 1, 2, 1], 3)
    assert exact_partition_distance(a, b) == 1
    assert approx_partition_distance(a, b) == 1


def test_two_class_hand_case():
    # {{1,2},{3,4}} vs {{1,3},{2,4}}: one vertex must move
    a = Coloring([0, 0, 1, 1], 2)
    b = Coloring([0, 1, 0, 1], 2)
    assert exact_partition_distance(a, b) == 1


def test_exact_matches_bijection_bruteforce():
    for seed in range(60):
        k = 2 + seed % 4
        n = 4 + seed % 7
        a = rand_coloring(seed, n, k)
        b = rand_coloring(seed + 999, n, k)
        want = brute_force_partition_distance(a, b, k)
        assert exact_partition_distance(Coloring(a, k), Coloring(b, k)) == want


def test_exact_lower_bounds_approx_on_random_pairs():
    for seed in range(300):
        k = 2 + seed % 5
        n = 3 + seed % 10
        a = Coloring(rand_coloring(seed, n, k), k)
        b = Coloring(rand_coloring(seed + 5000, n, k), k)
        e = exact_partition_distance(a, b)
        ap = approx_partition_distance(a, b)
        assert 0 <= e <= ap <= n


def test_metric_axioms_on_random_triples():
    for seed in range(100):
        k = 2 + seed % 4
        n = 4 + seed % 7
        a = Coloring(rand_coloring(seed, n, k), k)
        b = Coloring(rand_coloring(seed + 111, n, k), k)
        c = Coloring(rand_coloring(seed + 222, n, k), k)
        dab = exact_partition_distance(a, b)
        dba = exact_partition_distance(b, a)
        dbc = exact_partition_distance(b, c)
        dac = exact_partition_distance(a, c)
        assert dab == dba
        assert exact_partition_distance(a, a) == 0
        assert dac <= dab + dbc


@settings(max_examples=40, deadline=None)
@given(st.integers(min_value=0, max_value=10_000))
def test_approx_invariant_under_label_permutation(seed):
    s = Stream(seed)
    n = 4 + s.below(8)
    k = 2 + s.below(4)
    a = rand_coloring(seed, n, k)
    b = rand_coloring(seed + 77, n, k)
    perm = np.arange(k)
    Stream(seed + 1).shuffle(perm)
    base = approx_partition_distance(Coloring(a, k), Coloring(b, k))
    assert approx_partition_distance(Coloring(perm[a], k), Coloring(b, k)) == base
    assert approx_partition_distance(Coloring(a, k), Coloring(perm[b], k)) == base


def test_vertex_set_mismatch_rejected():
    with pytest.raises(ValueError):
        approx_partition_distance(Coloring([0, 1], 2), Coloring([0, 1, 0], 2))


def test_overlap_matrix_counts():
    a = [0, 0, 1, 1]
    b = [0, 1, 1, 1]
    m = overlap_matrix(np.array(a), np.array(b), 2)
    assert m.tolist() == [[1, 1], [0, 2]]


def test_pairwise_offspring_equal_to_pop_gives_zero_diagonal():
    pop = [Coloring(rand_coloring(i, 10, 3), 3) for i in range(4)]
    cross, within = pairwise_distances(pop, pop, k=3)
    assert np.diagonal(cross).tolist() == [0, 0, 0, 0]


def test_pairwise_counts_and_symmetry():
    pop = [Coloring(rand_coloring(i, 8, 3), 3) for i in range(2)]
    off = [Coloring(rand_coloring(10 + i, 8, 3), 3) for i in range(2)]
    cross, within = pairwise_distances(pop, off, k=3)
    assert cross.shape == (2, 2)
    assert within.shape == (2, 2)
    assert within[0, 1] == within[1, 0]
    assert within[0, 0] == within[1, 1] == 0
    # five computed values total: 4 cross + 1 within
    assert cross.size + 1 == 5


def test_pairwise_matches_single_calls():
    pop = [Coloring(rand_coloring(i, 12, 4), 4) for i in range(5)]
    off = [Coloring(rand_coloring(50 + i, 12, 4), 4) for i in range(5)]
    cross, within = pairwise_distances(pop, off, k=4)
    for i in range(5):
        for j in range(5):
            assert cross[i, j] == approx_partition_distance(pop[i], off[j])
            if i < j:
                assert within[i, j] == approx_partition_distance(off[i], off[j])


def test_pairwise_thread_count_independent():
    pop = [Coloring(rand_coloring(i, 30, 5), 5) for i in range(16)]
    off = [Coloring(rand_coloring(99 + i, 30, 5), 5) for i in range(16)]
    c1, w1 = pairwise_distances(pop, off, k=5, thread_count=1)
    c8, w8 = pairwise_distances(pop, off, k=5, thread_count=8)
    assert np.array_equal(c1, c8)
    assert np.array_equal(w1, w8)
