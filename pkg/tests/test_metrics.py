import math
from itertools import combinations

import numpy as np
import pytest
from sklearn.metrics import adjusted_rand_score, normalized_mutual_info_score

from silencer.errors import ValidationError
from silencer.graph import Graph, generate_er
from silencer.metrics import ari, evaluate_all, modularity, nmi, pairwise_f1


def pair_f1_bruteforce(a, b):
    tp = fp = fn = 0
    for i, j in combinations(range(len(a)), 2):
        same_a, same_b = a[i] == a[j], b[i] == b[j]
        tp += same_a and same_b
        fp += same_a and not same_b
        fn += same_b and not same_a
    if tp == 0:
        return 0.0
    p, r = tp / (tp + fp), tp / (tp + fn)
    return 2 * p * r / (p + r)


def modularity_double_sum(a, labels):
    two_m = a.sum()
    k = a.sum(axis=1)
    q = 0.0
    for i in range(len(labels)):
        for j in range(len(labels)):
            if labels[i] == labels[j]:
                q += a[i, j] - k[i] * k[j] / two_m
    return q / two_m


def test_perfect_and_permuted_agreement():
    x = [0, 0, 1, 1, 2, 2]
    y = [5, 5, 3, 3, 9, 9]
    assert nmi(x, y) == pytest.approx(1.0)
    assert ari(x, y) == pytest.approx(1.0)
    assert pairwise_f1(x, y) == pytest.approx(1.0)


def test_against_sklearn(rng):
    for _ in range(30):
        x = rng.integers(0, 5, 80)
        y = rng.integers(0, 4, 80)
        assert nmi(x, y) == pytest.approx(normalized_mutual_info_score(x, y), abs=1e-12)
        assert ari(x, y) == pytest.approx(adjusted_rand_score(x, y), abs=1e-12)


def test_f1_against_bruteforce(rng):
    for _ in range(10):
        x = rng.integers(0, 4, 40).tolist()
        y = rng.integers(0, 3, 40).tolist()
        assert pairwise_f1(x, y) == pytest.approx(pair_f1_bruteforce(x, y), abs=1e-12)


def test_degenerate_partitions():
    assert nmi([0, 0, 0], [1, 1, 1]) == 1.0
    assert ari([0, 0, 0], [1, 1, 1]) == 1.0
    assert pairwise_f1([0, 1, 2], [0, 0, 1]) == 0.0
    assert nmi([0, 0, 1, 1], [0, 0, 0, 0]) == 0.0


def test_length_mismatch():
    with pytest.raises(ValidationError):
        nmi([0, 1], [0, 1, 2])


def test_two_triangles_modularity():
    g = Graph.from_edges(6, [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5), (2, 3)])
    q = modularity(g, [0, 0, 0, 1, 1, 1])
    assert q == pytest.approx(modularity_double_sum(g.adjacency, [0, 0, 0, 1, 1, 1]))
    assert q == pytest.approx(5 / 14)


def test_two_disjoint_edges_modularity():
    g = Graph.from_edges(4, [(0, 1), (2, 3)])
    assert modularity(g, [0, 0, 1, 1]) == pytest.approx(0.5)
    assert modularity(g, [0, 0, 0, 0]) == pytest.approx(0.0)


def test_modularity_errors():
    with pytest.raises(ValidationError):
        modularity(Graph(np.zeros((3, 3))), [0, 1, 2])
    g = generate_er(10, 0.5, 0)
    with pytest.raises(ValidationError):
        modularity(g, [0, 1])


def test_modularity_matches_networkx(rng):
    import networkx as nx

    g = generate_er(50, 0.1, 4)
    labels = rng.integers(0, 4, 50)
    comms = [set(np.flatnonzero(labels == c)) for c in range(4) if np.any(labels == c)]
    assert modularity(g, labels) == pytest.approx(nx.community.modularity(nx.from_numpy_array(g.adjacency), comms), abs=1e-12)


def test_evaluate_all_keys():
    assert set(evaluate_all([0, 1], [0, 1])) == {"nmi", "ari", "f1"}
