"""Left-right planarity vs a brute-force Kuratowski subdivision oracle."""

import itertools

import numpy as np
import pytest

from gfrl.categorical import substream
from gfrl.graphs import GraphState, pair_indices
from gfrl.planarity import is_planar_adjacency
from gfrl.rewards import is_planar


def complete_graph_edges(n):
    return [(i, j) for i in range(n) for j in range(i + 1, n)]


def k33_edges():
    return [(i, j + 3) for i in range(3) for j in range(3)]


def petersen_edges():
    outer = [(i, (i + 1) % 5) for i in range(5)]
    spokes = [(i, i + 5) for i in range(5)]
    inner = [(5 + i, 5 + (i + 2) % 5) for i in range(5)]
    return outer + spokes + inner


# --- oracle: planar iff no K5 or K3,3 subdivision ---------------------------


def _paths_between(adj, u, v, free):
    """Yield internal-vertex sets of simple u-v paths through ``free`` only."""
    if v in adj[u]:
        yield frozenset()

    def walk(cur, used):
        for w in adj[cur]:
            if w == v and used:
                yield frozenset(used)
            elif w in free and w not in used:
                yield from walk(w, used | {w})

    yield from walk(u, frozenset())


def _route_all(adj, pairs, free):
    if not pairs:
        return True
    u, v = pairs[0]
    for internals in _paths_between(adj, u, v, free):
        if _route_all(adj, pairs[1:], free - internals):
            return True
    return False


def _has_subdivision(n, edges, branch_degrees, pattern_pairs_fn):
    adj = [set() for _ in range(n)]
    for u, v in edges:
        adj[u].add(v)
        adj[v].add(u)
    k = len(branch_degrees)
    for combo in itertools.combinations(range(n), k):
        if any(len(adj[combo[i]]) < branch_degrees[i] for i in range(k)):
            continue
        for pairs in pattern_pairs_fn(combo):
            free = frozenset(set(range(n)) - set(combo))
            if _route_all(adj, pairs, free):
                return True
    return False


def _k5_pairs(combo):
    yield [(combo[i], combo[j]) for i in range(5) for j in range(i + 1, 5)]


def _k33_pairs(combo):
    for part in itertools.combinations(range(6), 3):
        if 0 not in part:
            continue  # fix vertex 0's side to halve the symmetry
        a = [combo[i] for i in part]
        b = [combo[i] for i in range(6) if i not in part]
        yield [(x, y) for x in a for y in b]


def kuratowski_planar(n, edges):
    if _has_subdivision(n, edges, [4] * 5, _k5_pairs):
        return False
    if _has_subdivision(n, edges, [3] * 6, _k33_pairs):
        return False
    return True


class TestKnownGraphs:
    def test_k4_planar(self):
        assert is_planar_adjacency(4, complete_graph_edges(4))

    def test_k5_not_planar(self):
        assert not is_planar_adjacency(5, complete_graph_edges(5))

    def test_k33_not_planar(self):
        assert not is_planar_adjacency(6, k33_edges())

    def test_petersen_not_planar(self):
        assert not is_planar_adjacency(10, petersen_edges())

    def test_k5_minus_edge_planar(self):
        assert is_planar_adjacency(5, complete_graph_edges(5)[1:])

    def test_trees_and_cycles(self):
        assert is_planar_adjacency(7, [(i, i + 1) for i in range(6)])
        assert is_planar_adjacency(7, [(i, (i + 1) % 7) for i in range(7)])

    def test_disconnected_with_k5_component(self):
        edges = complete_graph_edges(5) + [(5, 6)]
        assert not is_planar_adjacency(7, edges)

    def test_empty_and_tiny(self):
        assert is_planar_adjacency(1, [])
        assert is_planar_adjacency(2, [(0, 1)])

    def test_wheel_graphs(self):
        for k in range(3, 9):
            rim = [(i, (i + 1) % k) for i in range(k)]
            spokes = [(i, k) for i in range(k)]
            assert is_planar_adjacency(k + 1, rim + spokes)

    def test_k6_and_k7_not_planar(self):
        assert not is_planar_adjacency(6, complete_graph_edges(6))
        assert not is_planar_adjacency(7, complete_graph_edges(7))

    def test_two_k4_blocks_sharing_a_vertex(self):
        shift = [(i + 3, j + 3) for i, j in complete_graph_edges(4)]
        assert is_planar_adjacency(7, complete_graph_edges(4) + shift)


class TestAgainstOracle:
    def test_random_graphs_match_kuratowski_search(self):
        rng = substream(31)
        checked_nonplanar = 0
        for trial in range(1000):
            n = int(rng.integers(4, 9))
            p = rng.uniform(0.2, 0.8)
            edges = [
                (i, j)
                for i in range(n)
                for j in range(i + 1, n)
                if rng.random() < p
            ]
            want = kuratowski_planar(n, edges)
            got = is_planar_adjacency(n, edges)
            assert got == want, (n, edges)
            checked_nonplanar += not want
        assert checked_nonplanar > 100  # the sample actually exercises both sides

    def test_dense_band_near_the_edge_bound(self):
        # graphs near m = 3n - 6 are where the test earns its keep
        rng = substream(32)
        for trial in range(300):
            n = 8
            target_m = int(rng.integers(3 * n - 10, 3 * n - 5))
            all_pairs = complete_graph_edges(n)
            idx = rng.permutation(len(all_pairs))[:target_m]
            edges = [all_pairs[i] for i in idx]
            assert is_planar_adjacency(n, edges) == kuratowski_planar(n, edges)


class TestGraphStatePredicate:
    def test_edge_labels_count_as_edges(self):
        g = GraphState.from_edge_list(
            [0] * 5, [(i, j, 2) for i, j in complete_graph_edges(5)]
        )
        assert not is_planar(g)

    def test_no_edges_planar(self):
        g = GraphState(np.zeros(6, dtype=int), np.zeros((6, 6), dtype=int))
        assert is_planar(g)
