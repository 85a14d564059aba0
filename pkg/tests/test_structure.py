# tests/test_structure.py

import itertools
import math

import networkx as nx
import numpy as np
import pytest

from src.modules.structure.service import (
    ComponentKind, Hypergraph, HypergraphBuilder, RootedTree, classify_component, core, disjoint_union,
    hanging_tree, is_r_simple, is_r_sparse, is_saturated, prune, saturated_vertices,
)
from src.modules.vocabulary.presets import preset
from src.utils.errors import ExcludedEdge, NotATree, NotConnected, UnknownVertex, Unreachable


def test_basic_measures(triangle_with_tail):
    H = triangle_with_tail
    assert H.order == 6
    assert H.num_edges == 5
    assert H.excess() == -1
    assert H.degree(2) == 3
    assert H.degree(9) == 0
    assert H.distance(0, 4) == 3
    assert math.isinf(H.distance(0, 9))
    assert H.neighborhood([4], 2) == frozenset({2, 3, 4})
    assert len(H.components()) == 2
    with pytest.raises(UnknownVertex):
        H.degree(42)


def test_edges_are_canonical(graph_vocab):
    H = Hypergraph.from_edges(graph_vocab, [("E", (3, 1)), ("E", (1, 3))])
    assert list(H.edges()) == [("E", (1, 3))]
    assert H.has_edge("E", (3, 1))
    with pytest.raises(ExcludedEdge):
        HypergraphBuilder(graph_vocab).add_edge("E", (2, 2))


def test_loops_allowed_in_digraph_loops(loops_vocab):
    H = Hypergraph.from_edges(loops_vocab, [("E", (0, 0)), ("E", (0, 1)), ("E", (1, 0))])
    assert H.num_edges == 3
    assert H.excess() == 1
    assert H.degree(0) == 3


def test_hyperedge_gaifman_graph():
    H = Hypergraph.from_edges(preset("hypergraph3"), [("E", (0, 1, 2)), ("E", (2, 3, 4))])
    assert H.excess() == -1
    assert H.distance(0, 4) == 2
    assert H.diameter() == 2


def test_components_and_distances_agree_with_networkx():
    G = nx.gnm_random_graph(40, 45, seed=7)
    H = Hypergraph.from_edges(preset("graph"), [("E", e) for e in G.edges()], vertices=G.nodes())
    ours = sorted(sorted(c.vertices) for c in H.components())
    theirs = sorted(sorted(c) for c in nx.connected_components(G))
    assert ours == theirs
    lengths = nx.single_source_shortest_path_length(G, 0)
    d = H.distances_from([0])
    for v, expected in lengths.items():
        assert d[H.index_of([v])[0]] == expected
    assert sum(np.isfinite(d)) == len(lengths)


def test_induced_and_equality(triangle_with_tail, make_graph):
    sub = triangle_with_tail.induced([0, 1, 2])
    assert sub == make_graph([(0, 1), (1, 2), (0, 2)])
    assert sub.excess() == 0


def test_prune_strips_trees(path4, triangle_with_tail):
    assert prune(path4).order == 0
    assert prune(path4, marked=[0, 3]) == path4
    remainder = prune(triangle_with_tail)
    assert remainder.vertices == frozenset({0, 1, 2})
    assert remainder.num_edges == 3


def test_saturation(triangle_with_tail, theta, path4):
    tri = triangle_with_tail.induced([0, 1, 2])
    assert is_saturated(tri)
    assert is_saturated(theta)
    assert not is_saturated(path4)
    assert not is_saturated(triangle_with_tail)


def test_classify_component(triangle_with_tail, theta, path4):
    tri = classify_component(triangle_with_tail.induced([0, 1, 2]))
    assert tri.kind is ComponentKind.UNICYCLE and tri.cycle
    dense = classify_component(theta)
    assert dense.kind is ComponentKind.DENSE and dense.saturated and not dense.cycle
    tree = classify_component(path4)
    assert tree.kind is ComponentKind.TREE and not tree.saturated
    with pytest.raises(NotConnected):
        classify_component(triangle_with_tail)


def test_core_grows_with_radius(triangle_with_tail):
    assert core(triangle_with_tail, r=0).vertices == frozenset({0, 1, 2})
    assert core(triangle_with_tail, r=1).vertices == frozenset({0, 1, 2, 3})
    assert core(triangle_with_tail, marked=[9], r=1).vertices == frozenset({0, 1, 2, 3, 9})
    assert core(triangle_with_tail.induced([2, 3, 4]), r=2).order == 0


def test_saturated_vertices_in_dense_component(theta):
    assert saturated_vertices(theta, 0) == frozenset()
    assert saturated_vertices(theta, 1) == theta.vertices


def test_hanging_tree(triangle_with_tail):
    t3 = hanging_tree(triangle_with_tail, (), 3)
    assert t3.root == 3
    assert list(t3.tree.edges()) == [("E", (3, 4))]
    assert t3.radius == 1
    t4 = hanging_tree(triangle_with_tail, (), 4)
    assert t4.tree.order == 1 and t4.tree.num_edges == 0
    with pytest.raises(Unreachable):
        hanging_tree(triangle_with_tail, (), 9)


def test_rooted_tree_rejects_cycles(triangle_with_tail):
    with pytest.raises(NotATree):
        RootedTree(triangle_with_tail.induced([0, 1, 2]), 0)


def test_simple_and_sparse(triangle_with_tail, theta):
    assert is_r_simple(triangle_with_tail, 1)
    assert not is_r_simple(theta, 1)
    assert is_r_simple(theta, 0)
    assert is_r_sparse(theta, 1)
    assert not is_r_sparse(theta, 2)
    assert is_r_sparse(triangle_with_tail, 3)


def fan(make_graph, blades, extra=()):
    """Hub 0 joined to 1..blades, plus the path 1 - 2 - ... - blades."""
    spokes = [(0, i) for i in range(1, blades + 1)]
    rim = [(i, i + 1) for i in range(1, blades)]
    return make_graph(spokes + rim + list(extra))


def test_sparseness_on_large_dense_balls(make_graph):
    H = fan(make_graph, 18)
    assert H.num_edges == 35
    assert is_r_sparse(H, 1)
    # K4 on 0, 1, 2, 3 has excess 2 and diameter 1
    assert not is_r_sparse(fan(make_graph, 18, extra=[(1, 3)]), 1)
    assert not is_r_sparse(H, 2)


def test_disjoint_union(path4, triangle_with_tail):
    union, mappings = disjoint_union(path4.vocabulary, [path4, triangle_with_tail])
    assert union.order == path4.order + triangle_with_tail.order
    assert union.num_edges == 8
    assert mappings[0] == {0: 0, 1: 1, 2: 2, 3: 3}
    assert len(union.components()) == 3


def _excess_of(edges):
    covered = {v for _, t in edges for v in t}
    return sum(len(t) - 1 for _, t in edges) - len(covered)


def brute_saturated(H):
    """Every non-empty proper sub-hypergraph has smaller excess."""
    if not H.is_connected() or H.excess() < 0:
        return False
    edges = list(H.edges())
    return all(_excess_of(sub) < H.excess()
               for size in range(1, len(edges)) for sub in itertools.combinations(edges, size))


def random_component(name, seed):
    rng = np.random.default_rng(seed)
    vocab = preset(name)
    arity = vocab.max_arity
    n = int(rng.integers(arity + 1, 8))
    m = int(rng.integers(n // (arity - 1), n // (arity - 1) + 4))
    edges = [("E", tuple(int(v) for v in rng.choice(n, size=arity, replace=False))) for _ in range(m)]
    H = Hypergraph.from_edges(vocab, edges)
    return max(H.components(), key=lambda C: (C.num_edges, C.order))


@pytest.mark.parametrize("name", ["graph", "hypergraph3"])
@pytest.mark.parametrize("seed", range(15))
def test_pruning_matches_subset_search(name, seed):
    C = random_component(name, seed)
    edges = list(C.edges())
    if len(edges) > 10:
        pytest.skip("too many edges for the subset search")
    assert is_saturated(C) == brute_saturated(C)
    union = set()
    for size in range(1, len(edges) + 1):
        for sub in itertools.combinations(edges, size):
            S = C.edge_subgraph(sub)
            if brute_saturated(S):
                union |= S.vertices
    assert prune(C).vertices == union
