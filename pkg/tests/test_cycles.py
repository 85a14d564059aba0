# tests/test_cycles.py

import pytest

from src.modules.limits.cycles import (
    classify_cycle_component, cycle_code, cycle_from_code, descriptors, enumerate_cycles, enumerate_shapes,
    shape_of_component,
)
from src.modules.limits.expressions import eval_expr
from src.modules.limits.service import ProbabilityTable, cycle_mass_check
from src.modules.tree_types.service import enumerate_types
from src.modules.vocabulary.presets import preset
from src.utils.errors import CapExceeded, NotSimple


def test_graph_descriptors_collapse_under_symmetry():
    assert descriptors(preset("graph")) == [("E", 0, 1)]
    assert descriptors(preset("digraph")) == [("E", 0, 1), ("E", 1, 0)]


@pytest.mark.parametrize("name, r, edge_cap, expected", [
    ("graph", 0, None, 1),          # triangle
    ("graph", 1, None, 5),          # C3..C7
    ("graph", 1, 4, 2),
    ("digraph", 0, None, 3),        # digon and the two triangle orientations
    ("digraph-loops", 0, None, 4),  # plus the loop
])
def test_shape_counts(name, r, edge_cap, expected):
    assert len(enumerate_shapes(preset(name), r, edge_cap)) == expected


def test_shape_lengths_and_automorphisms():
    shapes = enumerate_shapes(preset("graph"), 1)
    assert [s.length for s in shapes] == [3, 4, 5, 6, 7]
    assert [s.aut for s in shapes] == [6, 8, 10, 12, 14]
    loops = enumerate_shapes(preset("digraph-loops"), 0)
    assert sorted(s.length for s in loops) == [1, 2, 3, 3]


def test_cycle_code_is_isomorphism_invariant(make_graph):
    a = make_graph([(0, 1), (1, 2), (2, 3), (3, 0)])
    b = make_graph([(10, 30), (30, 20), (20, 40), (40, 10)])
    assert cycle_code(a, {v: 0 for v in a.vertices})[0] == cycle_code(b, {v: 0 for v in b.vertices})[0]
    colored_a = cycle_code(a, {0: 1, 1: 0, 2: 0, 3: 0})
    colored_b = cycle_code(b, {10: 0, 30: 0, 20: 1, 40: 0})
    assert colored_a == colored_b
    # one marked vertex leaves only the reflection through it
    assert colored_a[1] == 2


def test_cycle_from_code_rebuilds_shape():
    for shape in enumerate_shapes(preset("cnf2"), 0):
        H, colors = cycle_from_code(preset("cnf2"), shape.key)
        assert H.excess() == 0
        assert cycle_code(H, colors)[0] == shape.key


def test_colored_classes_and_mass():
    vocab = preset("graph")
    registry = enumerate_types(vocab, 1, 1)
    cycles = enumerate_cycles(vocab, 1, 1, registry, edge_cap=4)
    # two colors on C3 give 4 classes, on C4 give 6
    assert len(cycles) == 10
    table = ProbabilityTable(registry)
    beta = 1.4
    masses = cycle_mass_check(table, 1, cycles)
    by_length = {key[0]: eval_expr(expr, {"E": beta}) for key, expr in masses.items()}
    assert by_length[3] == pytest.approx(beta ** 3 / 6)
    assert by_length[4] == pytest.approx(beta ** 4 / 8)


def test_classify_cycle_component(make_graph):
    vocab = preset("graph")
    registry = enumerate_types(vocab, 1, 1)
    cycles = enumerate_cycles(vocab, 1, 1, registry, edge_cap=4)
    keys = {c.key for c in cycles}
    square_with_tail = make_graph([(0, 1), (1, 2), (2, 3), (3, 0), (3, 4)])
    assert classify_cycle_component(square_with_tail, 1, registry) in keys
    assert shape_of_component(square_with_tail)[0] == 4
    with pytest.raises(NotSimple):
        classify_cycle_component(make_graph([(0, 1), (1, 2), (2, 0), (0, 3), (3, 2)]), 1, registry)


def test_coloring_cap():
    vocab = preset("graph")
    registry = enumerate_types(vocab, 2, 2)
    with pytest.raises(CapExceeded):
        enumerate_cycles(vocab, 2, 2, registry, edge_cap=6, cap=50)


def test_graph_cycles_need_three_edges():
    assert enumerate_shapes(preset("graph"), 0, edge_cap=2) == []
