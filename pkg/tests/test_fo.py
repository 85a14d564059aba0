# tests/test_fo.py

import networkx as nx
import pytest

from src.modules.fo.games import Winner, analogous, ef_winner, rank_type, similar
from src.modules.fo.parser import And, Atom, Eq, Exists, Forall, Not, parse, to_text
from src.modules.fo.service import evaluate, free_variables, is_edge_sentence, is_sentence, quantifier_rank
from src.modules.structure.service import Hypergraph
from src.modules.vocabulary.presets import preset
from src.utils.errors import (
    ArityError, BudgetExceeded, FormulaSyntaxError, LengthMismatch, UnboundVariable, UnknownRelation, UnknownVertex,
)

TRIANGLE = "exists x. exists y. exists z. (E(x,y) and E(y,z) and E(x,z))"
DOMINATING = "exists x. forall y. (x = y or E(x,y))"


def test_parse_structure():
    phi = parse("exists x. exists y. (E(x,y) and x != y)")
    assert phi == Exists("x", Exists("y", And((Atom("E", ("x", "y")), Not(Eq("x", "y"))))))


def test_aliases_and_printing():
    phi = parse("forall x. (~E(x,x) -> E(x,x) | x = x)")
    assert isinstance(phi, Forall)
    assert parse(to_text(phi)) == phi
    assert to_text(parse("exists x. x != x")) == "exists x. x != x"


def test_syntax_error_position():
    with pytest.raises(FormulaSyntaxError) as err:
        parse("exists x E(x,x)")
    assert err.value.position == 9
    with pytest.raises(FormulaSyntaxError):
        parse("E(x,")
    with pytest.raises(FormulaSyntaxError):
        parse("E(x,y) $ E(y,x)")


def test_vocabulary_checks(graph_vocab):
    with pytest.raises(UnknownRelation):
        parse("exists x. F(x,x)", graph_vocab)
    with pytest.raises(ArityError):
        parse("exists x. E(x,x,x)", graph_vocab)


def test_rank_and_free_variables():
    assert quantifier_rank(parse(TRIANGLE)) == 3
    assert quantifier_rank(parse("exists x. (exists y. E(x,y)) and (forall z. not E(x,z))")) == 2
    assert free_variables(parse("exists x. E(x,y)")) == frozenset({"y"})
    assert is_sentence(parse(DOMINATING))
    assert not is_edge_sentence(parse(DOMINATING))
    assert is_edge_sentence(parse(TRIANGLE))


def test_evaluate_small_structures(path4, triangle_with_tail):
    assert not evaluate(path4, parse(TRIANGLE))
    assert evaluate(triangle_with_tail, parse(TRIANGLE))
    assert evaluate(path4, parse("forall x. exists y. E(x,y)"))
    assert not evaluate(triangle_with_tail, parse("forall x. exists y. E(x,y)"))
    assert evaluate(path4, parse("forall x. forall y. (E(x,y) -> x != y)"))
    assert evaluate(path4, parse("E(x,y)"), {"x": 1, "y": 0})
    assert not evaluate(path4, parse("E(x,y)"), {"x": 0, "y": 2})


def test_evaluate_assignment_errors(path4):
    with pytest.raises(UnboundVariable):
        evaluate(path4, parse("E(x,y)"), {"x": 0})
    with pytest.raises(UnknownVertex):
        evaluate(path4, parse("E(x,y)"), {"x": 0, "y": 17})


def test_loops(loops_vocab):
    H = Hypergraph.from_edges(loops_vocab, [("E", (0, 0)), ("E", (0, 1))])
    assert evaluate(H, parse("exists x. E(x,x)"))
    assert not evaluate(H, parse("exists x. exists y. (E(x,y) and E(y,x) and x != y)"))
    assert evaluate(H, parse("forall x. forall y. (E(x,y) -> E(x,x))"))


@pytest.mark.parametrize("seed", range(6))
def test_evaluate_agrees_with_networkx(seed):
    G = nx.gnm_random_graph(7, 8 + seed, seed=seed)
    H = Hypergraph.from_edges(preset("graph"), [("E", e) for e in G.edges()], vertices=G.nodes())
    assert evaluate(H, parse(DOMINATING)) == any(d == 6 for _, d in G.degree())
    has_triangle = any(t > 0 for t in nx.triangles(G).values())
    assert evaluate(H, parse(TRIANGLE)) == has_triangle
    isolated = "exists x. forall y. not E(x,y)"
    assert evaluate(H, parse(isolated)) == (nx.number_of_isolates(G) > 0)


def cycle(n, offset=0):
    return [(offset + i, offset + (i + 1) % n) for i in range(n)]


def test_ef_game_cycles(make_graph):
    c6 = make_graph(cycle(6))
    two_triangles = make_graph(cycle(3) + cycle(3, offset=3))
    assert ef_winner(c6, (), two_triangles, (), 2) is Winner.DUPLICATOR
    assert ef_winner(c6, (), two_triangles, (), 3) is Winner.SPOILER
    assert rank_type(c6, 2) == rank_type(two_triangles, 2)
    assert rank_type(c6, 3) != rank_type(two_triangles, 3)


def test_ef_game_paths(make_graph):
    p3 = make_graph([(0, 1), (1, 2)])
    p4 = make_graph([(0, 1), (1, 2), (2, 3)])
    assert ef_winner(p3, (), p4, (), 1) is Winner.DUPLICATOR
    assert ef_winner(p3, (), p4, (), 2) is Winner.SPOILER
    # an endpoint against an inner vertex needs two rounds
    assert ef_winner(p3, (0,), p4, (1,), 1) is Winner.DUPLICATOR
    assert ef_winner(p3, (0,), p4, (1,), 2) is Winner.SPOILER
    assert ef_winner(p3, (0,), p4, (0,), 1) is Winner.DUPLICATOR


def test_rank_type_agrees_with_game(make_graph):
    shapes = [
        make_graph([(0, 1), (1, 2)]),
        make_graph([(0, 1), (1, 2), (2, 3)]),
        make_graph([(0, 1), (0, 2), (0, 3)]),
        make_graph([(0, 1), (1, 2), (0, 2)]),
        make_graph([(0, 1)], vertices=[5]),
    ]
    for k in (1, 2):
        for A in shapes:
            for B in shapes:
                same = rank_type(A, k) == rank_type(B, k)
                assert same == (ef_winner(A, (), B, (), k) is Winner.DUPLICATOR)


@pytest.mark.parametrize("distance", [False, True])
@pytest.mark.parametrize("seed", range(5))
def test_duplicator_wins_are_monotone_in_rounds(seed, distance):
    graphs = [nx.gnm_random_graph(6, m, seed=seed + m) for m in (4, 5, 6)]
    structures = [Hypergraph.from_edges(preset("graph"), [("E", e) for e in G.edges()], vertices=G.nodes())
                  for G in graphs]
    for A in structures:
        for B in structures:
            for pinned in [(), (0,)]:
                wins = [ef_winner(A, pinned, B, pinned, k, distance=distance) is Winner.DUPLICATOR
                        for k in (1, 2, 3)]
                assert wins == sorted(wins, reverse=True)


def test_similar_uses_local_balls(make_graph):
    long_path = make_graph([(i, i + 1) for i in range(8)])
    short_path = make_graph([(0, 1), (1, 2), (2, 3), (3, 4)])
    assert similar(long_path, (4,), short_path, (2,), 2, 2)
    assert not similar(long_path, (4,), short_path, (1,), 2, 2)


def test_analogous_counts_up_to_k(make_graph):
    three = make_graph([(0, 1), (2, 3), (4, 5)])
    four = make_graph([(0, 1), (2, 3), (4, 5), (6, 7)])
    parts3 = [{0, 1}, {2, 3}, {4, 5}]
    parts4 = [{0, 1}, {2, 3}, {4, 5}, {6, 7}]
    assert analogous(three, parts3, four, parts4, 3, 1)
    assert not analogous(three, parts3, four, parts4, 4, 1)


def test_game_errors(make_graph):
    p = make_graph([(i, i + 1) for i in range(99)])
    with pytest.raises(BudgetExceeded):
        ef_winner(p, (), p, (), 3)
    with pytest.raises(LengthMismatch):
        ef_winner(p, (0,), p, (), 1)
