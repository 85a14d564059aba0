# src/modules/fo/games.py

import itertools
import logging
from enum import Enum
from typing import Dict, Hashable, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.sparse.csgraph import shortest_path

from src import config
from src.modules.structure.service import Hypergraph
from src.modules.vocabulary.service import canonical_edge
from src.utils.errors import BudgetExceeded, LengthMismatch

logger = logging.getLogger(__name__)


class Winner(str, Enum):
    DUPLICATOR = "Duplicator"
    SPOILER = "Spoiler"


class _Board:
    """One side of the game: vertex list, incidence and, for the distance variant, all-pairs distances."""

    def __init__(self, H: Hypergraph, with_distances: bool):
        self.H = H
        self.vertices: Tuple[int, ...] = tuple(H.vertex_array.tolist())
        self.incidence = H.incidence
        self.distances: Optional[Dict[Tuple[int, int], float]] = None
        if with_distances:
            self._matrix = (shortest_path(H.adjacency, directed=False, unweighted=True)
                            if H.order else np.zeros((0, 0)))
            self._index = {v: i for i, v in enumerate(self.vertices)}

    def distance(self, u: int, v: int) -> float:
        return float(self._matrix[self._index[u], self._index[v]])


class EFGame:
    """Exact k-round Ehrenfeucht-Fraïssé game by memoized minimax over positions."""

    def __init__(self, H1: Hypergraph, H2: Hypergraph, distance: bool = False):
        self.left = _Board(H1, distance)
        self.right = _Board(H2, distance)
        self.distance = distance
        self._memo: Dict[Tuple[Tuple[int, ...], Tuple[int, ...], int], bool] = {}
        self.positions = 0

    def _edges_agree(self, src: _Board, dst: _Board, a: Sequence[int], b: Sequence[int], m: int) -> bool:
        mapping = dict(zip(a, b))
        for name, t in src.incidence[a[m]]:
            if all(v in mapping for v in t):
                image = canonical_edge(dst.H.vocabulary.relation(name), tuple(mapping[v] for v in t))
                if image is None or image not in dst.H.edge_sets[name]:
                    return False
        return True

    def extends(self, a: Sequence[int], b: Sequence[int], m: int) -> bool:
        """Whether pebble pair m keeps a ↦ b a partial isomorphism, given pairs < m already do."""
        for i in range(m):
            if (a[i] == a[m]) != (b[i] == b[m]):
                return False
            if self.distance and self.left.distance(a[i], a[m]) != self.right.distance(b[i], b[m]):
                return False
        if a[m] in a[:m]:
            return True
        return (self._edges_agree(self.left, self.right, a[:m + 1], b[:m + 1], m)
                and self._edges_agree(self.right, self.left, b[:m + 1], a[:m + 1], m))

    def is_partial_isomorphism(self, a: Sequence[int], b: Sequence[int]) -> bool:
        return all(self.extends(a, b, m) for m in range(len(a)))

    def duplicator_wins(self, a: Tuple[int, ...], b: Tuple[int, ...], rounds: int) -> bool:
        if rounds == 0:
            return True
        key = (a, b, rounds)
        if key in self._memo:
            return self._memo[key]
        self.positions += 1
        m = len(a)
        result = True
        for spoiler_side in (0, 1):
            mine, theirs = (self.left, self.right) if spoiler_side == 0 else (self.right, self.left)
            for x in mine.vertices:
                answered = False
                for y in theirs.vertices:
                    na, nb = (a + (x,), b + (y,)) if spoiler_side == 0 else (a + (y,), b + (x,))
                    if self.extends(na, nb, m) and self.duplicator_wins(na, nb, rounds - 1):
                        answered = True
                        break
                if not answered:
                    result = False
                    break
            if not result:
                break
        self._memo[key] = result
        return result


def ef_winner(H1: Hypergraph, v: Sequence[int], H2: Hypergraph, u: Sequence[int], k: int,
              distance: bool = False) -> Winner:
    if len(v) != len(u):
        raise LengthMismatch(f"Pinned tuples differ in length: {len(v)} vs {len(u)}")
    positions = (H1.order ** k) * (H2.order ** k)
    if positions > config.EF_POSITION_BUDGET:
        raise BudgetExceeded(f"EF game with {positions} positions exceeds EF_POSITION_BUDGET={config.EF_POSITION_BUDGET}")
    game = EFGame(H1, H2, distance)
    a, b = tuple(v), tuple(u)
    if not game.is_partial_isomorphism(a, b):
        return Winner.SPOILER
    wins = game.duplicator_wins(a, b, k)
    logger.debug(f"ef_winner(k={k}, distance={distance}): {'Duplicator' if wins else 'Spoiler'} "
                 f"after {game.positions} positions")
    return Winner.DUPLICATOR if wins else Winner.SPOILER


def similar(H1: Hypergraph, v: Sequence[int], H2: Hypergraph, u: Sequence[int], k: int, r: int) -> bool:
    """(H1, v) ≃_{k,r} (H2, u): Duplicator wins the distance game on the induced r-neighborhoods."""
    ball1 = H1.induced(H1.neighborhood(v, r)) if len(v) else Hypergraph.empty(H1.vocabulary)
    ball2 = H2.induced(H2.neighborhood(u, r)) if len(u) else Hypergraph.empty(H2.vocabulary)
    return ef_winner(ball1, v, ball2, u, k, distance=True) is Winner.DUPLICATOR


def similar_sets(H1: Hypergraph, X: Iterable[int], H2: Hypergraph, Y: Iterable[int], k: int, r: int) -> bool:
    xs, ys = sorted(X), sorted(Y)
    if len(xs) != len(ys):
        return False
    return any(similar(H1, xs, H2, list(order), k, r) for order in itertools.permutations(ys))


def analogous(H1: Hypergraph, parts1: Sequence[Iterable[int]], H2: Hypergraph, parts2: Sequence[Iterable[int]],
              k: int, r: int) -> bool:
    """(H1, ∪parts1) ≅_{k,r} (H2, ∪parts2) by the counting rule over the two partitions."""
    left: List[Tuple[Hypergraph, Tuple[int, ...]]] = [(H1, tuple(sorted(p))) for p in parts1]
    right: List[Tuple[Hypergraph, Tuple[int, ...]]] = [(H2, tuple(sorted(p))) for p in parts2]
    for H, Z in left + right:
        count1 = sum(1 for _, X in left if similar_sets(H, Z, H1, X, k, r))
        count2 = sum(1 for _, Y in right if similar_sets(H, Z, H2, Y, k, r))
        if count1 != count2 and min(count1, count2) < k:
            return False
    return True


def rank_type(H: Hypergraph, k: int, pinned: Sequence[int] = ()) -> Hashable:
    """Rank-k type of (H, pinned): equal values iff Duplicator wins the k-round game.

    Built bottom-up from atomic types of tuples; costs O(|V|^k) tuples."""
    vertices = H.vertex_array.tolist()
    incidence = H.incidence
    vocab = H.vocabulary
    memo: Dict[Tuple[Tuple[int, ...], int], Hashable] = {}

    def atomic(a: Tuple[int, ...]) -> Hashable:
        first: Dict[int, int] = {}
        for i, v in enumerate(a):
            first.setdefault(v, i)
        edges = set()
        for v in first:
            for name, t in incidence.get(v, ()):
                if all(u in first for u in t):
                    edges.add((name, canonical_edge(vocab.relation(name), tuple(first[u] for u in t))))
        return tuple(first[v] for v in a), frozenset(edges)

    def rec(a: Tuple[int, ...], m: int) -> Hashable:
        key = (a, m)
        if key not in memo:
            base = atomic(a)
            memo[key] = base if m == 0 else (base, frozenset(rec(a + (b,), m - 1) for b in vertices))
        return memo[key]

    return rec(tuple(pinned), k)
