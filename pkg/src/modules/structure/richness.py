# src/modules/structure/richness.py

import logging
from typing import Dict, FrozenSet, List, Sequence, Set

import numpy as np

from src.modules.tree_types.service import TreeType, TypeRegistry, type_of

from .service import Hypergraph, RootedTree, saturated_vertices

logger = logging.getLogger(__name__)


def ball_types(H: Hypergraph, k: int, radius: int, candidates: Sequence[int]) -> Dict[int, TreeType]:
    """Type of (N(v; radius), v) for every candidate whose ball induces a tree."""
    found: Dict[int, TreeType] = {}
    for v in candidates:
        ball = H.induced(H.neighborhood([v], radius))
        if ball.excess() == -1:
            found[v] = type_of(RootedTree(ball, v), k)
    return found


def _coverable(targets: FrozenSet[int], reach: Dict[int, FrozenSet[int]], H: Hypergraph, spread: int,
               budget: int) -> bool:
    """Whether `budget` vertices can come within distance `spread` of every target."""
    if not targets:
        return True
    if budget == 0:
        return False
    anchor = min(targets)
    for center in sorted(H.neighborhood([anchor], spread)):
        if center not in reach:
            reach[center] = H.neighborhood([center], spread)
        if _coverable(targets - reach[center], reach, H, spread, budget - 1):
            return True
    return False


def is_rich(H: Hypergraph, k: int, r: int, registry: TypeRegistry) -> bool:
    registry.require(r)
    if not H.order:
        return False
    X = saturated_vertices(H, r)
    for r_prime in range(r + 1):
        spread = 2 * r_prime + 1
        d_x = H.distances_from(sorted(X)) if X else np.full(H.order, np.inf)
        far = H.vertex_array[d_x > spread].tolist()
        witnesses: Dict[TreeType, Set[int]] = {}
        for v, t in ball_types(H, k, r_prime, far).items():
            witnesses.setdefault(t, set()).add(v)
        reach: Dict[int, FrozenSet[int]] = {}
        for t in registry.types(r_prime):
            targets = frozenset(witnesses.get(t, ()))
            if not targets or _coverable(targets, reach, H, spread, k):
                logger.debug(f"is_rich: type #{registry.id_of(t)} at radius {r_prime} is blocked "
                             f"({len(targets)} witnesses)")
                return False
    return True


def witness_counts(H: Hypergraph, k: int, r: int, registry: TypeRegistry) -> List[Dict[str, int]]:
    """Per radius and type: number of far-away tree witnesses. Diagnostic companion of is_rich."""
    registry.require(r)
    X = saturated_vertices(H, r)
    rows = []
    for r_prime in range(r + 1):
        spread = 2 * r_prime + 1
        d_x = H.distances_from(sorted(X)) if X else np.full(H.order, np.inf)
        far = H.vertex_array[d_x > spread].tolist()
        counts: Dict[TreeType, int] = {}
        for t in ball_types(H, k, r_prime, far).values():
            counts[t] = counts.get(t, 0) + 1
        for t in registry.types(r_prime):
            rows.append({"radius": r_prime, "type": registry.id_of(t), "witnesses": counts.get(t, 0)})
    return rows
