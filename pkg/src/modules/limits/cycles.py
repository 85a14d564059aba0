# src/modules/limits/cycles.py

import itertools
import logging
from collections import Counter
from dataclasses import dataclass
from functools import cached_property
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

from src import config
from src.modules.structure.service import Hypergraph, HypergraphBuilder, hanging_tree, is_saturated, prune
from src.modules.tree_types.service import TreeType, TypeRegistry, type_of
from src.modules.vocabulary.service import Relation, Vocabulary, canonical_edge, inverse
from src.utils.errors import CapExceeded, NotSimple

logger = logging.getLogger(__name__)

# (relation, position of the incoming cycle vertex, position of the outgoing one)
Descriptor = Tuple[str, int, int]
CycleKey = tuple


def default_edge_cap(r: int) -> int:
    return 4 * r + 4


def _descriptor_orbit_min(relation: Relation, p: int, q: int) -> Descriptor:
    best = None
    for g in relation.group.elements:
        inv = inverse(g)
        pair = (inv[p], inv[q])
        if best is None or pair < best:
            best = pair
    return relation.name, best[0], best[1]


def descriptors(vocab: Vocabulary) -> List[Descriptor]:
    found = set()
    for rel in vocab.relations:
        for p, q in itertools.permutations(range(rel.arity), 2):
            found.add(_descriptor_orbit_min(rel, p, q))
    return sorted(found)


def _reverse(vocab: Vocabulary, d: Descriptor) -> Descriptor:
    return _descriptor_orbit_min(vocab.relation(d[0]), d[2], d[1])


def _chain(cycle: Hypergraph) -> Tuple[List[int], List[Tuple[str, Tuple[int, ...]]]]:
    """Cycle vertices c_0..c_{L-1} and edges e_0..e_{L-1} with e_i joining c_i and c_{i+1}."""
    edges = list(cycle.edges())
    if len(edges) == 1:
        name, t = edges[0]
        repeated = [v for v, c in Counter(t).items() if c > 1]
        return repeated[:1], edges
    incident: Dict[int, List[int]] = {}
    for i, (_, t) in enumerate(edges):
        for v in set(t):
            incident.setdefault(v, []).append(i)
    cycle_vertices = sorted(v for v, es in incident.items() if len(es) == 2)
    start = cycle_vertices[0]
    order, chain_edges = [start], []
    current, used = start, set()
    for _ in range(len(edges)):
        nxt_edge = next(i for i in incident[current] if i not in used)
        used.add(nxt_edge)
        chain_edges.append(edges[nxt_edge])
        others = [v for v in set(edges[nxt_edge][1]) if v != current and len(incident[v]) == 2]
        if len(edges) == 2:
            others = [v for v in cycle_vertices if v != current]
        current = others[0]
        if current != start:
            order.append(current)
    return order, chain_edges


def cycle_code(cycle: Hypergraph, colors: Mapping[int, int]) -> Tuple[CycleKey, int]:
    """Isomorphism-invariant key of a colored cycle and the size of its automorphism group.

    Cycle vertices are labelled 0..L-1 along a traversal; the private vertices of each
    edge take the next labels, ordered to minimize that edge's block."""
    order, chain_edges = _chain(cycle)
    L = len(chain_edges)
    vocab = cycle.vocabulary
    traversals = []
    if L == 1:
        traversals.append((order, chain_edges))
    else:
        for s in range(L):
            forward_v = [order[(s + i) % L] for i in range(L)]
            forward_e = [chain_edges[(s + i) % L] for i in range(L)]
            backward_v = [order[(s - i) % L] for i in range(L)]
            backward_e = [chain_edges[(s - 1 - i) % L] for i in range(L)]
            traversals.append((forward_v, forward_e))
            traversals.append((backward_v, backward_e))
    best_code, best_aut = None, 0
    for verts, edges in traversals:
        labels = {v: i for i, v in enumerate(verts)}
        head = tuple(colors[v] for v in verts)
        blocks, multiplicity = [], 1
        next_label = len(verts)
        for name, t in edges:
            relation = vocab.relation(name)
            private = sorted(set(t) - set(verts))
            best_block, ties = None, 0
            for perm in itertools.permutations(private):
                local = dict(labels)
                local.update({v: next_label + i for i, v in enumerate(perm)})
                block = (name, canonical_edge(relation, tuple(local[v] for v in t)),
                         tuple(colors[v] for v in perm))
                if best_block is None or block < best_block:
                    best_block, ties = block, 1
                elif block == best_block:
                    ties += 1
            blocks.append(best_block)
            multiplicity *= ties
            next_label += len(private)
        code = (L, head, tuple(blocks))
        if best_code is None or code < best_code:
            best_code, best_aut = code, multiplicity
        elif code == best_code:
            best_aut += multiplicity
    return best_code, best_aut


def cycle_from_code(vocab: Vocabulary, key: CycleKey) -> Tuple[Hypergraph, Dict[int, int]]:
    """Rebuilds the labelled cycle (vertices 0..m-1) and its coloring from a key."""
    L, head, blocks = key
    builder = HypergraphBuilder(vocab)
    colors: Dict[int, int] = {i: c for i, c in enumerate(head)}
    next_label = len(head)
    for name, t, private_colors in blocks:
        for c in private_colors:
            colors[next_label] = c
            next_label += 1
        builder.add_edge(name, t)
    for v in colors:
        builder.add_vertex(v)
    return builder.freeze(), colors


@dataclass(frozen=True)
class CycleShape:
    key: CycleKey
    hypergraph: Hypergraph
    aut: int

    @property
    def length(self) -> int:
        return self.key[0]

    @cached_property
    def edge_counts(self) -> Tuple[Tuple[str, int], ...]:
        counts = Counter(name for name, _ in self.hypergraph.edges())
        return tuple(sorted(counts.items()))


@dataclass(frozen=True)
class CycleClass:
    """A (k,r)-cycle: a colored cycle up to isomorphism. Colors are registry type ids."""

    key: CycleKey
    shape: CycleShape
    colors: Tuple[int, ...]
    aut: int

    @property
    def label(self) -> str:
        return f"L{self.shape.length}:{'-'.join(map(str, self.colors))}"


def _build_chain(vocab: Vocabulary, sequence: Sequence[Descriptor]) -> Optional[Hypergraph]:
    L = len(sequence)
    builder = HypergraphBuilder(vocab)
    for i in range(L):
        builder.add_vertex(i)
    next_vertex = L
    for i, (name, p, q) in enumerate(sequence):
        arity = vocab.relation(name).arity
        values = [None] * arity
        values[p], values[q] = i, (i + 1) % L
        for pos in range(arity):
            if values[pos] is None:
                values[pos] = next_vertex
                next_vertex += 1
        canon = canonical_edge(vocab.relation(name), values)
        if canon is None:
            return None
        builder.add_edge(name, canon)
    H = builder.freeze()
    if H.num_edges != L or H.excess() != 0 or not is_saturated(H):
        return None
    return H


def _loop_shapes(vocab: Vocabulary) -> List[Hypergraph]:
    shapes = []
    for rel in vocab.relations:
        for pattern in rel.patterns:
            if pattern.distinct == rel.arity - 1:
                builder = HypergraphBuilder(vocab)
                builder.add_edge(rel.name, pattern.representative)
                shapes.append(builder.freeze())
    return shapes


def enumerate_shapes(vocab: Vocabulary, r: int, edge_cap: Optional[int] = None) -> List[CycleShape]:
    """All cycles of diameter ≤ 2r+1 with at most edge_cap edges, up to isomorphism."""
    edge_cap = default_edge_cap(r) if edge_cap is None else edge_cap
    max_diameter = 2 * r + 1
    found: Dict[CycleKey, CycleShape] = {}

    def consider(H: Hypergraph) -> None:
        if H.diameter() > max_diameter:
            return
        key, aut = cycle_code(H, {v: 0 for v in H.vertices})
        if key not in found:
            canonical, _ = cycle_from_code(vocab, key)
            found[key] = CycleShape(key, canonical, aut)

    if edge_cap >= 1:
        for H in _loop_shapes(vocab):
            consider(H)
    alphabet = descriptors(vocab)
    for L in range(2, edge_cap + 1):
        if len(alphabet) ** L > 20 * config.CYCLE_CLASS_CAP:
            raise CapExceeded(f"Cycle shapes with {L} edges: {len(alphabet)}^{L} descriptor chains exceed the cap",
                              details={"edges": L, "descriptors": len(alphabet)})
        seen_before = len(found)
        for sequence in itertools.product(alphabet, repeat=L):
            if not _is_minimal_chain(vocab, sequence):
                continue
            H = _build_chain(vocab, sequence)
            if H is not None:
                consider(H)
        logger.debug(f"enumerate_shapes: L={L} added {len(found) - seen_before} shapes")
    shapes = sorted(found.values(), key=lambda s: s.key)
    logger.info(f"Cycle shapes (r={r}, edge cap {edge_cap}): {len(shapes)}")
    return shapes


def _is_minimal_chain(vocab: Vocabulary, sequence: Sequence[Descriptor]) -> bool:
    seq = tuple(sequence)
    reversed_seq = tuple(_reverse(vocab, d) for d in reversed(seq))
    L = len(seq)
    for i in range(L):
        if seq[i:] + seq[:i] < seq or reversed_seq[i:] + reversed_seq[:i] < seq:
            return False
    return True


def enumerate_cycles(vocab: Vocabulary, k: int, r: int, registry: TypeRegistry,
                     edge_cap: Optional[int] = None, cap: Optional[int] = None) -> List[CycleClass]:
    """C(k, r): every shape colored by the types of radius ≤ r, up to colored isomorphism."""
    cap = config.CYCLE_CLASS_CAP if cap is None else cap
    palette = [registry.id_of(t) for t in registry.types(r)]
    classes: Dict[CycleKey, CycleClass] = {}
    for shape in enumerate_shapes(vocab, r, edge_cap):
        vertices = sorted(shape.hypergraph.vertices)
        total = len(palette) ** len(vertices)
        if total > 20 * cap:
            raise CapExceeded(f"Colorings of a {len(vertices)}-vertex cycle with {len(palette)} types: {total}",
                              details={"vertices": len(vertices), "types": len(palette)})
        for coloring in itertools.product(palette, repeat=len(vertices)):
            colors = dict(zip(vertices, coloring))
            key, aut = cycle_code(shape.hypergraph, colors)
            if key not in classes:
                classes[key] = CycleClass(key, shape, tuple(key[1]) + tuple(c for b in key[2] for c in b[2]), aut)
                if len(classes) > cap:
                    raise CapExceeded(f"More than {cap} (k,r)-cycles for k={k}, r={r}",
                                      details={"cap": cap})
    result = sorted(classes.values(), key=lambda c: c.key)
    logger.info(f"(k,r)-cycles for k={k}, r={r}: {len(result)} classes over {len(palette)} types")
    return result


def type_colors(cycle_component: Hypergraph, center_part: Hypergraph, k: int,
                registry: TypeRegistry) -> Dict[int, int]:
    """Canonical k-coloring of the cycle: each cycle vertex gets the type of its hanging tree."""
    return {v: registry.id_of(type_of(hanging_tree(cycle_component, (), v), k))
            for v in sorted(center_part.vertices)}


def classify_cycle_component(component: Hypergraph, k: int, registry: TypeRegistry) -> CycleKey:
    if component.excess() != 0:
        raise NotSimple(f"Core component with excess {component.excess()} is not a unicycle")
    center_part = prune(component)
    colors = type_colors(component, center_part, k, registry)
    key, _ = cycle_code(center_part, colors)
    return key


def tree_type_of_colors(registry: TypeRegistry, colors: Sequence[int]) -> List[TreeType]:
    return [registry.type_by_id(c) for c in colors]


def shape_of_component(component: Hypergraph) -> CycleKey:
    center_part = prune(component)
    key, _ = cycle_code(center_part, {v: 0 for v in center_part.vertices})
    return key
