# src/modules/structure/service.py

import itertools
import logging
from dataclasses import dataclass
from enum import Enum
from functools import cached_property
from typing import Dict, FrozenSet, Iterable, Iterator, List, Mapping, Optional, Sequence, Set, Tuple

import numpy as np
from scipy.sparse import coo_matrix, csr_matrix
from scipy.sparse.csgraph import connected_components, dijkstra, shortest_path

from src import config
from src.modules.vocabulary.service import Vocabulary, canonical_edge
from src.utils.errors import (
    ExcludedEdge, NotATree, NotConnected, TooLargeForSaturation, UnknownVertex, Unreachable,
)

logger = logging.getLogger(__name__)

Edge = Tuple[str, Tuple[int, ...]]
INF = float("inf")


class Hypergraph:
    """Immutable σ-structure. Edges are stored per relation as an (m, arity) int64 array of
    canonical tuples, rows sorted and unique; vertex ids are arbitrary integers."""

    def __init__(self, vocabulary: Vocabulary, vertices: Iterable[int],
                 edges: Optional[Mapping[str, np.ndarray]] = None, *, check: bool = True):
        self.vocabulary = vocabulary
        self._vertices = np.unique(np.asarray(list(vertices) if not isinstance(vertices, np.ndarray) else vertices,
                                              dtype=np.int64))
        self._vertices.setflags(write=False)
        edges = edges or {}
        unknown = set(edges) - set(vocabulary.names)
        if unknown:
            raise ExcludedEdge(f"Edges given for relations {sorted(unknown)} outside vocabulary '{vocabulary.name}'")
        self._edges: Dict[str, np.ndarray] = {}
        for rel in vocabulary.relations:
            arr = np.asarray(edges.get(rel.name, np.empty((0, rel.arity))), dtype=np.int64).reshape(-1, rel.arity)
            if len(arr):
                arr = np.unique(arr, axis=0)
            arr.setflags(write=False)
            self._edges[rel.name] = arr
        if check:
            self._check()

    def _check(self) -> None:
        for rel in self.vocabulary.relations:
            arr = self._edges[rel.name]
            if not len(arr):
                continue
            if not np.isin(arr, self._vertices).all():
                raise UnknownVertex(f"Relation {rel.name} has edges on vertices outside the vertex set")
            for row in map(tuple, arr.tolist()):
                if canonical_edge(rel, row) != row:
                    raise ExcludedEdge(f"{rel.name}{row} is not a canonical, admissible edge")

    # --- basic access ---
    @classmethod
    def from_edges(cls, vocabulary: Vocabulary, edges: Iterable[Edge],
                   vertices: Optional[Iterable[int]] = None) -> "Hypergraph":
        builder = HypergraphBuilder(vocabulary)
        for v in vertices or ():
            builder.add_vertex(v)
        for name, t in edges:
            builder.add_edge(name, t)
        return builder.freeze()

    @classmethod
    def empty(cls, vocabulary: Vocabulary) -> "Hypergraph":
        return cls(vocabulary, [], {}, check=False)

    @property
    def vertex_array(self) -> np.ndarray:
        return self._vertices

    @cached_property
    def vertices(self) -> FrozenSet[int]:
        return frozenset(self._vertices.tolist())

    @property
    def order(self) -> int:
        return int(self._vertices.size)

    def edge_array(self, name: str) -> np.ndarray:
        return self._edges[name]

    def edges(self) -> Iterator[Edge]:
        for rel in self.vocabulary.relations:
            for row in self._edges[rel.name].tolist():
                yield rel.name, tuple(row)

    @property
    def num_edges(self) -> int:
        return sum(len(a) for a in self._edges.values())

    @cached_property
    def edge_sets(self) -> Dict[str, FrozenSet[Tuple[int, ...]]]:
        return {name: frozenset(map(tuple, arr.tolist())) for name, arr in self._edges.items()}

    def has_edge(self, name: str, t: Sequence[int]) -> bool:
        canon = canonical_edge(self.vocabulary.relation(name), t)
        return canon is not None and canon in self.edge_sets[name]

    def __contains__(self, v: int) -> bool:
        i = np.searchsorted(self._vertices, v)
        return bool(i < self._vertices.size and self._vertices[i] == v)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Hypergraph):
            return NotImplemented
        return (self.vocabulary.name == other.vocabulary.name
                and np.array_equal(self._vertices, other._vertices)
                and all(np.array_equal(self._edges[n], other._edges[n]) for n in self.vocabulary.names))

    __hash__ = None

    def __repr__(self) -> str:
        return f"<Hypergraph({self.vocabulary.name}, |V|={self.order}, |E|={self.num_edges}, ex={self.excess()})>"

    # --- index helpers ---
    def index_of(self, values) -> np.ndarray:
        values = np.asarray(values, dtype=np.int64)
        idx = np.searchsorted(self._vertices, values)
        bad = (idx >= self._vertices.size) | (self._vertices[np.minimum(idx, max(self._vertices.size - 1, 0))] != values) \
            if self._vertices.size else np.ones(values.shape, dtype=bool)
        if np.any(bad):
            missing = values[bad].tolist()
            raise UnknownVertex(f"Vertices {missing[:5]} are not in the structure")
        return idx

    @cached_property
    def _index_edges(self) -> Dict[str, np.ndarray]:
        return {name: (np.searchsorted(self._vertices, arr) if len(arr) else arr) for name, arr in self._edges.items()}

    @cached_property
    def adjacency(self) -> csr_matrix:
        """Gaifman graph on vertex indices."""
        rows, cols = [], []
        for name, arr in self._index_edges.items():
            if not len(arr):
                continue
            for i, j in itertools.combinations(range(arr.shape[1]), 2):
                keep = arr[:, i] != arr[:, j]
                rows.append(arr[keep, i])
                cols.append(arr[keep, j])
        n = self.order
        if rows:
            r = np.concatenate(rows + cols)
            c = np.concatenate(cols + rows)
        else:
            r = c = np.empty(0, dtype=np.int64)
        return coo_matrix((np.ones(r.size, dtype=np.int8), (r, c)), shape=(n, n)).tocsr()

    @cached_property
    def incidence(self) -> Dict[int, Tuple[Edge, ...]]:
        table: Dict[int, List[Edge]] = {v: [] for v in self.vertices}
        for name, t in self.edges():
            for v in set(t):
                table[v].append((name, t))
        return {v: tuple(es) for v, es in table.items()}

    def degree(self, v: int) -> int:
        if v not in self:
            raise UnknownVertex(f"Vertex {v} is not in the structure")
        return len(self.incidence[v])

    def root_degree(self, v: int) -> int:
        """Number of edges containing v, computed without building the incidence table."""
        self.index_of([v])
        return int(sum(np.any(arr == v, axis=1).sum() for arr in self._edges.values() if len(arr)))

    # --- measures ---
    def excess(self) -> int:
        return sum((self.vocabulary.relation(n).arity - 1) * len(a) for n, a in self._edges.items()) - self.order

    def distances_from(self, sources: Iterable[int], limit: Optional[float] = None) -> np.ndarray:
        """Distance from the source set to every vertex, indexed like vertex_array."""
        sources = list(sources)
        if not sources or not self.order:
            return np.full(self.order, np.inf)
        idx = self.index_of(sources)
        return dijkstra(self.adjacency, directed=False, indices=idx, unweighted=True,
                        limit=np.inf if limit is None else limit, min_only=True)

    def distance(self, u: int, v: int) -> float:
        d = self.distances_from([u])
        return float(d[self.index_of([v])[0]])

    def neighborhood(self, sources: Iterable[int], r: int) -> FrozenSet[int]:
        d = self.distances_from(sources, limit=r)
        return frozenset(self._vertices[d <= r].tolist())

    def diameter(self) -> float:
        if self.order <= 1:
            return 0.0
        d = shortest_path(self.adjacency, directed=False, unweighted=True)
        return float(d.max())

    # --- sub-structures ---
    def _restrict(self, keep_vertices: np.ndarray, masks: Mapping[str, np.ndarray]) -> "Hypergraph":
        return Hypergraph(self.vocabulary, keep_vertices,
                          {name: self._edges[name][mask] for name, mask in masks.items()}, check=False)

    def induced(self, vertices: Iterable[int]) -> "Hypergraph":
        keep = np.asarray(sorted(set(vertices)), dtype=np.int64)
        if keep.size:
            self.index_of(keep)
        masks = {name: (np.isin(arr, keep).all(axis=1) if len(arr) else np.zeros(0, dtype=bool))
                 for name, arr in self._edges.items()}
        return self._restrict(keep, masks)

    def edge_subgraph(self, edges: Iterable[Edge], extra_vertices: Iterable[int] = ()) -> "Hypergraph":
        grouped: Dict[str, List[Tuple[int, ...]]] = {}
        verts = set(extra_vertices)
        for name, t in edges:
            grouped.setdefault(name, []).append(t)
            verts.update(t)
        return Hypergraph(self.vocabulary, sorted(verts),
                          {n: np.asarray(ts, dtype=np.int64) for n, ts in grouped.items()}, check=False)

    @cached_property
    def _component_labels(self) -> Tuple[int, np.ndarray]:
        if not self.order:
            return 0, np.empty(0, dtype=np.int64)
        count, labels = connected_components(self.adjacency, directed=False)
        return count, labels

    def components(self) -> List["Hypergraph"]:
        count, labels = self._component_labels
        if count == 1:
            return [self]
        parts = []
        edge_labels = {name: labels[arr[:, 0]] if len(arr) else np.empty(0, dtype=np.int64)
                       for name, arr in self._index_edges.items()}
        order = np.argsort(labels, kind="stable")
        bounds = np.searchsorted(labels[order], np.arange(count + 1))
        for c in range(count):
            verts = self._vertices[order[bounds[c]:bounds[c + 1]]]
            parts.append(self._restrict(verts, {n: lab == c for n, lab in edge_labels.items()}))
        return parts

    def component_of(self, v: int) -> "Hypergraph":
        count, labels = self._component_labels
        c = labels[self.index_of([v])[0]]
        verts = self._vertices[labels == c]
        return self._restrict(verts, {n: (labels[arr[:, 0]] == c) if len(arr) else np.zeros(0, dtype=bool)
                                      for n, arr in self._index_edges.items()})

    def is_connected(self) -> bool:
        return self.order > 0 and self._component_labels[0] == 1


class HypergraphBuilder:
    """Mutable staging area; `freeze` produces the immutable Hypergraph."""

    def __init__(self, vocabulary: Vocabulary):
        self.vocabulary = vocabulary
        self._vertices: Set[int] = set()
        self._edges: Dict[str, Set[Tuple[int, ...]]] = {name: set() for name in vocabulary.names}
        self._next = 0

    def add_vertex(self, v: Optional[int] = None) -> int:
        if v is None:
            v = self._next
        self._vertices.add(v)
        self._next = max(self._next, v + 1)
        return v

    def add_edge(self, name: str, t: Sequence[int]) -> Tuple[int, ...]:
        canon = canonical_edge(self.vocabulary.relation(name), t)
        if canon is None:
            raise ExcludedEdge(f"{name}{tuple(t)} repeats a vertex at an anti-reflexive position pair")
        for v in canon:
            self.add_vertex(v)
        self._edges[name].add(canon)
        return canon

    def add_structure(self, H: Hypergraph) -> Dict[int, int]:
        """Copies H onto fresh vertex ids; returns the relabelling."""
        mapping = {v: self.add_vertex(self._next) for v in sorted(H.vertices)}
        for name, t in H.edges():
            self.add_edge(name, tuple(mapping[v] for v in t))
        return mapping

    def freeze(self) -> Hypergraph:
        return Hypergraph(self.vocabulary, sorted(self._vertices),
                          {n: np.asarray(sorted(ts), dtype=np.int64) for n, ts in self._edges.items() if ts},
                          check=False)


def disjoint_union(vocabulary: Vocabulary, parts: Sequence[Hypergraph]) -> Tuple[Hypergraph, List[Dict[int, int]]]:
    builder = HypergraphBuilder(vocabulary)
    mappings = [builder.add_structure(H) for H in parts]
    return builder.freeze(), mappings


# --- operations ---
def excess(H: Hypergraph) -> int:
    return H.excess()


def distance(H: Hypergraph, u: int, v: int) -> float:
    return H.distance(u, v)


def neighborhood(H: Hypergraph, X: Iterable[int], r: int) -> FrozenSet[int]:
    return H.neighborhood(X, r)


def induced(H: Hypergraph, U: Iterable[int]) -> Hypergraph:
    return H.induced(U)


@dataclass(frozen=True)
class RootedTree:
    tree: Hypergraph
    root: int

    def __post_init__(self):
        if self.root not in self.tree:
            raise NotATree(f"Root {self.root} is not a vertex of the tree")
        if not self.tree.is_connected() or self.tree.excess() != -1:
            raise NotATree(f"Structure with |V|={self.tree.order}, ex={self.tree.excess()} is not a tree")

    @property
    def radius(self) -> int:
        return int(self.tree.distances_from([self.root]).max())

    def initial_edges(self) -> Tuple[Edge, ...]:
        return self.tree.incidence[self.root]


class ComponentKind(str, Enum):
    TREE = "Tree"
    UNICYCLE = "Unicycle"
    DENSE = "Dense"


@dataclass(frozen=True)
class ComponentClass:
    kind: ComponentKind
    saturated: bool
    cycle: bool


def _degrees_and_leaves(H: Hypergraph, alive: Dict[str, np.ndarray], hub_mask: np.ndarray
                        ) -> Tuple[np.ndarray, Dict[str, np.ndarray]]:
    """Vertex degrees over alive edges, and per relation the alive leaf edges: non-degenerate
    edges with at most one vertex that has degree ≥ 2 or is marked."""
    deg = np.zeros(H.order, dtype=np.int64)
    nondeg: Dict[str, np.ndarray] = {}
    for name, arr in H._index_edges.items():
        if not len(arr):
            nondeg[name] = np.zeros(0, dtype=bool)
            continue
        s = np.sort(arr[alive[name]], axis=1)
        first = np.ones(s.shape, dtype=bool)
        first[:, 1:] = s[:, 1:] != s[:, :-1]
        np.add.at(deg, s[first], 1)
        sorted_all = np.sort(arr, axis=1)
        nondeg[name] = np.all(sorted_all[:, 1:] != sorted_all[:, :-1], axis=1)
    hub = (deg >= 2) | hub_mask
    leaves = {}
    for name, arr in H._index_edges.items():
        if not len(arr):
            leaves[name] = np.zeros(0, dtype=bool)
            continue
        leaves[name] = alive[name] & nondeg[name] & (hub[arr].sum(axis=1) <= 1)
    return deg, leaves


def prune(H: Hypergraph, marked: Iterable[int] = ()) -> Hypergraph:
    """Iteratively strips leaf edges together with their private vertices, keeping marked vertices."""
    marked_mask = np.zeros(H.order, dtype=bool)
    marked = list(marked)
    if marked:
        marked_mask[H.index_of(marked)] = True
    alive = {name: np.ones(len(arr), dtype=bool) for name, arr in H._index_edges.items()}
    rounds = 0
    while True:
        deg, leaves = _degrees_and_leaves(H, alive, marked_mask)
        if not any(mask.any() for mask in leaves.values()):
            break
        for name in alive:
            alive[name] &= ~leaves[name]
        rounds += 1
    keep = H.vertex_array[(deg > 0) | marked_mask]
    logger.debug(f"prune: {rounds} rounds, {H.order} -> {keep.size} vertices")
    return H._restrict(keep, alive)


def is_saturated(H: Hypergraph) -> bool:
    if not H.is_connected() or H.excess() < 0:
        return False
    alive = {name: np.ones(len(arr), dtype=bool) for name, arr in H._index_edges.items()}
    _, leaves = _degrees_and_leaves(H, alive, np.zeros(H.order, dtype=bool))
    return not any(mask.any() for mask in leaves.values())


def components(H: Hypergraph) -> List[Hypergraph]:
    return H.components()


def classify_component(H: Hypergraph) -> ComponentClass:
    if not H.is_connected():
        raise NotConnected(f"classify_component needs a connected structure, got {H!r}")
    if H.order > config.SATURATION_CAP:
        raise TooLargeForSaturation(f"Component has {H.order} vertices, cap is {config.SATURATION_CAP}")
    ex = H.excess()
    kind = ComponentKind.TREE if ex < 0 else ComponentKind.UNICYCLE if ex == 0 else ComponentKind.DENSE
    saturated = is_saturated(H)
    return ComponentClass(kind=kind, saturated=saturated, cycle=saturated and kind is ComponentKind.UNICYCLE)


def center(H: Hypergraph, marked: Sequence[int] = ()) -> Hypergraph:
    return prune(H, marked)


def _edge_subsets(H: Hypergraph) -> Iterator[Hypergraph]:
    edges = list(H.edges())
    if len(edges) > config.SATURATION_EDGE_CAP:
        raise TooLargeForSaturation(
            f"Subset search over {len(edges)} edges exceeds SATURATION_EDGE_CAP={config.SATURATION_EDGE_CAP}")
    for size in range(1, len(edges) + 1):
        for subset in itertools.combinations(edges, size):
            yield H.edge_subgraph(subset)


def _dense_witness_through(piece: Hypergraph, v: int, r: int, max_edges: int) -> bool:
    """Grows connected edge sets through v, up to max_edges, looking for ex ≥ 1 at diameter ≤ r.

    Vertices of a candidate stay pairwise within r in the piece.
    """
    position = {u: i for i, u in enumerate(piece.vertex_array.tolist())}
    dist = shortest_path(piece.adjacency, directed=False, unweighted=True)
    weight = {rel.name: rel.arity - 1 for rel in piece.vocabulary.relations}
    incidence = piece.incidence

    def fits(edge: Edge, verts: FrozenSet[int]) -> bool:
        ends = [position[u] for u in set(edge[1])]
        spread = ends + [position[u] for u in verts]
        return bool((dist[np.ix_(ends, spread)] <= r).all())

    start = [(frozenset([e]), frozenset(e[1]), weight[e[0]]) for e in incidence[v] if fits(e, frozenset())]
    seen: Set[FrozenSet[Edge]] = {chosen for chosen, _, _ in start}
    stack = list(start)
    while stack:
        chosen, verts, total = stack.pop()
        if total - len(verts) >= 1 and piece.edge_subgraph(chosen).diameter() <= r:
            return True
        if len(chosen) >= max_edges:
            continue
        for u in verts:
            for e in incidence[u]:
                if e in chosen or not fits(e, verts):
                    continue
                grown = chosen | {e}
                if grown not in seen:
                    seen.add(grown)
                    stack.append((grown, verts | set(e[1]), total + weight[e[0]]))
    return False


def _local_saturated_vertices(C: Hypergraph, v: int, max_diameter: int) -> Set[int]:
    """Vertices of saturated sub-hypergraphs of C through v with diameter ≤ max_diameter."""
    ball = C.induced(C.neighborhood([v], max_diameter))
    core_part = prune(ball)
    if v not in core_part:
        return set()
    piece = core_part.component_of(v)
    ex = piece.excess()
    if ex == 0:
        return set(piece.vertices) if piece.diameter() <= max_diameter else set()
    found: Set[int] = set()
    for S in _edge_subsets(piece):
        if v in S and is_saturated(S) and S.diameter() <= max_diameter:
            found.update(S.vertices)
    return found


def saturated_vertices(H: Hypergraph, r: int) -> FrozenSet[int]:
    """Vertices lying in some saturated sub-hypergraph of diameter at most 2r+1."""
    max_diameter = 2 * r + 1
    remainder = prune(H)
    found: Set[int] = set()
    if not remainder.order:
        return frozenset()
    for comp in remainder.components():
        ex = comp.excess()
        if ex == 0:
            if comp.diameter() <= max_diameter:
                found.update(comp.vertices)
            continue
        logger.debug(f"saturated_vertices: dense component |V|={comp.order}, ex={ex}; local search")
        for v in sorted(comp.vertices):
            if v not in found:
                found.update(_local_saturated_vertices(comp, v, max_diameter))
    return frozenset(found)


def core(H: Hypergraph, marked: Sequence[int] = (), r: int = 0) -> Hypergraph:
    X = set(saturated_vertices(H, r)) | set(marked)
    if not X:
        return Hypergraph.empty(H.vocabulary)
    return H.induced(H.neighborhood(X, r))


def hanging_tree(H: Hypergraph, marked: Sequence[int], v: int, r: Optional[int] = None) -> RootedTree:
    host = core(H, marked, r) if r is not None else H
    if v not in host:
        raise Unreachable(f"Vertex {v} is not in Core(H, {tuple(marked)}; {r})")
    middle = center(host, marked)
    if not middle.order:
        raise Unreachable(f"Vertex {v} lies in a component with empty center")
    d_center = host.distances_from(sorted(middle.vertices))
    d_v = host.distances_from([v])
    at_v = d_center[host.index_of([v])[0]]
    if not np.isfinite(at_v):
        raise Unreachable(f"Vertex {v} is not reachable from the center")
    members = host.vertex_array[(d_center == at_v + d_v) & np.isfinite(d_v)].tolist()
    # петлі центру не належать дереву
    kept = [(name, t) for name, t in host.induced(members).edges() if not middle.has_edge(name, t)]
    return RootedTree(host.edge_subgraph(kept, extra_vertices=members), v)


def is_r_simple(H: Hypergraph, r: int) -> bool:
    kernel = core(H, (), r)
    return all(comp.excess() == 0 for comp in kernel.components()) if kernel.order else True


def is_r_sparse(H: Hypergraph, r: int) -> bool:
    """No dense sub-hypergraph of diameter ≤ r. Minimal witnesses are saturated, so they survive pruning."""
    remainder = prune(H)
    for comp in remainder.components() if remainder.order else []:
        if comp.excess() < 1:
            continue
        for v in sorted(comp.vertices):
            ball = prune(comp.induced(comp.neighborhood([v], r)))
            if v not in ball:
                continue
            piece = ball.component_of(v)
            if piece.excess() < 1:
                continue
            if piece.diameter() <= r:
                return False
            if _dense_witness_through(piece, v, r, max_edges=4 * r + 2):
                return False
    return True
