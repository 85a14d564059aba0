# src/modules/tree_types/service.py

import itertools
import logging
from collections import Counter
from dataclasses import dataclass
from functools import cached_property
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from src import config
from src.modules.structure.service import HypergraphBuilder, RootedTree
from src.modules.vocabulary.service import Relation, Vocabulary, act
from src.utils.errors import CapExceeded, NotATree, RegistryMissing

logger = logging.getLogger(__name__)

ROOT = None  # позиція кореня у розфарбуванні шаблону


def _color_key(color: Optional["TreeType"]) -> tuple:
    return (0,) if color is None else (1, color.key)


@dataclass(frozen=True, eq=False)
class Pattern:
    """A single edge of relation `relation` with one root position (None) and the other
    positions colored by tree types. Instances are kept in canonical form."""

    relation: Relation
    colors: Tuple[Optional["TreeType"], ...]

    @classmethod
    def canonical(cls, relation: Relation, colors: Sequence[Optional["TreeType"]]) -> "Pattern":
        colors = tuple(colors)
        if sum(1 for c in colors if c is None) != 1 or len(colors) != relation.arity:
            raise ValueError(f"Pattern on {relation.name} needs exactly one root among {relation.arity} positions")
        best = min((act(g, colors) for g in relation.group.elements),
                   key=lambda cs: tuple(_color_key(c) for c in cs))
        return cls(relation, best)

    @cached_property
    def key(self) -> tuple:
        return (self.relation.name, tuple(_color_key(c) for c in self.colors))

    @cached_property
    def aut(self) -> int:
        return sum(1 for g in self.relation.group.elements if act(g, self.colors) == self.colors)

    @property
    def root_position(self) -> int:
        return self.colors.index(ROOT)

    @property
    def children(self) -> Tuple["TreeType", ...]:
        return tuple(c for c in self.colors if c is not None)

    @cached_property
    def height(self) -> int:
        return 1 + max(c.height for c in self.children)

    def __eq__(self, other) -> bool:
        return isinstance(other, Pattern) and self.key == other.key

    @cached_property
    def _hash(self) -> int:
        return hash(self.key)

    def __hash__(self) -> int:
        return self._hash

    def __repr__(self) -> str:
        return f"Pattern({self.relation.name}, {self.key[1]})"


@dataclass(frozen=True, eq=False)
class TreeType:
    """~k class of rooted trees: capped counts of initial-edge patterns. Count k stands for "≥k"."""

    k: int
    signature: Tuple[Tuple[Pattern, int], ...]

    @classmethod
    def from_counts(cls, k: int, counts: Dict[Pattern, int]) -> "TreeType":
        items = sorted(((p, min(c, k)) for p, c in counts.items() if c > 0), key=lambda pc: pc[0].key)
        return cls(k, tuple(items))

    @cached_property
    def key(self) -> tuple:
        return (self.k, tuple((p.key, c) for p, c in self.signature))

    @cached_property
    def height(self) -> int:
        return max((p.height for p, _ in self.signature), default=0)

    def count(self, pattern: Pattern) -> int:
        for p, c in self.signature:
            if p == pattern:
                return c
        return 0

    def __eq__(self, other) -> bool:
        return isinstance(other, TreeType) and self.key == other.key

    @cached_property
    def _hash(self) -> int:
        return hash(self.key)

    def __hash__(self) -> int:
        return self._hash

    def __repr__(self) -> str:
        return f"TreeType(k={self.k}, h={self.height}, |sig|={len(self.signature)})"


def leaf_type(k: int) -> TreeType:
    return TreeType(k, ())


def type_of(T: RootedTree, k: int, registry: Optional["TypeRegistry"] = None) -> TreeType:
    """~k type of a rooted tree, computed bottom-up over the hanging subtrees."""
    if not isinstance(T, RootedTree):
        raise NotATree("type_of expects a RootedTree")
    tree = T.tree
    depth = dict(zip(tree.vertex_array.tolist(), tree.distances_from([T.root]).tolist()))
    children: Dict[int, List[Tuple[Relation, Tuple[int, ...], int]]] = {v: [] for v in depth}
    for name, t in tree.edges():
        parent = min(t, key=lambda v: depth[v])
        children[parent].append((tree.vocabulary.relation(name), t, t.index(parent)))
    types: Dict[int, TreeType] = {}
    for v in sorted(depth, key=lambda x: -depth[x]):
        counts: Counter = Counter()
        for relation, t, at in children[v]:
            colors = tuple(ROOT if i == at else types[u] for i, u in enumerate(t))
            counts[Pattern.canonical(relation, colors)] += 1
        types[v] = TreeType.from_counts(k, counts)
    result = types[T.root]
    if registry is not None:
        registry.intern(result)
    return result


def canonical_patterns(vocab: Vocabulary, child_types: Sequence[TreeType]) -> List[Pattern]:
    found = set()
    for relation in vocab.relations:
        for root_pos in range(relation.arity):
            for combo in itertools.product(child_types, repeat=relation.arity - 1):
                colors = list(combo)
                colors.insert(root_pos, ROOT)
                found.add(Pattern.canonical(relation, colors))
    return sorted(found, key=lambda p: p.key)


class TypeRegistry:
    """Interned tree types and patterns for one vocabulary and threshold k.

    `complete_radius` is the largest radius whose types were fully enumerated; lazily
    interned types (from samples) never raise it."""

    def __init__(self, vocab: Vocabulary, k: int):
        self.vocab = vocab
        self.k = k
        self._ids: Dict[TreeType, int] = {}
        self._by_id: List[TreeType] = []
        self._levels: Dict[int, List[TreeType]] = {}
        self._patterns: Dict[int, List[Pattern]] = {}
        self._representatives: Dict[TreeType, RootedTree] = {}
        self.complete_radius = -1
        self.partial = False
        self.intern(leaf_type(k))

    def intern(self, t: TreeType) -> int:
        if t.k != self.k:
            raise ValueError(f"Type with k={t.k} interned into registry with k={self.k}")
        if t not in self._ids:
            for p, _ in t.signature:
                for child in p.children:
                    self.intern(child)
            self._ids[t] = len(self._by_id)
            self._by_id.append(t)
        return self._ids[t]

    def id_of(self, t: TreeType) -> int:
        return self.intern(t)

    def type_by_id(self, type_id: int) -> TreeType:
        return self._by_id[type_id]

    def __len__(self) -> int:
        return len(self._by_id)

    def __contains__(self, t: TreeType) -> bool:
        return t in self._ids

    def merge(self, other: "TypeRegistry") -> None:
        for t in other._by_id:
            self.intern(t)

    def require(self, r: int) -> None:
        if r > self.complete_radius:
            raise RegistryMissing(f"Tree types of radius ≤ {r} (k={self.k}) are not enumerated; "
                                  f"registry is complete up to radius {self.complete_radius}")

    def types(self, r: int) -> List[TreeType]:
        """All types of radius ≤ r, in enumeration order."""
        self.require(r)
        return list(self._levels[r])

    def patterns(self, r: int) -> List[Pattern]:
        """P(k, r): patterns whose non-root colors are types of radius ≤ r−1."""
        self.require(r)
        return list(self._patterns[r])

    def enumerate(self, r: int, cap: Optional[int] = None) -> "TypeRegistry":
        cap = config.TYPE_ENUMERATION_CAP if cap is None else cap
        if self.complete_radius < 0:
            self._levels[0] = [leaf_type(self.k)]
            self._patterns[0] = []
            self.complete_radius = 0
        for level in range(self.complete_radius + 1, r + 1):
            patterns = canonical_patterns(self.vocab, self._levels[level - 1])
            total = (self.k + 1) ** len(patterns)
            if total > cap:
                self.partial = True
                raise CapExceeded(f"Tree types at radius {level} (k={self.k}): {len(patterns)} patterns give "
                                  f"{total} signatures, cap is {cap}",
                                  details={"radius": level, "patterns": len(patterns), "signatures": total})
            level_types = []
            for counts in itertools.product(range(self.k + 1), repeat=len(patterns)):
                t = TreeType.from_counts(self.k, dict(zip(patterns, counts)))
                self.intern(t)
                level_types.append(t)
            self._patterns[level] = patterns
            self._levels[level] = level_types
            self.complete_radius = level
            logger.info(f"Tree types k={self.k}, radius ≤ {level}: {len(patterns)} patterns, {len(level_types)} types")
        return self

    def representative(self, t: TreeType) -> RootedTree:
        if t not in self._representatives:
            builder = HypergraphBuilder(self.vocab)
            root = builder.add_vertex()
            attach_representative(builder, root, t)
            self._representatives[t] = RootedTree(builder.freeze(), root)
        return self._representatives[t]

    def rows(self, r: int) -> List[Dict[str, object]]:
        table = []
        for t in self.types(r):
            rep = self.representative(t)
            table.append({
                "id": self.id_of(t),
                "height": t.height,
                "signature": describe(t, self),
                "representative_vertices": rep.tree.order,
                "representative_edges": rep.tree.num_edges,
            })
        return table


def attach_representative(builder: HypergraphBuilder, root: int, t: TreeType) -> None:
    """Hangs a minimal tree of type t below `root`; a "≥k" count is realized by exactly k edges."""
    for pattern, count in t.signature:
        for _ in range(count):
            values = []
            pending = []
            for color in pattern.colors:
                if color is None:
                    values.append(root)
                else:
                    child = builder.add_vertex()
                    values.append(child)
                    pending.append((child, color))
            builder.add_edge(pattern.relation.name, values)
            for child, color in pending:
                attach_representative(builder, child, color)


def representative(t: TreeType, vocab: Vocabulary) -> RootedTree:
    builder = HypergraphBuilder(vocab)
    root = builder.add_vertex()
    attach_representative(builder, root, t)
    return RootedTree(builder.freeze(), root)


def enumerate_types(vocab: Vocabulary, k: int, r: int, cap: Optional[int] = None) -> TypeRegistry:
    return TypeRegistry(vocab, k).enumerate(r, cap)


def describe(t: TreeType, registry: TypeRegistry) -> str:
    """Readable signature, e.g. `E[ρ,#1]x2 E[ρ,#0]x≥2`."""
    if not t.signature:
        return "leaf"
    parts = []
    for pattern, count in t.signature:
        colors = ",".join("ρ" if c is None else f"#{registry.id_of(c)}" for c in pattern.colors)
        amount = f"≥{count}" if count == t.k else str(count)
        parts.append(f"{pattern.relation.name}[{colors}]x{amount}")
    return " ".join(parts)


def type_distribution(types: Iterable[TreeType]) -> Dict[TreeType, float]:
    counts = Counter(types)
    total = sum(counts.values())
    return {t: c / total for t, c in counts.items()} if total else {}
