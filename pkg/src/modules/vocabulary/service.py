# src/modules/vocabulary/service.py

import itertools
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property, lru_cache
from typing import Dict, FrozenSet, Iterable, Iterator, List, Mapping, Optional, Sequence, Tuple

from src import config
from src.utils.errors import (
    ArityMismatch, BadPair, LengthMismatch, NonGroup, NonPositiveBeta, UnknownRelation, VocabularyError,
)

logger = logging.getLogger(__name__)

Perm = Tuple[int, ...]  # 0-based: position i of g·t holds t[g[i]]
VertexTuple = Tuple[int, ...]


def compose(g: Perm, h: Perm) -> Perm:
    return tuple(g[h[i]] for i in range(len(h)))


def inverse(g: Perm) -> Perm:
    inv = [0] * len(g)
    for i, gi in enumerate(g):
        inv[gi] = i
    return tuple(inv)


def act(g: Perm, t: Sequence[int]) -> tuple:
    return tuple(t[g[i]] for i in range(len(g)))


def restricted_growth(t: Sequence) -> Tuple[int, ...]:
    """Relabels a tuple by first occurrence: (7, 3, 7) -> (0, 1, 0)."""
    seen: Dict = {}
    out = []
    for x in t:
        if x not in seen:
            seen[x] = len(seen)
        out.append(seen[x])
    return tuple(out)


def set_partitions(arity: int) -> Iterator[Tuple[int, ...]]:
    """All set partitions of range(arity) as restricted growth strings."""
    def extend(prefix: List[int], blocks: int):
        if len(prefix) == arity:
            yield tuple(prefix)
            return
        for b in range(blocks + 1):
            prefix.append(b)
            yield from extend(prefix, max(blocks, b + 1))
            prefix.pop()
    yield from extend([], 0)


@dataclass(frozen=True)
class RelationSymbol:
    name: str
    arity: int


@dataclass(frozen=True)
class SymmetryGroup:
    arity: int
    elements: FrozenSet[Perm]

    @classmethod
    def trivial(cls, arity: int) -> "SymmetryGroup":
        return cls(arity, frozenset({tuple(range(arity))}))

    @classmethod
    def full(cls, arity: int) -> "SymmetryGroup":
        return cls(arity, frozenset(itertools.permutations(range(arity))))

    @classmethod
    def blocks(cls, arity: int, blocks: Sequence[Sequence[int]]) -> "SymmetryGroup":
        """Direct product of full symmetric groups acting on the given position blocks."""
        elements = set()
        per_block = [list(itertools.permutations(b)) for b in blocks]
        for choice in itertools.product(*per_block):
            g = list(range(arity))
            for block, image in zip(blocks, choice):
                for src, dst in zip(block, image):
                    g[src] = dst
            elements.add(tuple(g))
        return cls(arity, frozenset(elements))

    @classmethod
    def generated_by(cls, arity: int, generators: Iterable[Perm]) -> "SymmetryGroup":
        identity = tuple(range(arity))
        gens = [tuple(g) for g in generators]
        elements = {identity}
        frontier = [identity]
        while frontier:
            nxt = []
            for x in frontier:
                for g in gens:
                    y = compose(g, x)
                    if y not in elements:
                        elements.add(y)
                        nxt.append(y)
            frontier = nxt
        return cls(arity, frozenset(elements))

    @property
    def order(self) -> int:
        return len(self.elements)

    @cached_property
    def sorted_elements(self) -> Tuple[Perm, ...]:
        return tuple(sorted(self.elements))

    @cached_property
    def position_orbits(self) -> Tuple[Tuple[int, ...], ...]:
        seen = set()
        orbits = []
        for i in range(self.arity):
            if i in seen:
                continue
            orbit = tuple(sorted({g[i] for g in self.elements}))
            seen.update(orbit)
            orbits.append(orbit)
        return tuple(orbits)

    @cached_property
    def is_block_symmetric(self) -> bool:
        return self.order == math.prod(math.factorial(len(o)) for o in self.position_orbits)

    def canonical(self, t: Sequence[int]) -> tuple:
        if self.is_block_symmetric:
            out = list(t)
            for orbit in self.position_orbits:
                for pos, value in zip(orbit, sorted(t[p] for p in orbit)):
                    out[pos] = value
            return tuple(out)
        return min(act(g, t) for g in self.elements)

    def stabilizer_size(self, t: Sequence) -> int:
        t = tuple(t)
        return sum(1 for g in self.elements if act(g, t) == t)

    def issues(self) -> List[str]:
        problems = []
        identity = tuple(range(self.arity))
        for g in self.elements:
            if len(g) != self.arity or sorted(g) != list(identity):
                problems.append(f"{g} is not a permutation of {self.arity} positions")
        if problems:
            return problems
        if identity not in self.elements:
            problems.append("identity missing")
        for g in self.elements:
            if inverse(g) not in self.elements:
                problems.append(f"inverse of {g} missing")
                break
        for g, h in itertools.product(self.elements, repeat=2):
            if compose(g, h) not in self.elements:
                problems.append(f"not closed: {g}∘{h}")
                break
        return problems


@dataclass(frozen=True)
class AntiReflexivePairs:
    pairs: Tuple[Tuple[int, int], ...] = ()

    @classmethod
    def all_pairs(cls, arity: int) -> "AntiReflexivePairs":
        return cls(tuple(itertools.combinations(range(arity), 2)))

    def violated_by(self, t: Sequence[int]) -> bool:
        return any(t[i] == t[j] for i, j in self.pairs)


@dataclass(frozen=True)
class OrbitPattern:
    """One Φ-class of repetition patterns. Every orbit of a tuple with this pattern and
    value set of size `distinct` has the same size, so |E_R[n]| gets `constant·(n)_d` from it."""

    representative: Tuple[int, ...]
    distinct: int
    constant: Fraction
    members: Tuple[Tuple[int, ...], ...]

    @property
    def label_orbits(self) -> int:
        return int(self.constant * math.factorial(self.distinct))

    def count(self, n: int) -> int:
        if n < self.distinct:
            return 0
        return self.label_orbits * math.comb(n, self.distinct)


@dataclass(frozen=True)
class Relation:
    symbol: RelationSymbol
    group: SymmetryGroup
    antireflexive: AntiReflexivePairs = field(default_factory=AntiReflexivePairs)

    @property
    def name(self) -> str:
        return self.symbol.name

    @property
    def arity(self) -> int:
        return self.symbol.arity

    def canonical_edge(self, t: Sequence[int]) -> Optional[VertexTuple]:
        return canonical_edge(self, t)

    @cached_property
    def patterns(self) -> Tuple[OrbitPattern, ...]:
        return tuple(orbit_patterns(self))

    @cached_property
    def full_constant(self) -> Fraction:
        """Constant c of the all-distinct pattern; |E_R[n]| ~ c·n^a."""
        for p in self.patterns:
            if p.distinct == self.arity:
                return p.constant
        return Fraction(0)


@dataclass(frozen=True)
class Vocabulary:
    name: str
    relations: Tuple[Relation, ...]

    def relation(self, name: str) -> Relation:
        for rel in self.relations:
            if rel.name == name:
                return rel
        raise UnknownRelation(f"Relation '{name}' is not in vocabulary '{self.name}'")

    @property
    def names(self) -> Tuple[str, ...]:
        return tuple(r.name for r in self.relations)

    def index_of(self, name: str) -> int:
        return self.names.index(name)

    @property
    def max_arity(self) -> int:
        return max(r.arity for r in self.relations)


@dataclass(frozen=True)
class VocabularyIssue:
    code: str
    relation: str
    message: str

    def __str__(self) -> str:
        return f"{self.code}[{self.relation}]: {self.message}"


_ISSUE_ERRORS = {"NonGroup": NonGroup, "BadPair": BadPair, "ArityMismatch": ArityMismatch}


def validate(vocab: Vocabulary) -> List[VocabularyIssue]:
    """Returns the list of problems; an empty list means the vocabulary is valid."""
    issues: List[VocabularyIssue] = []
    seen = set()
    if not vocab.relations:
        issues.append(VocabularyIssue("ArityMismatch", "-", "vocabulary has no relations"))
    for rel in vocab.relations:
        name, arity = rel.name, rel.arity
        if name in seen:
            issues.append(VocabularyIssue("ArityMismatch", name, "duplicate relation name"))
        seen.add(name)
        if arity < 2 or arity > config.MAX_ARITY:
            issues.append(VocabularyIssue("ArityMismatch", name, f"arity {arity} outside 2..{config.MAX_ARITY}"))
        if rel.group.arity != arity:
            issues.append(VocabularyIssue("ArityMismatch", name, f"group arity {rel.group.arity} != relation arity {arity}"))
        else:
            issues.extend(VocabularyIssue("NonGroup", name, p) for p in rel.group.issues())
        for pair in rel.antireflexive.pairs:
            i, j = pair
            if i == j or not (0 <= i < arity and 0 <= j < arity):
                issues.append(VocabularyIssue("BadPair", name, f"pair {{{i + 1},{j + 1}}} invalid for arity {arity}"))
    return issues


def ensure_valid(vocab: Vocabulary) -> Vocabulary:
    issues = validate(vocab)
    if issues:
        for issue in issues:
            logger.error(f"Vocabulary '{vocab.name}': {issue}")
        error_cls = _ISSUE_ERRORS.get(issues[0].code, VocabularyError)
        raise error_cls(f"Vocabulary '{vocab.name}' is invalid: {issues[0]}", issues)
    return vocab


def canonical_edge(relation: Relation, t: Sequence[int]) -> Optional[VertexTuple]:
    """Lexicographically least tuple of the Φ-orbit, or None when a P-pair repeats."""
    if len(t) != relation.arity:
        raise LengthMismatch(f"Relation {relation.name} has arity {relation.arity}, got tuple of length {len(t)}")
    if relation.antireflexive.violated_by(t):
        return None
    return relation.group.canonical(tuple(t))


@lru_cache(maxsize=None)
def orbit_patterns(relation: Relation) -> List[OrbitPattern]:
    group = relation.group
    valid = [p for p in set_partitions(relation.arity) if not relation.antireflexive.violated_by(p)]
    remaining = set(valid)
    patterns = []
    for rgs in valid:
        if rgs not in remaining:
            continue
        members = sorted({restricted_growth(act(g, rgs)) for g in group.elements})
        remaining.difference_update(members)
        pointwise = sum(1 for g in group.elements if act(g, rgs) == rgs)
        setwise = sum(1 for g in group.elements if restricted_growth(act(g, rgs)) == rgs)
        patterns.append(OrbitPattern(
            representative=rgs,
            distinct=max(rgs) + 1,
            constant=Fraction(pointwise, setwise),
            members=tuple(members),
        ))
    patterns.sort(key=lambda p: (-p.distinct, p.representative))
    logger.debug(f"Relation {relation.name}: {len(patterns)} repetition patterns "
                 f"{[(p.distinct, str(p.constant)) for p in patterns]}")
    return patterns


def edge_space_size(relation: Relation, n: int) -> int:
    return sum(p.count(n) for p in relation.patterns)


@dataclass(frozen=True)
class DensityMap:
    values: Tuple[Tuple[str, float], ...]

    @classmethod
    def from_mapping(cls, vocab: Vocabulary, mapping: Mapping[str, float]) -> "DensityMap":
        for name in mapping:
            vocab.relation(name)
        missing = [n for n in vocab.names if n not in mapping]
        if missing:
            raise UnknownRelation(f"No density given for relations {missing}")
        values = []
        for name in vocab.names:
            beta = float(mapping[name])
            if beta < 0 or math.isnan(beta):
                raise NonPositiveBeta(f"Density for {name} must be non-negative, got {beta}")
            values.append((name, beta))
        return cls(tuple(values))

    @classmethod
    def uniform(cls, vocab: Vocabulary, beta: float) -> "DensityMap":
        return cls.from_mapping(vocab, {name: beta for name in vocab.names})

    def __getitem__(self, name: str) -> float:
        for key, value in self.values:
            if key == name:
                return value
        raise KeyError(name)

    def as_dict(self) -> Dict[str, float]:
        return dict(self.values)

    def require_positive(self) -> "DensityMap":
        for name, beta in self.values:
            if beta <= 0:
                raise NonPositiveBeta(f"β_{name} must be > 0 for symbolic evaluation, got {beta}")
        return self


def parse_densities(text: str, vocab: Vocabulary) -> DensityMap:
    """Accepts '1.5' (all relations) or 'E=1.5,F=2'."""
    text = text.strip()
    if "=" not in text:
        return DensityMap.uniform(vocab, float(text))
    mapping = {}
    for item in text.split(","):
        if not item.strip():
            continue
        name, _, value = item.partition("=")
        mapping[name.strip()] = float(value)
    return DensityMap.from_mapping(vocab, mapping)
