# src/modules/sampler/service.py

import itertools
import logging
from functools import lru_cache
from typing import Dict, List, Literal, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from src import config
from src.modules.structure.service import Hypergraph
from src.modules.vocabulary.service import (
    DensityMap, OrbitPattern, Relation, Vocabulary, edge_space_size,
)
from src.utils.errors import Overflow

logger = logging.getLogger(__name__)

# Простори орбіт, менші за цю межу, перелічуються повністю
ENUMERATION_LIMIT = 1_000_000
INT64_LIMIT = 2 ** 63


class SampleConfig(BaseModel):
    """One draw of G^C(n, {p_R}) (regime "p") or of the sparse model G_n({β_R}) (regime "beta")."""

    model_config = ConfigDict(frozen=True)

    vocabulary: str
    n: int = Field(ge=1)
    densities: Dict[str, float]
    seed: int = Field(ge=0)
    regime: Literal["beta", "p"] = "beta"


def edge_probability(relation: Relation, value: float, n: int, regime: str = "beta") -> float:
    if regime == "p":
        return min(1.0, max(0.0, float(value)))
    return min(1.0, float(value) / float(n) ** (relation.arity - 1))


def expected_edge_count(vocab: Vocabulary, densities: DensityMap, n: int, regime: str = "beta") -> float:
    return sum(edge_space_size(rel, n) * edge_probability(rel, densities[rel.name], n, regime)
               for rel in vocab.relations)


@lru_cache(maxsize=None)
def local_orbits(relation: Relation, pattern: OrbitPattern) -> np.ndarray:
    """Canonical tuples over the symbolic values 0..d-1 using every value, one per orbit of the pattern class.
    A monotone relabelling onto a sorted d-subset keeps them canonical."""
    d = pattern.distinct
    found = set()
    for rgs in pattern.members:
        for perm in itertools.permutations(range(d)):
            found.add(relation.group.canonical(tuple(perm[b] for b in rgs)))
    rows = np.asarray(sorted(found), dtype=np.int64).reshape(-1, relation.arity)
    if len(rows) != pattern.label_orbits:
        raise AssertionError(f"{relation.name}: {len(rows)} local orbits for pattern {pattern.representative}, "
                             f"expected {pattern.label_orbits}")
    return rows


def _stream(seed: int, index: int, relation_idx: int, pattern_idx: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(index, relation_idx, pattern_idx)))


def _enumerate_orbits(n: int, local: np.ndarray) -> np.ndarray:
    d = int(local.max()) + 1
    subsets = np.asarray(list(itertools.combinations(range(n), d)), dtype=np.int64).reshape(-1, d)
    return np.concatenate([subsets[:, row] for row in local]) if len(subsets) else np.empty((0, local.shape[1]), np.int64)


def _draw_orbits(rng: np.random.Generator, n: int, local: np.ndarray, count: int) -> np.ndarray:
    """`count` distinct orbits chosen uniformly: a uniform sorted d-subset plus a uniform local orbit."""
    d = int(local.max()) + 1
    collected = np.empty((0, local.shape[1]), dtype=np.int64)
    while len(collected) < count:
        need = count - len(collected)
        batch = need + need // 10 + 8
        values = np.sort(rng.integers(0, n, size=(batch, d)), axis=1)
        if d > 1:
            values = values[np.all(values[:, 1:] != values[:, :-1], axis=1)]
        which = rng.integers(0, len(local), size=len(values))
        rows = np.take_along_axis(values, local[which], axis=1)
        collected = np.unique(np.concatenate([collected, rows]), axis=0)
    if len(collected) > count:
        keep = np.sort(rng.choice(len(collected), size=count, replace=False))
        collected = collected[keep]
    return collected


def _pattern_edges(rng: np.random.Generator, relation: Relation, pattern: OrbitPattern, n: int, p: float) -> np.ndarray:
    space = pattern.count(n)
    if space == 0 or p <= 0.0:
        return np.empty((0, relation.arity), dtype=np.int64)
    if space >= INT64_LIMIT:
        raise Overflow(f"{relation.name}: pattern space {space} does not fit a 64-bit binomial draw")
    count = int(rng.binomial(space, p))
    if count == 0:
        return np.empty((0, relation.arity), dtype=np.int64)
    local = local_orbits(relation, pattern)
    if space <= ENUMERATION_LIMIT or space <= 4 * count:
        every = _enumerate_orbits(n, local)
        return every[np.sort(rng.choice(len(every), size=count, replace=False))]
    return _draw_orbits(rng, n, local, count)


def sample(vocab: Vocabulary, cfg: SampleConfig, index: int = 0) -> Hypergraph:
    """Sample `index` of the run seeded by cfg.seed; vertices are 0..n-1."""
    densities = DensityMap.from_mapping(vocab, cfg.densities)
    expected = expected_edge_count(vocab, densities, cfg.n, cfg.regime)
    if expected > config.SAMPLER_EDGE_BUDGET:
        raise Overflow(f"Expected {expected:.3g} edges exceeds SAMPLER_EDGE_BUDGET={config.SAMPLER_EDGE_BUDGET}")
    edges: Dict[str, np.ndarray] = {}
    for j, rel in enumerate(vocab.relations):
        p = edge_probability(rel, densities[rel.name], cfg.n, cfg.regime)
        parts: List[np.ndarray] = []
        for m, pattern in enumerate(rel.patterns):
            parts.append(_pattern_edges(_stream(cfg.seed, index, j, m), rel, pattern, cfg.n, p))
        edges[rel.name] = np.concatenate(parts) if parts else np.empty((0, rel.arity), dtype=np.int64)
    H = Hypergraph(vocab, np.arange(cfg.n, dtype=np.int64), edges, check=False)
    logger.debug(f"sample #{index} (seed={cfg.seed}, n={cfg.n}): {H.num_edges} edges, expected {expected:.2f}")
    return H


def pattern_counts(H: Hypergraph) -> Dict[Tuple[str, int], int]:
    """Edges of H per (relation, number of distinct vertices)."""
    counts: Dict[Tuple[str, int], int] = {}
    for rel in H.vocabulary.relations:
        arr = np.sort(H.edge_array(rel.name), axis=1)
        if not len(arr):
            continue
        distinct = 1 + np.sum(arr[:, 1:] != arr[:, :-1], axis=1)
        for d, c in zip(*np.unique(distinct, return_counts=True)):
            counts[(rel.name, int(d))] = int(c)
    return counts
