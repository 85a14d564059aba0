# src/modules/vocabulary/presets.py

import logging
import re
from functools import lru_cache
from pathlib import Path

from src import config
from src.utils.errors import UnknownVocabulary

from .service import AntiReflexivePairs, Relation, RelationSymbol, SymmetryGroup, Vocabulary, ensure_valid

logger = logging.getLogger(__name__)

PRESET_NAMES = ("graph", "digraph", "digraph-loops", "hypergraph<d>", "cnf<l>")


def graph() -> Vocabulary:
    edge = Relation(RelationSymbol("E", 2), SymmetryGroup.full(2), AntiReflexivePairs.all_pairs(2))
    return Vocabulary("graph", (edge,))


def digraph(loops: bool = False) -> Vocabulary:
    pairs = AntiReflexivePairs() if loops else AntiReflexivePairs.all_pairs(2)
    edge = Relation(RelationSymbol("E", 2), SymmetryGroup.trivial(2), pairs)
    return Vocabulary("digraph-loops" if loops else "digraph", (edge,))


def hypergraph(d: int) -> Vocabulary:
    edge = Relation(RelationSymbol("E", d), SymmetryGroup.full(d), AntiReflexivePairs.all_pairs(d))
    return Vocabulary(f"hypergraph{d}", (edge,))


def cnf_relation_name(j: int) -> str:
    return f"R{j}"


def cnf(l: int) -> Vocabulary:
    """R_j(x_1..x_l) encodes the clause with x_1..x_j negated and the rest positive."""
    relations = []
    for j in range(l + 1):
        blocks = [b for b in (tuple(range(j)), tuple(range(j, l))) if b]
        relations.append(Relation(
            RelationSymbol(cnf_relation_name(j), l),
            SymmetryGroup.blocks(l, blocks),
            AntiReflexivePairs.all_pairs(l),
        ))
    return Vocabulary(f"cnf{l}", tuple(relations))


@lru_cache(maxsize=64)
def preset(name: str) -> Vocabulary:
    if name == "graph":
        return ensure_valid(graph())
    if name == "digraph":
        return ensure_valid(digraph())
    if name == "digraph-loops":
        return ensure_valid(digraph(loops=True))
    match = re.fullmatch(r"(hypergraph|cnf)(\d+)", name)
    if match:
        size = int(match.group(2))
        if not 2 <= size <= config.MAX_ARITY:
            raise UnknownVocabulary(f"Preset '{name}': size must be within 2..{config.MAX_ARITY}")
        return ensure_valid(hypergraph(size) if match.group(1) == "hypergraph" else cnf(size))
    raise UnknownVocabulary(f"Unknown vocabulary preset '{name}'. Known presets: {', '.join(PRESET_NAMES)}")


def load_vocabulary(name_or_path: str) -> Vocabulary:
    path = Path(name_or_path)
    if path.suffix == ".json" or path.is_file():
        from .schema import read_vocabulary_file
        return read_vocabulary_file(path)
    return preset(name_or_path)
