# src/modules/vocabulary/schema.py

import json
import logging
from pathlib import Path
from typing import List, Optional

from pydantic import BaseModel, Field, ValidationError, model_validator

from src.utils.errors import VocabularyError

from .service import AntiReflexivePairs, Relation, RelationSymbol, SymmetryGroup, Vocabulary, ensure_valid

logger = logging.getLogger(__name__)


class RelationSpec(BaseModel):
    """One relation of a vocabulary file. Positions are 1-based, as in the documentation."""

    name: str = Field(pattern=r"^[A-Za-z][A-Za-z0-9_]*$")
    arity: int
    generators: List[List[int]] = Field(default_factory=list)
    elements: Optional[List[List[int]]] = None
    antireflexive_pairs: List[List[int]] = Field(default_factory=list)

    @model_validator(mode="after")
    def _check_shapes(self) -> "RelationSpec":
        for perm in self.generators + (self.elements or []):
            if len(perm) != self.arity:
                raise ValueError(f"permutation {perm} has length {len(perm)}, expected {self.arity}")
        for pair in self.antireflexive_pairs:
            if len(pair) != 2:
                raise ValueError(f"antireflexive pair {pair} must have two positions")
        return self

    def to_relation(self) -> Relation:
        if self.elements is not None:
            group = SymmetryGroup(self.arity, frozenset(tuple(p - 1 for p in perm) for perm in self.elements))
        else:
            group = SymmetryGroup.generated_by(self.arity, [tuple(p - 1 for p in perm) for perm in self.generators])
        pairs = AntiReflexivePairs(tuple((i - 1, j - 1) for i, j in self.antireflexive_pairs))
        return Relation(RelationSymbol(self.name, self.arity), group, pairs)


class VocabularyFile(BaseModel):
    name: str
    relations: List[RelationSpec]

    def to_vocabulary(self) -> Vocabulary:
        return Vocabulary(self.name, tuple(entry.to_relation() for entry in self.relations))

    @classmethod
    def from_vocabulary(cls, vocab: Vocabulary) -> "VocabularyFile":
        entries = []
        for rel in vocab.relations:
            entries.append(RelationSpec(
                name=rel.name,
                arity=rel.arity,
                elements=[[p + 1 for p in g] for g in rel.group.sorted_elements],
                antireflexive_pairs=[[i + 1, j + 1] for i, j in rel.antireflexive.pairs],
            ))
        return cls(name=vocab.name, relations=entries)


def read_vocabulary_file(path: Path) -> Vocabulary:
    logger.info(f"Reading vocabulary file {path}")
    try:
        document = VocabularyFile.model_validate_json(Path(path).read_text(encoding="utf-8"))
    except ValidationError as e:
        raise VocabularyError(f"Vocabulary file {path} does not match the schema: {e.errors()[0]['msg']}")
    return ensure_valid(document.to_vocabulary())


def write_vocabulary_file(vocab: Vocabulary, path: Path) -> None:
    Path(path).write_text(json.dumps(VocabularyFile.from_vocabulary(vocab).model_dump(exclude_none=True), indent=2),
                          encoding="utf-8")
