# src/modules/vocabulary/handlers.py

import argparse
import logging
from pathlib import Path
from typing import Any, Dict

from src.utils.errors import SparseLimitError, VocabularyError

from .presets import load_vocabulary
from .schema import write_vocabulary_file
from .service import edge_space_size

logger = logging.getLogger(__name__)


def _generate_vocabulary_error(error: SparseLimitError) -> Dict[str, Any]:
    logger.error(f"validate-vocab failed: {error.code}: {error.message}")
    return error.to_result()


async def validate_vocab_entry_point(args: argparse.Namespace, data: Dict[str, Any]) -> Dict[str, Any]:
    """Loads a preset or JSON vocabulary; reports group order, position orbits, patterns and |E_R[n]|."""
    logger.info(f"validate-vocab: {args.vocab}")
    try:
        vocab = load_vocabulary(args.vocab)
    except VocabularyError as e:
        result = _generate_vocabulary_error(e)
        result["records"] = [{"code": i.code, "relation": i.relation, "message": i.message} for i in e.issues]
        return result
    except SparseLimitError as e:
        return _generate_vocabulary_error(e)

    records = []
    for rel in vocab.relations:
        records.append({
            "relation": rel.name,
            "arity": rel.arity,
            "group_order": rel.group.order,
            "position_orbits": " ".join("{" + ",".join(str(p + 1) for p in orbit) + "}"
                                        for orbit in rel.group.position_orbits),
            "antireflexive_pairs": len(rel.antireflexive.pairs),
            "patterns": len(rel.patterns),
            "full_constant": str(rel.full_constant),
            f"edge_space_n{args.n}": edge_space_size(rel, args.n),
        })
    if args.export:
        write_vocabulary_file(vocab, Path(args.export))
    logger.info(f"Vocabulary '{vocab.name}' is valid ({len(vocab.relations)} relations)")
    return {"status": "success", "records": records, "info": {"vocabulary": vocab.name, "valid": True}}
