# src/modules/fo/handlers.py

import argparse
import asyncio
import logging
from typing import Any, Dict, List

from src.modules.structure.serialization import read_structure
from src.modules.vocabulary.presets import load_vocabulary
from src.utils.errors import SparseLimitError

from .games import ef_winner
from .parser import parse, to_text
from .service import evaluate, free_variables, quantifier_rank

logger = logging.getLogger(__name__)


def _generate_check_error(code: str, message: str) -> Dict[str, Any]:
    logger.error(f"check failed: {code}: {message}")
    return {"status": "error", "code": code, "message": message}


def _check(args: argparse.Namespace) -> Dict[str, Any]:
    vocab = load_vocabulary(args.vocab) if args.vocab else None
    H = read_structure(args.structure, vocab)
    records: List[Dict[str, Any]] = []
    for text in args.formula:
        phi = parse(text, H.vocabulary)
        if free_variables(phi):
            raise ValueError(f"'{text}' has free variables {sorted(free_variables(phi))}; only sentences can be checked")
        holds = evaluate(H, phi)
        logger.info(f"check: {to_text(phi)} -> {holds}")
        records.append({"formula": to_text(phi), "quantifier_rank": quantifier_rank(phi), "holds": holds})
    info: Dict[str, Any] = {"vocabulary": H.vocabulary.name, "n": H.order, "edges": H.num_edges}
    if args.compare:
        other = read_structure(args.compare, H.vocabulary)
        rounds = args.rounds if args.rounds is not None else max((r["quantifier_rank"] for r in records), default=1)
        info["ef_rounds"] = rounds
        info["ef_winner"] = ef_winner(H, (), other, (), rounds).value
    return {"status": "success", "records": records, "info": info}


async def check_entry_point(args: argparse.Namespace, data: Dict[str, Any]) -> Dict[str, Any]:
    logger.info(f"check: structure={args.structure}, {len(args.formula)} formula(s)")
    loop = asyncio.get_running_loop()
    try:
        return await loop.run_in_executor(None, _check, args)
    except SparseLimitError as e:
        return _generate_check_error(e.code, e.message)
    except ValueError as e:
        return _generate_check_error("UsageError", str(e))
