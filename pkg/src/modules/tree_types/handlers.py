# src/modules/tree_types/handlers.py

import argparse
import asyncio
import logging
from typing import Any, Dict

from src.modules.limits.expressions import eval_expr
from src.modules.limits.service import ProbabilityTable
from src.modules.vocabulary.presets import load_vocabulary
from src.modules.vocabulary.service import parse_densities
from src.utils.errors import SparseLimitError

from .service import enumerate_types

logger = logging.getLogger(__name__)


def _generate_tree_types_error(code: str, message: str) -> Dict[str, Any]:
    logger.error(f"tree-types failed: {code}: {message}")
    return {"status": "error", "code": code, "message": message}


def _table(args: argparse.Namespace) -> Dict[str, Any]:
    vocab = load_vocabulary(args.vocab)
    registry = enumerate_types(vocab, args.k, args.r, args.cap)
    records = registry.rows(args.r)
    for row, t in zip(records, registry.types(args.r)):
        tree = registry.representative(t).tree
        row["representative"] = " ".join(f"{name}{edge}" for name, edge in tree.edges()) or "-"
    if args.beta:
        densities = parse_densities(args.beta, vocab).require_positive()
        table = ProbabilityTable(registry)
        for row, t in zip(records, registry.types(args.r)):
            expr = table.tree_type_prob(args.r, t)
            row["probability"] = eval_expr(expr, densities.as_dict())
            row["expression"] = expr.sexpr()
    return {"status": "success", "records": records,
            "info": {"vocabulary": vocab.name, "k": args.k, "r": args.r, "types": len(records)}}


async def tree_types_entry_point(args: argparse.Namespace, data: Dict[str, Any]) -> Dict[str, Any]:
    logger.info(f"tree-types: vocabulary={args.vocab}, k={args.k}, r={args.r}")
    loop = asyncio.get_running_loop()
    try:
        return await loop.run_in_executor(None, _table, args)
    except SparseLimitError as e:
        return _generate_tree_types_error(e.code, e.message)
    except ValueError as e:
        return _generate_tree_types_error("UsageError", str(e))
