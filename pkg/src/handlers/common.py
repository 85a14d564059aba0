# src/handlers/common.py

import argparse
import logging
from typing import Any, Awaitable, Callable, Dict

from src.modules.cnf.handlers import cert_scan_entry_point, cnf_entry_point, sat_scan_entry_point
from src.modules.fo.handlers import check_entry_point
from src.modules.limits.handlers import limit_entry_point
from src.modules.montecarlo.handlers import mc_entry_point
from src.modules.sampler.handlers import sample_entry_point
from src.modules.tree_types.handlers import tree_types_entry_point
from src.modules.vocabulary.handlers import validate_vocab_entry_point

from .utils import emit_result, print_error

logger = logging.getLogger(__name__)

EntryPoint = Callable[[argparse.Namespace, Dict[str, Any]], Awaitable[Dict[str, Any]]]

# Точки входу всіх модулів
ENTRY_POINTS: Dict[str, EntryPoint] = {
    "sample": sample_entry_point,
    "check": check_entry_point,
    "tree-types": tree_types_entry_point,
    "limit": limit_entry_point,
    "mc": mc_entry_point,
    "sat-scan": sat_scan_entry_point,
    "cert-scan": cert_scan_entry_point,
    "cnf": cnf_entry_point,
    "validate-vocab": validate_vocab_entry_point,
}


async def run_command(args: argparse.Namespace, data: Dict[str, Any]) -> Dict[str, Any]:
    """Runs one subcommand and writes its result; errors go to stderr and never to the data stream."""
    entry_point = ENTRY_POINTS[args.command]
    try:
        result = await entry_point(args, data)
    except Exception as e:
        logger.exception(f"Unhandled error in '{args.command}'", exc_info=e)
        result = {"status": "error", "code": type(e).__name__, "message": str(e)}
    if result.get("status") == "success":
        emit_result(result, args.format, args.out, stream=data.get("stdout"))
    else:
        print_error(result, stream=data.get("stderr"))
    return result
