# src/modules/montecarlo/handlers.py

import argparse
import logging
from typing import Any, Dict, List

from src.modules.vocabulary.presets import load_vocabulary
from src.modules.vocabulary.service import parse_densities
from src.utils.errors import SparseLimitError

from .service import McConfig, McReport, run_monte_carlo, simple_fraction_scan

logger = logging.getLogger(__name__)


def _generate_mc_error(code: str, message: str) -> Dict[str, Any]:
    logger.error(f"mc failed: {code}: {message}")
    return {"status": "error", "code": code, "message": message}


def _records(reports: List[McReport]) -> List[Dict[str, Any]]:
    return [row.model_dump(by_alias=True) for report in reports for row in report.rows]


async def mc_entry_point(args: argparse.Namespace, data: Dict[str, Any]) -> Dict[str, Any]:
    """One report at --n, or a simple-fraction scan when several n are given."""
    logger.info(f"mc: statistic={args.stat}, vocabulary={args.vocab}, n={args.n}, samples={args.samples}")
    try:
        vocab = load_vocabulary(args.vocab)
        densities = parse_densities(args.beta, vocab)
        cfg = McConfig(vocabulary=args.vocab, densities=densities.as_dict(), n=args.n[0], samples=args.samples,
                       seed=args.seed, statistic=args.stat, k=args.k, r=args.r, formula=args.formula,
                       override_r=args.override_r, cycle_edge_cap=args.cycle_edge_cap, workers=args.workers)
        if len(args.n) > 1:
            if args.stat != "simple-fraction":
                raise ValueError("Several --n values are only supported for the simple-fraction statistic")
            reports = await simple_fraction_scan(cfg, list(args.n))
        else:
            reports = [await run_monte_carlo(cfg)]
    except SparseLimitError as e:
        return _generate_mc_error(e.code, e.message)
    except ValueError as e:
        return _generate_mc_error("UsageError", str(e))
    passed = all(report.passed for report in reports)
    extra = {str(report.config.n): report.extra for report in reports}
    return {"status": "success", "records": _records(reports),
            "info": {"statistic": args.stat, "passed": passed, "extra": extra}}
