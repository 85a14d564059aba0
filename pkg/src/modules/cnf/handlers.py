# src/modules/cnf/handlers.py

import argparse
import logging
from typing import Any, Dict, List

from src.utils.errors import SparseLimitError

from .dimacs import format_dimacs, read_dimacs
from .dpll import dpll_sat
from .experiments import ScanConfig, ScanRow, certificate_scan, sat_scan
from .service import sample_cnf

logger = logging.getLogger(__name__)


def _generate_cnf_error(code: str, message: str) -> Dict[str, Any]:
    logger.error(f"cnf command failed: {code}: {message}")
    return {"status": "error", "code": code, "message": message}


def _scan_config(args: argparse.Namespace, formula=None) -> ScanConfig:
    return ScanConfig(l=args.l, betas=list(args.beta), ns=list(args.n), samples=args.samples, seed=args.seed,
                      formula=formula, check_dpll=getattr(args, "check_dpll", False),
                      max_decisions=args.max_decisions, workers=args.workers)


def _scan_result(rows: List[ScanRow], kind: str) -> Dict[str, Any]:
    flagged = [f"beta={r.beta},n={r.n}" for r in rows if r.indeterminate]
    return {"status": "success", "records": [r.record(kind) for r in rows],
            "info": {"cells": len(rows), "indeterminate_cells": flagged}}


async def sat_scan_entry_point(args: argparse.Namespace, data: Dict[str, Any]) -> Dict[str, Any]:
    logger.info(f"sat-scan: l={args.l}, betas={args.beta}, ns={args.n}, samples={args.samples}")
    try:
        rows = await sat_scan(_scan_config(args))
    except SparseLimitError as e:
        return _generate_cnf_error(e.code, e.message)
    except ValueError as e:
        return _generate_cnf_error("UsageError", str(e))
    return _scan_result(rows, "sat")


async def cert_scan_entry_point(args: argparse.Namespace, data: Dict[str, Any]) -> Dict[str, Any]:
    logger.info(f"cert-scan: l={args.l}, formula={args.formula or 'built-in certificate'}")
    try:
        rows = await certificate_scan(_scan_config(args, args.formula))
    except SparseLimitError as e:
        return _generate_cnf_error(e.code, e.message)
    except ValueError as e:
        return _generate_cnf_error("UsageError", str(e))
    return _scan_result(rows, "cert")


async def cnf_entry_point(args: argparse.Namespace, data: Dict[str, Any]) -> Dict[str, Any]:
    """Draws one F(l, n, β) as DIMACS, or solves a DIMACS file with --solve."""
    try:
        if args.solve:
            formula = read_dimacs(args.solve)
        else:
            formula = sample_cnf(args.l, args.n[0], beta=args.beta[0], seed=args.seed)
        result = dpll_sat(formula, args.max_decisions)
    except SparseLimitError as e:
        return _generate_cnf_error(e.code, e.message)
    except (ValueError, OSError) as e:
        return _generate_cnf_error("UsageError", str(e))
    record = {"n": formula.n, "l": formula.l, "clauses": formula.num_clauses, "outcome": result.outcome.value,
              "decisions": result.decisions}
    comment = f"sparselimit F(l={formula.l}, n={formula.n}) seed={args.seed}; dpll: {result.outcome.value}"
    return {"status": "success", "records": [record], "text": None if args.solve else format_dimacs(formula, comment),
            "info": record}
