# src/modules/limits/handlers.py

import argparse
import logging
from typing import Any, Dict, List

from .service import get_limit_table

logger = logging.getLogger(__name__)


def _generate_limit_usage_error(message: str) -> Dict[str, Any]:
    logger.error(f"limit: usage error: {message}")
    return {"status": "error", "code": "UsageError", "message": message}


def _beta_columns(point: Dict[str, float]) -> Dict[str, float]:
    return {f"beta_{name}": value for name, value in point.items()}


def _grid_records(table: Dict[str, Any]) -> List[Dict[str, Any]]:
    return [{**_beta_columns(point), "probability": value}
            for point, value in zip(table["grid"], table["values"])]


def _class_records(table: Dict[str, Any]) -> List[Dict[str, Any]]:
    records = []
    for row in table["rows"]:
        record = {"class": row["class"], "label": row["label"], "truth": int(row["truth"]),
                  "expression": row["expression"]}
        for point, value in zip(table["grid"], row["values"]):
            record["value@" + ",".join(f"{name}={v:g}" for name, v in point.items())] = value
        records.append(record)
    return records


async def limit_entry_point(args: argparse.Namespace, data: Dict[str, Any]) -> Dict[str, Any]:
    """Per grid point by default; `--per-class` gives one row per (grouped) agreeability class."""
    logger.info(f"limit: vocabulary={args.vocab}, formula='{args.formula}', strategy={args.strategy}")
    if args.override_r is not None or args.cycle_edge_cap is not None:
        logger.warning(f"Expert overrides in force: override_r={args.override_r}, "
                       f"cycle_edge_cap={args.cycle_edge_cap}. The result may differ from the true limit.")
    try:
        table = await get_limit_table(args.vocab, args.formula, override_r=args.override_r,
                                      edge_cap=args.cycle_edge_cap, strategy=args.strategy,
                                      grid=args.beta_grid, verify=not args.no_verify)
    except ValueError as e:
        return _generate_limit_usage_error(str(e))
    if table["status"] != "success":
        return table
    records = _class_records(table) if args.per_class else _grid_records(table)
    info = {key: table[key] for key in ("formula", "k", "r", "edge_cap", "strategy", "expression")}
    info["classes"] = len(table["rows"])
    logger.info(f"limit: k={table['k']}, r={table['r']}, cycle edge cap={table['edge_cap']}, "
                f"{len(table['rows'])} class rows")
    return {"status": "success", "records": records, "info": info}
