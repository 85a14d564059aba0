# src/handlers/utils.py

import csv
import io
import json
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional, TextIO

logger = logging.getLogger(__name__)

FORMATS = ("csv", "json")


def _columns(records: List[Dict[str, Any]]) -> List[str]:
    columns: List[str] = []
    for record in records:
        for key in record:
            if key not in columns:
                columns.append(key)
    return columns


def render_csv(records: List[Dict[str, Any]]) -> str:
    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=_columns(records), lineterminator="\n", restval="")
    writer.writeheader()
    for record in records:
        writer.writerow({k: json.dumps(v) if isinstance(v, (dict, list)) else v for k, v in record.items()})
    return buffer.getvalue()


def render_json(result: Dict[str, Any]) -> str:
    payload = {k: v for k, v in result.items() if v is not None}
    return json.dumps(payload, indent=2, default=str) + "\n"


def render(result: Dict[str, Any], fmt: str) -> str:
    """Text artifacts (structures, DIMACS) are written as-is in csv mode; json always mirrors the whole result."""
    if fmt == "json":
        return render_json(result)
    if result.get("text"):
        return result["text"]
    return render_csv(result.get("records") or [])


def emit_result(result: Dict[str, Any], fmt: str, out: Optional[str], stream: Optional[TextIO] = None) -> None:
    text = render(result, fmt)
    if out:
        path = Path(out)
        if path.parent and not path.parent.exists():
            path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")
        logger.info(f"Result written to {path} ({len(result.get('records') or [])} records)")
    else:
        (stream or sys.stdout).write(text)
        (stream or sys.stdout).flush()


def print_error(result: Dict[str, Any], stream: Optional[TextIO] = None) -> None:
    print(f"Error [{result.get('code', 'unknown')}]: {result.get('message', '')}", file=stream or sys.stderr)
