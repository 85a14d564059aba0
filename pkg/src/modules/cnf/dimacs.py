# src/modules/cnf/dimacs.py

import logging
from pathlib import Path
from typing import List, Optional, Union

from src.utils.errors import DimacsError

from .service import CnfFormula

logger = logging.getLogger(__name__)


def parse_dimacs(text: str) -> CnfFormula:
    """`p cnf n m` header, `c` comments, clauses terminated by 0 (possibly across lines)."""
    n: Optional[int] = None
    declared = 0
    clauses: List[List[int]] = []
    current: List[int] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("c") or line.startswith("%"):
            continue
        if line.startswith("p"):
            parts = line.split()
            if len(parts) != 4 or parts[1] != "cnf" or n is not None:
                raise DimacsError(f"Line {lineno}: bad problem line '{line}'")
            try:
                n, declared = int(parts[2]), int(parts[3])
            except ValueError:
                raise DimacsError(f"Line {lineno}: bad problem line '{line}'")
            continue
        if n is None:
            raise DimacsError(f"Line {lineno}: clause before the 'p cnf' header")
        for tok in line.split():
            try:
                lit = int(tok)
            except ValueError:
                raise DimacsError(f"Line {lineno}: bad literal '{tok}'")
            if lit == 0:
                clauses.append(current)
                current = []
            elif abs(lit) > n:
                raise DimacsError(f"Line {lineno}: literal {lit} outside 1..{n}")
            else:
                current.append(lit)
    if n is None:
        raise DimacsError("Missing 'p cnf' header")
    if current:
        raise DimacsError("Last clause is not terminated by 0")
    if declared != len(clauses):
        logger.warning(f"DIMACS header declares {declared} clauses, found {len(clauses)}")
    lengths = {len(c) for c in clauses}
    if len(lengths) > 1:
        raise DimacsError(f"Clauses of mixed length {sorted(lengths)}")
    for c in clauses:
        if len({abs(x) for x in c}) != len(c):
            kind = "tautology" if any(-x in c for x in c) else "repeated variable"
            raise DimacsError(f"Clause {c} is a {kind}")
    l = lengths.pop() if lengths else 1
    if l == 0:
        raise DimacsError("Empty clause")
    return CnfFormula.of(n, l, clauses)


def format_dimacs(formula: CnfFormula, comment: Optional[str] = None) -> str:
    lines = [f"c {line}" for line in (comment or "").splitlines()]
    lines.append(f"p cnf {formula.n} {formula.num_clauses}")
    lines.extend(" ".join(map(str, clause)) + " 0" for clause in formula.sorted_clauses())
    return "\n".join(lines) + "\n"


def read_dimacs(path: Union[str, Path]) -> CnfFormula:
    return parse_dimacs(Path(path).read_text(encoding="utf-8"))


def write_dimacs(formula: CnfFormula, path: Union[str, Path], comment: Optional[str] = None) -> None:
    Path(path).write_text(format_dimacs(formula, comment), encoding="utf-8")
    logger.info(f"Wrote {formula.num_clauses} clauses over {formula.n} variables to {path}")
