# src/modules/cnf/dpll.py

import logging
from collections import Counter
from dataclasses import dataclass
from enum import Enum
from typing import Dict, List, Optional, Tuple

from src import config

from .service import CnfFormula

logger = logging.getLogger(__name__)

Clauses = List[Tuple[int, ...]]


class Outcome(str, Enum):
    SAT = "sat"
    UNSAT = "unsat"
    INDETERMINATE = "indeterminate"


@dataclass(frozen=True)
class DpllResult:
    outcome: Outcome
    assignment: Optional[Dict[int, bool]] = None
    decisions: int = 0

    @property
    def satisfiable(self) -> Optional[bool]:
        if self.outcome is Outcome.INDETERMINATE:
            return None
        return self.outcome is Outcome.SAT


class _OutOfDecisions(Exception):
    pass


def _simplify(clauses: Clauses, lit: int) -> Optional[Clauses]:
    """Clauses under lit=true; None on an empty clause."""
    out: Clauses = []
    for clause in clauses:
        if lit in clause:
            continue
        if -lit in clause:
            reduced = tuple(x for x in clause if x != -lit)
            if not reduced:
                return None
            out.append(reduced)
        else:
            out.append(clause)
    return out


class DpllSolver:
    """Unit propagation, pure-literal elimination, branching on the most frequent variable."""

    def __init__(self, formula: CnfFormula, max_decisions: Optional[int] = None):
        self.formula = formula
        if max_decisions is not None and max_decisions < 0:
            raise ValueError(f"max_decisions must be non-negative, got {max_decisions}")
        self.max_decisions = config.DPLL_MAX_DECISIONS if max_decisions is None else max_decisions
        self.decisions = 0

    def _propagate(self, clauses: Clauses, assignment: Dict[int, bool]) -> Optional[Clauses]:
        while True:
            unit = next((c[0] for c in clauses if len(c) == 1), None)
            if unit is not None:
                assignment[abs(unit)] = unit > 0
                clauses = _simplify(clauses, unit)
                if clauses is None:
                    return None
                continue
            literals = {lit for c in clauses for lit in c}
            pure = [lit for lit in literals if -lit not in literals]
            if not pure:
                return clauses
            for lit in pure:
                assignment[abs(lit)] = lit > 0
                clauses = [c for c in clauses if lit not in c]

    def _search(self, clauses: Clauses, assignment: Dict[int, bool]) -> Optional[Dict[int, bool]]:
        assignment = dict(assignment)
        clauses = self._propagate(clauses, assignment)
        if clauses is None:
            return None
        if not clauses:
            return assignment
        if self.decisions >= self.max_decisions:
            raise _OutOfDecisions()
        self.decisions += 1
        counts = Counter(abs(lit) for c in clauses for lit in c)
        var = max(counts, key=lambda v: (counts[v], -v))
        for lit in (var, -var):
            branch = _simplify(clauses, lit)
            if branch is None:
                continue
            found = self._search(branch, {**assignment, var: lit > 0})
            if found is not None:
                return found
        return None

    def solve(self) -> DpllResult:
        self.decisions = 0
        try:
            found = self._search(self.formula.sorted_clauses(), {})
        except _OutOfDecisions:
            logger.warning(f"DPLL gave up after {self.decisions} decisions "
                           f"(n={self.formula.n}, clauses={self.formula.num_clauses})")
            return DpllResult(Outcome.INDETERMINATE, None, self.decisions)
        if found is None:
            return DpllResult(Outcome.UNSAT, None, self.decisions)
        # вільні змінні довільні
        assignment = {v: found.get(v, True) for v in range(1, self.formula.n + 1)}
        if not self.formula.satisfied_by(assignment):
            raise AssertionError("DPLL returned an assignment that falsifies a clause")
        return DpllResult(Outcome.SAT, assignment, self.decisions)


def dpll_sat(formula: CnfFormula, max_decisions: Optional[int] = None) -> DpllResult:
    result = DpllSolver(formula, max_decisions).solve()
    logger.debug(f"dpll n={formula.n} m={formula.num_clauses}: {result.outcome.value} after {result.decisions} decisions")
    return result
