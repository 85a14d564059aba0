# src/modules/fo/service.py

import logging
from functools import lru_cache
from typing import Dict, FrozenSet, Iterable, List, Mapping, Optional, Set, Tuple

import numpy as np

from src.modules.structure.service import Hypergraph
from src.modules.vocabulary.service import canonical_edge
from src.utils.errors import UnboundVariable, UnknownVertex

from .parser import And, Atom, Const, Eq, Exists, Forall, Formula, Iff, Implies, Not, Or

logger = logging.getLogger(__name__)


def quantifier_rank(f: Formula) -> int:
    if isinstance(f, (Atom, Eq, Const)):
        return 0
    if isinstance(f, Not):
        return quantifier_rank(f.body)
    if isinstance(f, (And, Or)):
        return max(quantifier_rank(p) for p in f.parts)
    if isinstance(f, (Implies, Iff)):
        return max(quantifier_rank(f.left), quantifier_rank(f.right))
    return 1 + quantifier_rank(f.body)


@lru_cache(maxsize=4096)
def free_variables(f: Formula) -> FrozenSet[str]:
    if isinstance(f, Atom):
        return frozenset(f.args)
    if isinstance(f, Eq):
        return frozenset((f.left, f.right))
    if isinstance(f, Const):
        return frozenset()
    if isinstance(f, Not):
        return free_variables(f.body)
    if isinstance(f, (And, Or)):
        return frozenset().union(*(free_variables(p) for p in f.parts))
    if isinstance(f, (Implies, Iff)):
        return free_variables(f.left) | free_variables(f.right)
    return free_variables(f.body) - {f.var}


def is_sentence(f: Formula) -> bool:
    return not free_variables(f)


def is_edge_sentence(f: Formula) -> bool:
    """No equality symbol anywhere."""
    if isinstance(f, Eq):
        return False
    if isinstance(f, (Atom, Const)):
        return True
    if isinstance(f, Not):
        return is_edge_sentence(f.body)
    if isinstance(f, (And, Or)):
        return all(is_edge_sentence(p) for p in f.parts)
    if isinstance(f, (Implies, Iff)):
        return is_edge_sentence(f.left) and is_edge_sentence(f.right)
    return is_edge_sentence(f.body)


# Атоми, які мусять бути істинними, щоб формула (або її заперечення) була істинною.
Guard = Tuple[Atom, FrozenSet[str]]


def _required(f: Formula, negated: bool, shadow: FrozenSet[str]) -> List[Guard]:
    if isinstance(f, Atom):
        return [] if negated else [(f, shadow)]
    if isinstance(f, Not):
        return _required(f.body, not negated, shadow)
    if isinstance(f, And) and not negated or isinstance(f, Or) and negated:
        return [g for p in f.parts for g in _required(p, negated, shadow)]
    if isinstance(f, Implies) and negated:
        return _required(f.left, False, shadow) + _required(f.right, True, shadow)
    if isinstance(f, Exists) and not negated or isinstance(f, Forall) and negated:
        return _required(f.body, negated, shadow | {f.var})
    return []


@lru_cache(maxsize=4096)
def guards(var: str, body: Formula, negated: bool) -> Tuple[Guard, ...]:
    return tuple((atom, shadow) for atom, shadow in _required(body, negated, frozenset())
                 if var in atom.args and var not in shadow)


class Evaluator:
    """Tarskian evaluation with guarded quantifier ranges and a memo on quantified subformulas."""

    def __init__(self, H: Hypergraph):
        self.H = H
        self._memo: Dict[Tuple[Formula, Tuple[int, ...]], bool] = {}
        self._touching: Dict[str, np.ndarray] = {}
        self.steps = 0

    def _vertices_in(self, relation: str) -> np.ndarray:
        if relation not in self._touching:
            self._touching[relation] = np.unique(self.H.edge_array(relation))
        return self._touching[relation]

    def _range(self, var: str, body: Formula, negated: bool, env: Mapping[str, int]) -> Iterable[int]:
        best: Optional[Iterable[int]] = None
        best_size = self.H.order
        for atom, shadow in guards(var, body, negated):
            anchors = [a for a in atom.args if a != var and a not in shadow and a in env]
            if anchors:
                anchor = env[anchors[0]]
                found: Set[int] = set()
                for name, t in self.H.incidence.get(anchor, ()):
                    if name == atom.relation:
                        found.update(t)
                candidates: Iterable[int] = sorted(found)
                size = len(found)
            else:
                arr = self._vertices_in(atom.relation)
                candidates, size = arr.tolist(), arr.size
            if best is None or size < best_size:
                best, best_size = candidates, size
        if best is None:
            return self.H.vertex_array.tolist()
        return best

    def holds(self, f: Formula, env: Dict[str, int]) -> bool:
        self.steps += 1
        if isinstance(f, Atom):
            values = tuple(env[a] for a in f.args)
            relation = self.H.vocabulary.relation(f.relation)
            canon = canonical_edge(relation, values)
            return canon is not None and canon in self.H.edge_sets[f.relation]
        if isinstance(f, Eq):
            return env[f.left] == env[f.right]
        if isinstance(f, Const):
            return f.value
        if isinstance(f, Not):
            return not self.holds(f.body, env)
        if isinstance(f, And):
            return all(self.holds(p, env) for p in f.parts)
        if isinstance(f, Or):
            return any(self.holds(p, env) for p in f.parts)
        if isinstance(f, Implies):
            return not self.holds(f.left, env) or self.holds(f.right, env)
        if isinstance(f, Iff):
            return self.holds(f.left, env) == self.holds(f.right, env)
        key = (f, tuple(env[v] for v in sorted(free_variables(f))))
        if key in self._memo:
            return self._memo[key]
        result = self._quantifier(f, env)
        self._memo[key] = result
        return result

    def _quantifier(self, f: Formula, env: Dict[str, int]) -> bool:
        existential = isinstance(f, Exists)
        previous = env.get(f.var, None)
        had = f.var in env
        try:
            # ∀x φ ≡ ¬∃x ¬φ: the range is guarded by atoms required for ¬φ
            for u in self._range(f.var, f.body, not existential, env):
                env[f.var] = u
                if self.holds(f.body, env) == existential:
                    return existential
            return not existential
        finally:
            if had:
                env[f.var] = previous
            else:
                env.pop(f.var, None)


def evaluate(H: Hypergraph, f: Formula, assignment: Optional[Mapping[str, int]] = None) -> bool:
    assignment = dict(assignment or {})
    missing = free_variables(f) - set(assignment)
    if missing:
        raise UnboundVariable(f"Free variables {sorted(missing)} have no value in the assignment")
    for var, value in assignment.items():
        if value not in H:
            raise UnknownVertex(f"Assignment {var}={value} is not a vertex of the structure")
    evaluator = Evaluator(H)
    result = evaluator.holds(f, assignment)
    logger.debug(f"evaluate: {result} after {evaluator.steps} steps on |V|={H.order}")
    return result
