# src/modules/cnf/service.py

import itertools
import math
import logging
from dataclasses import dataclass
from typing import FrozenSet, Iterable, List, Optional, Tuple

import numpy as np

from src.modules.fo.parser import Formula, parse
from src.modules.fo.service import evaluate
from src.modules.sampler.service import SampleConfig, sample
from src.modules.structure.service import Hypergraph
from src.modules.vocabulary.presets import cnf_relation_name, preset
from src.modules.vocabulary.service import Vocabulary
from src.utils.errors import BadRelation

logger = logging.getLogger(__name__)

Clause = FrozenSet[int]


def cnf_vocabulary(l: int) -> Vocabulary:
    return preset(f"cnf{l}")


@dataclass(frozen=True)
class CnfFormula:
    """l-CNF over variables 1..n: a set of non-tautological clauses with exactly l literals each."""

    n: int
    l: int
    clauses: FrozenSet[Clause]

    def __post_init__(self):
        if self.l < 1:
            raise ValueError(f"Clause length must be positive, got {self.l}")
        for clause in self.clauses:
            variables = {abs(lit) for lit in clause}
            if len(clause) != self.l or len(variables) != self.l:
                raise ValueError(f"Clause {sorted(clause)} is not a non-tautological {self.l}-clause")
            if 0 in clause or max(variables) > self.n:
                raise ValueError(f"Clause {sorted(clause)} mentions a variable outside 1..{self.n}")

    @classmethod
    def of(cls, n: int, l: int, clauses: Iterable[Iterable[int]]) -> "CnfFormula":
        return cls(n, l, frozenset(frozenset(c) for c in clauses))

    @property
    def num_clauses(self) -> int:
        return len(self.clauses)

    def sorted_clauses(self) -> List[Tuple[int, ...]]:
        return sorted(tuple(sorted(c, key=lambda lit: (abs(lit), lit))) for c in self.clauses)

    def satisfied_by(self, assignment) -> bool:
        return all(any(assignment.get(abs(lit)) == (lit > 0) for lit in clause) for clause in self.clauses)


def clause_to_edge(clause: Clause) -> Tuple[str, Tuple[int, ...]]:
    """{¬x_a, ¬x_b, x_c} -> R2(a, b, c): negated block first, each block ascending."""
    negated = sorted(-lit for lit in clause if lit < 0)
    positive = sorted(lit for lit in clause if lit > 0)
    return cnf_relation_name(len(negated)), tuple(negated + positive)


def edge_to_clause(name: str, t: Tuple[int, ...]) -> Clause:
    if not name.startswith("R") or not name[1:].isdigit() or int(name[1:]) > len(t):
        raise BadRelation(f"Relation '{name}' does not encode a clause of length {len(t)}")
    j = int(name[1:])
    return frozenset([-v for v in t[:j]] + list(t[j:]))


def to_structure(F: CnfFormula) -> Hypergraph:
    vocab = cnf_vocabulary(F.l)
    edges = {rel.name: [] for rel in vocab.relations}
    for clause in F.clauses:
        name, t = clause_to_edge(clause)
        edges[name].append(t)
    arrays = {name: np.asarray(rows, dtype=np.int64).reshape(-1, F.l) for name, rows in edges.items()}
    return Hypergraph(vocab, np.arange(1, F.n + 1, dtype=np.int64), arrays)


def from_structure(H: Hypergraph) -> CnfFormula:
    """Vertices are renumbered 1..|V| in increasing order; a structure from to_structure keeps its numbering."""
    l = H.vocabulary.max_arity
    if len(H.vocabulary.relations) != l + 1:
        raise BadRelation(f"Vocabulary '{H.vocabulary.name}' has {len(H.vocabulary.relations)} relations, expected {l + 1}")
    for rel in H.vocabulary.relations:
        if rel.arity != l or rel.name != cnf_relation_name(H.vocabulary.index_of(rel.name)):
            raise BadRelation(f"Vocabulary '{H.vocabulary.name}' is not a clause encoding (relation {rel.name})")
    position = {int(v): i + 1 for i, v in enumerate(H.vertex_array.tolist())}
    clauses = set()
    for name, t in H.edges():
        clauses.add(edge_to_clause(name, tuple(position[v] for v in t)))
    return CnfFormula(H.order, l, frozenset(clauses))


def sample_cnf(l: int, n: int, *, beta: Optional[float] = None, p: Optional[float] = None,
               seed: int = 0, index: int = 0) -> CnfFormula:
    """One draw of F(l, n, p); with `beta` the clause probability is beta / n^(l-1)."""
    if l < 2:
        raise ValueError(f"Clause length must be at least 2, got {l}")
    if (beta is None) == (p is None):
        raise ValueError("Exactly one of beta and p must be given")
    vocab = cnf_vocabulary(l)
    value = beta if beta is not None else p
    cfg = SampleConfig(vocabulary=vocab.name, n=n, densities={name: value for name in vocab.names},
                       seed=seed, regime="beta" if beta is not None else "p")
    F = from_structure(sample(vocab, cfg, index=index))
    logger.debug(f"sample_cnf l={l} n={n} seed={seed} #{index}: {F.num_clauses} clauses")
    return F


def expected_clause_count(l: int, n: int, beta: float) -> float:
    """2^l · C(n, l) · beta / n^(l-1)."""
    return 2 ** l * math.comb(n, l) * min(1.0, beta / n ** (l - 1))


def certificate_text(l: int) -> str:
    """All 2^l sign patterns on l distinct variables; a formula containing them is unsatisfiable."""
    names = [f"x{i}" for i in range(1, l + 1)]
    distinct = [f"{a} != {b}" for a, b in itertools.combinations(names, 2)]
    atoms = []
    for signs in itertools.product((False, True), repeat=l):
        negated = [x for x, neg in zip(names, signs) if neg]
        positive = [x for x, neg in zip(names, signs) if not neg]
        atoms.append(f"{cnf_relation_name(len(negated))}({', '.join(negated + positive)})")
    body = " & ".join(distinct + atoms)
    return "".join(f"exists {x}. " for x in names) + f"({body})"


def certificate_sentence(l: int) -> Formula:
    return parse(certificate_text(l), cnf_vocabulary(l))


def lint_certificate(phi: Formula, l: int) -> bool:
    """False (with a warning) when phi already holds on the empty formula, which is satisfiable."""
    empty = to_structure(CnfFormula(l, l, frozenset()))
    if evaluate(empty, phi):
        logger.warning("Certificate holds on an empty (satisfiable) formula; it does not imply unsatisfiability")
        return False
    return True


