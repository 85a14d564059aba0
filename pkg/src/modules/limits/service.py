# src/modules/limits/service.py

import asyncio
import itertools
import logging
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, Hashable, List, Optional, Sequence, Tuple

import numpy as np
from aiocache import cached

from src import config
from src.modules.fo.games import rank_type
from src.modules.fo.parser import Formula, parse, to_text
from src.modules.fo.service import evaluate, is_sentence, quantifier_rank
from src.modules.structure.richness import is_rich
from src.modules.structure.service import Hypergraph, HypergraphBuilder, core
from src.modules.tree_types.service import Pattern, TreeType, TypeRegistry, attach_representative
from src.modules.vocabulary.presets import load_vocabulary
from src.modules.vocabulary.service import Vocabulary
from src.utils.errors import CapExceeded, NotSimple, PartialRegistry, RichnessCheckFailed, SparseLimitError

from .cycles import (CycleClass, CycleKey, classify_cycle_component, cycle_from_code, default_edge_cap,
                     enumerate_cycles)
from .expressions import (ONE, Gamma, GammaSum, Mu, PoissonPmf, PoissonTail, Sum, SymExpr, grid_eval,
                          parse_beta_grid, product)

logger = logging.getLogger(__name__)

STRATEGIES = ("grouped", "classes")


def radius_for(k: int) -> int:
    return (3 ** k - 1) // 2


class ProbabilityTable:
    """Memoized μ_{r,ε}, Pr[r, T] and γ_O over one complete registry. Shared nodes keep evaluation memo hits high."""

    def __init__(self, registry: TypeRegistry):
        if registry.partial:
            raise PartialRegistry(f"Registry for k={registry.k} was only partially enumerated")
        self.registry = registry
        self.k = registry.k
        self._mu: Dict[Tuple[int, Pattern], SymExpr] = {}
        self._pr: Dict[Tuple[int, TreeType], SymExpr] = {}
        self._gamma: Dict[CycleKey, SymExpr] = {}

    def _complete(self, r: int) -> None:
        if self.registry.partial or r > self.registry.complete_radius:
            raise PartialRegistry(f"Tree types of radius {r} (k={self.k}) are not fully enumerated; "
                                  f"complete up to {self.registry.complete_radius}")

    def mu(self, r: int, pattern: Pattern) -> SymExpr:
        key = (r, pattern)
        if key not in self._mu:
            self._complete(r - 1)
            lambdas = [self.tree_type_prob(r - 1, child) for child in pattern.children]
            self._mu[key] = Mu(pattern.relation.name, pattern.aut, [lam for lam in lambdas if lam is not ONE])
        return self._mu[key]

    def tree_type_prob(self, r: int, t: TreeType) -> SymExpr:
        key = (r, t)
        if key in self._pr:
            return self._pr[key]
        self._complete(r)
        if r == 0:
            self._pr[key] = ONE
            return ONE
        factors = []
        for pattern in self.registry.patterns(r):
            count = t.count(pattern)
            mean = self.mu(r, pattern)
            factors.append(PoissonTail(mean, self.k) if count == self.k else PoissonPmf(mean, count))
        self._pr[key] = product(factors)
        return self._pr[key]

    def gamma(self, r: int, cycle: CycleClass) -> SymExpr:
        if cycle.key not in self._gamma:
            self._complete(r)
            lam = product([self.tree_type_prob(r, self.registry.type_by_id(c)) for c in cycle.colors])
            self._gamma[cycle.key] = Gamma(cycle.aut, lam, cycle.shape.edge_counts)
        return self._gamma[cycle.key]


def mu(registry: TypeRegistry, r: int, pattern: Pattern) -> SymExpr:
    return ProbabilityTable(registry).mu(r, pattern)


def tree_type_prob(registry: TypeRegistry, r: int, t: TreeType) -> SymExpr:
    return ProbabilityTable(registry).tree_type_prob(r, t)


def gamma(registry: TypeRegistry, r: int, cycle: CycleClass) -> SymExpr:
    return ProbabilityTable(registry).gamma(r, cycle)


@dataclass(frozen=True)
class AgreeClass:
    """≈_{k,r} class: one count per enumerated cycle class, k standing for "≥k"."""

    k: int
    counts: Tuple[int, ...]

    def __post_init__(self):
        if any(c < 0 or c > self.k for c in self.counts):
            raise ValueError(f"Agreeability counts must lie in 0..{self.k}: {self.counts}")

    @property
    def label(self) -> str:
        parts = [f"{i}:{'≥' if c == self.k else ''}{c}" for i, c in enumerate(self.counts) if c]
        return " ".join(parts) or "none"


def class_prob(table: ProbabilityTable, r: int, cycles: Sequence[CycleClass], O: AgreeClass) -> SymExpr:
    if len(O.counts) != len(cycles):
        raise ValueError(f"Class has {len(O.counts)} counts for {len(cycles)} cycle classes")
    factors = []
    for cycle, count in zip(cycles, O.counts):
        mean = table.gamma(r, cycle)
        factors.append(PoissonTail(mean, O.k) if count == O.k else PoissonPmf(mean, count))
    return product(factors)


def count_classes(k: int, cycles: Sequence[CycleClass]) -> int:
    return (k + 1) ** len(cycles)


def enumerate_classes(k: int, cycles: Sequence[CycleClass], cap: Optional[int] = None) -> List[AgreeClass]:
    cap = config.AGREE_CLASS_CAP if cap is None else cap
    total = count_classes(k, cycles)
    if total > cap:
        raise CapExceeded(f"{total} agreeability classes over {len(cycles)} cycle classes exceed the cap {cap}",
                          details={"classes": total, "cycles": len(cycles), "cap": cap})
    return [AgreeClass(k, counts) for counts in itertools.product(range(k + 1), repeat=len(cycles))]


def agree_class_of(H: Hypergraph, k: int, r: int, registry: TypeRegistry,
                   cycles: Sequence[CycleClass]) -> Tuple[AgreeClass, int]:
    """Class of an r-simple structure and the number of core components outside the enumerated cycles."""
    kernel = core(H, (), r)
    index = {cycle.key: i for i, cycle in enumerate(cycles)}
    counts = [0] * len(cycles)
    unlisted = 0
    for component in kernel.components() if kernel.order else []:
        if component.excess() != 0:
            raise NotSimple(f"Core component with {component.order} vertices has excess {component.excess()}")
        key = classify_cycle_component(component, k, registry)
        if key in index:
            counts[index[key]] += 1
        else:
            unlisted += 1
    return AgreeClass(k, tuple(min(c, k) for c in counts)), unlisted


def planted_cycle(builder: HypergraphBuilder, registry: TypeRegistry, cycle: CycleClass) -> None:
    H, colors = cycle_from_code(registry.vocab, cycle.key)
    mapping = builder.add_structure(H)
    for v, color in colors.items():
        attach_representative(builder, mapping[v], registry.type_by_id(color))


def plant_rich(O: AgreeClass, k: int, r: int, registry: TypeRegistry, cycles: Sequence[CycleClass],
               verify: bool = True) -> Hypergraph:
    builder = HypergraphBuilder(registry.vocab)
    for cycle, count in zip(cycles, O.counts):
        for _ in range(count):
            planted_cycle(builder, registry, cycle)
    for t in registry.types(r):
        rep = registry.representative(t)
        for _ in range(2 * k + 1):
            builder.add_structure(rep.tree)
    H = builder.freeze()
    if verify:
        if not is_rich(H, k, r, registry):
            raise RichnessCheckFailed(f"Plant for class [{O.label}] is not ({k},{r})-rich")
        found, unlisted = agree_class_of(H, k, r, registry, cycles)
        if found != O or unlisted:
            raise RichnessCheckFailed(f"Plant for class [{O.label}] lands in [{found.label}] "
                                      f"with {unlisted} unlisted components")
    return H


def group_cycles(cycles: Sequence[CycleClass], k: int,
                 registry: TypeRegistry) -> Tuple[List[List[int]], List[Hypergraph]]:
    """Partition of cycle classes by Ehr_k-equivalence of their planted components, with one leader each."""
    index: Dict[Hashable, int] = {}
    groups: List[List[int]] = []
    leaders: List[Hypergraph] = []
    for i, cycle in enumerate(cycles):
        builder = HypergraphBuilder(registry.vocab)
        planted_cycle(builder, registry, cycle)
        component = builder.freeze()
        key = rank_type(component, k)
        if key in index:
            groups[index[key]].append(i)
        else:
            index[key] = len(groups)
            groups.append([i])
            leaders.append(component)
    logger.info(f"group_cycles: {len(cycles)} cycle classes fall into {len(groups)} Ehr_{k} groups")
    return groups, leaders


def _extend(vocab: Vocabulary, plant: Hypergraph, leader: Hypergraph, copies: int) -> Hypergraph:
    builder = HypergraphBuilder(vocab)
    builder.add_structure(plant)
    for _ in range(copies):
        builder.add_structure(leader)
    return builder.freeze()


def truth_tensor(vocab: Vocabulary, leaders: Sequence[Hypergraph], k: int,
                 decide: Callable[[Tuple[int, ...]], bool]) -> np.ndarray:
    """Truth of φ for every vector of capped group totals, axis g holding the total of group g.

    Partial unions are merged level by level when their rank-k types agree, so `decide`
    runs once per surviving class; its argument is the representative count vector."""
    states = (k + 1) ** len(leaders)
    if states > config.LIMIT_STATE_CAP:
        raise CapExceeded(f"{states} group states over {len(leaders)} groups exceed LIMIT_STATE_CAP",
                          details={"groups": len(leaders), "states": states, "cap": config.LIMIT_STATE_CAP})
    level: List[Tuple[Tuple[int, ...], Hypergraph]] = [((), Hypergraph.empty(vocab))]
    transitions: List[np.ndarray] = []
    for g, leader in enumerate(leaders):
        index: Dict[Hashable, int] = {}
        following: List[Tuple[Tuple[int, ...], Hypergraph]] = []
        step = np.zeros((len(level), k + 1), dtype=np.int64)
        for i, (counts, plant) in enumerate(level):
            for t in range(k + 1):
                grown = _extend(vocab, plant, leader, t)
                key = rank_type(grown, k)
                if key not in index:
                    index[key] = len(following)
                    following.append((counts + (t,), grown))
                elif grown.order < following[index[key]][1].order:
                    following[index[key]] = (counts + (t,), grown)
                step[i, t] = index[key]
        transitions.append(step)
        level = following
        logger.debug(f"truth_tensor: after group {g} there are {len(level)} rank-{k} classes")
    verdicts = np.array([decide(counts) for counts, _ in level], dtype=bool)
    node = np.array(0, dtype=np.int64)
    for step in transitions:
        node = step[node]
    return verdicts[node]


def _axis_irrelevant(truth: np.ndarray, axis: int) -> bool:
    first = np.take(truth, 0, axis=axis)
    return all(np.array_equal(np.take(truth, i, axis=axis), first) for i in range(1, truth.shape[axis]))


def _merge_axes(truth: np.ndarray, a: int, b: int, k: int) -> Optional[np.ndarray]:
    """Truth over (min(t_a + t_b, k), rest) when it is well defined, else None."""
    moved = np.moveaxis(truth, (a, b), (0, 1))
    slices = []
    for s in range(k + 1):
        pairs = [(x, y) for x in range(k + 1) for y in range(k + 1) if min(x + y, k) == s]
        ref = moved[pairs[0]]
        if any(not np.array_equal(moved[p], ref) for p in pairs[1:]):
            return None
        slices.append(ref)
    return np.moveaxis(np.stack(slices, axis=0), 0, a)


def pool_groups(truth: np.ndarray, k: int) -> Tuple[List[List[int]], np.ndarray]:
    """Greedy coarsening: drops axes φ ignores and pools pairs of axes whose sum capped at k suffices."""
    pools = [[g] for g in range(truth.ndim)]
    changed = True
    while changed:
        changed = False
        for axis in reversed(range(truth.ndim)):
            if _axis_irrelevant(truth, axis):
                truth = np.take(truth, 0, axis=axis)
                del pools[axis]
                changed = True
        for a, b in itertools.combinations(range(truth.ndim), 2):
            merged = _merge_axes(truth, a, b, k)
            if merged is not None:
                truth = merged
                pools[a] = pools[a] + pools[b]
                del pools[b]
                changed = True
                break
    return pools, truth


@dataclass
class LimitResult:
    formula: str
    expression: SymExpr
    k: int
    r: int
    edge_cap: int
    strategy: str
    rows: List[Dict[str, Any]] = field(default_factory=list)


def _pooled_mean(table: ProbabilityTable, r: int, members: Sequence[CycleClass]) -> SymExpr:
    means = [table.gamma(r, c) for c in members]
    return means[0] if len(means) == 1 else GammaSum(means)


def _capped_label(prefix: str, totals: Sequence[int], k: int) -> str:
    return " ".join(f"{prefix}{j}:{'≥' if t == k else ''}{t}" for j, t in enumerate(totals) if t) or "none"


def limit_probability(vocab: Vocabulary, phi: Formula, override_r: Optional[int] = None,
                      cycle_edge_cap: Optional[int] = None, strategy: str = "grouped",
                      verify: bool = True, registry: Optional[TypeRegistry] = None) -> LimitResult:
    """lim Pr(G_n ⊨ φ) as a finite sum of Υ terms over the classes whose rich plant satisfies φ."""
    if strategy not in STRATEGIES:
        raise ValueError(f"Unknown strategy '{strategy}', expected one of {STRATEGIES}")
    if not is_sentence(phi):
        raise ValueError(f"'{to_text(phi)}' has free variables; limits are defined for sentences")
    k = max(1, quantifier_rank(phi))
    r = radius_for(k) if override_r is None else override_r
    edge_cap = default_edge_cap(r) if cycle_edge_cap is None else cycle_edge_cap
    if override_r is not None or cycle_edge_cap is not None:
        logger.warning(f"limit_probability: expert overrides in force (r={r}, cycle edge cap={edge_cap})")
    logger.info(f"limit_probability: φ = {to_text(phi)}, k={k}, r={r}, edge cap={edge_cap}, strategy={strategy}")
    registry = registry or TypeRegistry(vocab, k)
    registry.enumerate(r)
    table = ProbabilityTable(registry)
    cycles = enumerate_cycles(vocab, k, r, registry, edge_cap=edge_cap)
    terms: List[SymExpr] = []
    rows: List[Dict[str, Any]] = []

    if strategy == "classes":
        for i, O in enumerate(enumerate_classes(k, cycles)):
            truth = evaluate(plant_rich(O, k, r, registry, cycles, verify=verify), phi)
            expr = class_prob(table, r, cycles, O)
            rows.append({"class": i, "label": O.label, "truth": truth, "expression": expr})
            if truth:
                terms.append(expr)
    else:
        groups, leaders = group_cycles(cycles, k, registry)

        def decide(totals: Tuple[int, ...]) -> bool:
            counts = [0] * len(cycles)
            for g, t in zip(groups, totals):
                counts[g[0]] = t
            return evaluate(plant_rich(AgreeClass(k, tuple(counts)), k, r, registry, cycles, verify=verify), phi)

        pools, truth = pool_groups(truth_tensor(vocab, leaders, k, decide), k)
        means = [_pooled_mean(table, r, [cycles[i] for g in pool for i in groups[g]]) for pool in pools]
        logger.info(f"limit_probability: {len(groups)} groups pooled into {len(pools)}")
        for i, totals in enumerate(np.ndindex(*truth.shape)):
            expr = product([PoissonTail(m, k) if t == k else PoissonPmf(m, t) for m, t in zip(means, totals)])
            holds = bool(truth[totals])
            rows.append({"class": i, "label": _capped_label("p", totals, k), "truth": holds, "expression": expr})
            if holds:
                terms.append(expr)
    expression = Sum(terms)
    logger.info(f"limit_probability: {sum(1 for row in rows if row['truth'])} of {len(rows)} classes satisfy φ")
    return LimitResult(to_text(phi), expression, k, r, edge_cap, strategy, rows)


def cycle_mass_check(table: ProbabilityTable, r: int, cycles: Sequence[CycleClass]) -> Dict[CycleKey, SymExpr]:
    """Σ over colorings of γ, per underlying shape."""
    by_shape: Dict[CycleKey, List[CycleClass]] = {}
    for cycle in cycles:
        by_shape.setdefault(cycle.shape.key, []).append(cycle)
    return {key: _pooled_mean(table, r, members) for key, members in by_shape.items()}


def _generate_limit_error(error: SparseLimitError, formula: str) -> Dict[str, Any]:
    logger.error(f"Limit computation for '{formula}' failed: {error.code}: {error.message}")
    return error.to_result()


def _compute_table(vocab_name: str, formula: str, override_r: Optional[int], edge_cap: Optional[int],
                   strategy: str, grid: str, verify: bool) -> Dict[str, Any]:
    vocab = load_vocabulary(vocab_name)
    phi = parse(formula, vocab)
    result = limit_probability(vocab, phi, override_r, edge_cap, strategy, verify=verify)
    points = parse_beta_grid(grid, vocab.names)
    rows = []
    for row in result.rows:
        values = grid_eval(row["expression"], points) if row["truth"] else [0.0] * len(points)
        rows.append({"class": row["class"], "label": row["label"], "truth": row["truth"],
                     "expression": row["expression"].sexpr(), "values": values})
    return {
        "status": "success",
        "formula": result.formula,
        "k": result.k,
        "r": result.r,
        "edge_cap": result.edge_cap,
        "strategy": result.strategy,
        "grid": points,
        "expression": result.expression.sexpr(),
        "values": grid_eval(result.expression, points),
        "rows": rows,
    }


@cached(ttl=config.CACHE_TTL_LIMITS,
        key_builder=lambda f, vocab_name, formula, **kwargs: (
            f"limit:{vocab_name}:{formula}:{kwargs.get('override_r')}:{kwargs.get('edge_cap')}:"
            f"{kwargs.get('strategy', 'grouped')}:{kwargs.get('grid', '1')}:{kwargs.get('verify', True)}"),
        namespace="limits_service")
async def get_limit_table(vocab_name: str, formula: str, *, override_r: Optional[int] = None,
                          edge_cap: Optional[int] = None, strategy: str = "grouped", grid: str = "1",
                          verify: bool = True) -> Dict[str, Any]:
    logger.info(f"Requesting limit table for '{formula}' over {vocab_name} (grid {grid})")
    loop = asyncio.get_running_loop()
    try:
        return await loop.run_in_executor(None, _compute_table, vocab_name, formula, override_r, edge_cap,
                                          strategy, grid, verify)
    except SparseLimitError as e:
        return _generate_limit_error(e, formula)
