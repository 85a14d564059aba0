# src/modules/montecarlo/service.py

import asyncio
import logging
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from typing import Any, Dict, List, Literal, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field
from src import config
from src.modules.fo.parser import parse
from src.modules.fo.service import evaluate
from src.modules.limits.cycles import classify_cycle_component, enumerate_cycles, enumerate_shapes, shape_of_component
from src.modules.limits.expressions import SymExpr, eval_expr
from src.modules.limits.service import ProbabilityTable, limit_probability
from src.modules.sampler.service import SampleConfig, expected_edge_count, sample
from src.modules.structure.richness import is_rich
from src.modules.structure.service import Hypergraph, core, hanging_tree, is_r_simple
from src.modules.tree_types.service import TypeRegistry, describe, type_of
from src.modules.vocabulary.presets import load_vocabulary
from src.modules.vocabulary.service import DensityMap, Vocabulary
from src.utils.errors import CapExceeded, NonPositiveBeta, NotSimple, SparseLimitError

from .stats import (check_monotone, mean_stderr, poisson_gof, poisson_pmf_table, proportion_stderr, tolerance,
                    total_variation, wilson_interval)

logger = logging.getLogger(__name__)

Statistic = Literal["tree-type-dist", "cycle-counts", "simple-fraction", "rich-fraction", "degree-dist",
                    "edge-count", "sentence"]
STATISTICS = ("tree-type-dist", "cycle-counts", "simple-fraction", "rich-fraction", "degree-dist",
              "edge-count", "sentence")


class McConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    vocabulary: str
    densities: Dict[str, float]
    n: int = Field(ge=1)
    samples: int = Field(ge=1)
    seed: int = Field(ge=0)
    statistic: Statistic
    k: int = Field(default=1, ge=1)
    r: int = Field(default=1, ge=0)
    formula: Optional[str] = None
    override_r: Optional[int] = Field(default=None, ge=0)
    cycle_edge_cap: Optional[int] = Field(default=None, ge=1)
    workers: int = Field(default=1, ge=1)
    chunk_size: int = Field(default=config.MC_CHUNK_SIZE, ge=1)

    def sample_config(self) -> SampleConfig:
        return SampleConfig(vocabulary=self.vocabulary, n=self.n, densities=self.densities, seed=self.seed)


class McRow(BaseModel):
    statistic: str
    item: str
    n: int
    beta: str
    estimate: float
    stderr: float
    prediction: Optional[float] = None
    passed: Optional[bool] = Field(default=None, serialization_alias="pass")


class McReport(BaseModel):
    config: McConfig
    rows: List[McRow]
    extra: Dict[str, Any] = Field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(row.passed is not False for row in self.rows)


def _predict(expr: SymExpr, cfg: McConfig) -> Optional[float]:
    try:
        return eval_expr(expr, cfg.densities)
    except NonPositiveBeta:
        return None


def _beta_text(cfg: McConfig) -> str:
    return ",".join(f"{name}={value:g}" for name, value in cfg.densities.items())


def _registry(vocab: Vocabulary, k: int, r: int) -> TypeRegistry:
    registry = TypeRegistry(vocab, k)
    registry.enumerate(r)
    return registry


# --- per-sample measurements (run inside worker processes) ---

def _root_tree_type(H: Hypergraph, k: int, r: int):
    """Type of the tree hanging at vertex 0 in Core(H, (0); r).

    Saturated pieces that reach the core component of 0 lie within 4r+2 of it, so the search stays in that ball.
    """
    ball = H.induced(H.neighborhood([0], 4 * r + 2))
    return type_of(hanging_tree(ball, (0,), 0, r), k)


def _cycle_histogram(H: Hypergraph, k: int, r: int, registry: TypeRegistry) -> Tuple[Counter, Counter, int]:
    """Per-sample counts of core components by colored class and by underlying shape, plus dense ones."""
    classes: Counter = Counter()
    shapes: Counter = Counter()
    dense = 0
    kernel = core(H, (), r)
    for component in kernel.components() if kernel.order else []:
        try:
            classes[classify_cycle_component(component, k, registry)] += 1
        except NotSimple:
            dense += 1
            continue
        shapes[shape_of_component(component)] += 1
    return classes, shapes, dense


def _empty_result() -> Dict[str, Any]:
    return {"count": 0, "hist": Counter(), "sum": 0.0, "sum_sq": 0.0, "classes": {}, "shapes": {}, "dense": 0}


def run_chunk(cfg_data: Dict[str, Any], indices: List[int]) -> Dict[str, Any]:
    """Measures samples `indices`; the result holds only sums and counts."""
    cfg = McConfig.model_validate(cfg_data)
    vocab = load_vocabulary(cfg.vocabulary)
    sample_cfg = cfg.sample_config()
    registry = None
    if cfg.statistic in ("cycle-counts", "rich-fraction"):
        registry = _registry(vocab, cfg.k, cfg.r)
    phi = parse(cfg.formula, vocab) if cfg.statistic == "sentence" else None
    result = _empty_result()
    for i in indices:
        H = sample(vocab, sample_cfg, index=i)
        result["count"] += 1
        if cfg.statistic == "tree-type-dist":
            result["hist"][_root_tree_type(H, cfg.k, cfg.r).key] += 1
        elif cfg.statistic == "degree-dist":
            result["hist"][H.root_degree(0)] += 1
        elif cfg.statistic == "edge-count":
            m = H.num_edges
            result["sum"] += m
            result["sum_sq"] += m * m
        elif cfg.statistic == "simple-fraction":
            result["hist"][int(is_r_simple(H, cfg.r))] += 1
        elif cfg.statistic == "rich-fraction":
            result["hist"][int(is_rich(H, cfg.k, cfg.r, registry))] += 1
        elif cfg.statistic == "sentence":
            result["hist"][int(evaluate(H, phi))] += 1
        elif cfg.statistic == "cycle-counts":
            classes, shapes, dense = _cycle_histogram(H, cfg.k, cfg.r, registry)
            for key, c in classes.items():
                result["classes"].setdefault(key, Counter())[c] += 1
            for key, c in shapes.items():
                result["shapes"].setdefault(key, Counter())[c] += 1
            result["dense"] += dense
    return result


def _merge(parts: List[Dict[str, Any]]) -> Dict[str, Any]:
    total = _empty_result()
    for part in parts:
        total["count"] += part["count"]
        total["hist"].update(part["hist"])
        total["sum"] += part["sum"]
        total["sum_sq"] += part["sum_sq"]
        total["dense"] += part["dense"]
        for field_name in ("classes", "shapes"):
            for key, hist in part[field_name].items():
                total[field_name].setdefault(key, Counter()).update(hist)
    return total


async def collect(cfg: McConfig) -> Dict[str, Any]:
    """Runs every chunk, in a process pool when cfg.workers > 1. The reduction does not depend on order."""
    chunks = [list(range(start, min(start + cfg.chunk_size, cfg.samples)))
              for start in range(0, cfg.samples, cfg.chunk_size)]
    payload = cfg.model_dump()
    loop = asyncio.get_running_loop()
    logger.info(f"Monte Carlo '{cfg.statistic}': {cfg.samples} samples at n={cfg.n} in {len(chunks)} chunks, "
                f"{cfg.workers} workers")
    if cfg.workers == 1:
        parts = [await loop.run_in_executor(None, run_chunk, payload, chunk) for chunk in chunks]
    else:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            parts = await asyncio.gather(*(loop.run_in_executor(pool, run_chunk, payload, chunk) for chunk in chunks))
    return _merge(list(parts))


# --- reports ---

def _row(cfg: McConfig, item: str, estimate: float, stderr: float, prediction: Optional[float],
         scale: float = 1.0) -> McRow:
    passed = None
    if prediction is not None and np.isfinite(stderr):
        passed = bool(abs(estimate - prediction) <= tolerance(stderr, scale))
    return McRow(statistic=cfg.statistic, item=item, n=cfg.n, beta=_beta_text(cfg), estimate=estimate,
                 stderr=stderr, prediction=prediction, passed=passed)


def _proportion_rows(cfg: McConfig, hist: Counter, count: int, prediction: Optional[float],
                     item: str) -> Tuple[List[McRow], Dict[str, Any]]:
    hits = hist.get(1, 0)
    estimate = hits / count
    low, high = wilson_interval(hits, count)
    return [_row(cfg, item, estimate, proportion_stderr(hits, count), prediction)], {"wilson": [low, high]}


def report_tree_types(cfg: McConfig, vocab: Vocabulary, data: Dict[str, Any]) -> McReport:
    count = data["count"]
    registry = TypeRegistry(vocab, cfg.k)
    table = None
    try:
        registry.enumerate(cfg.r)
        table = ProbabilityTable(registry)
    except CapExceeded as e:
        logger.warning(f"Tree types of radius {cfg.r} not enumerable ({e.message}); reporting without predictions")
    known = {t.key: t for t in registry.types(cfg.r)} if table else {}
    rows = []
    seen = set(data["hist"]) | set(known)
    for key in sorted(seen, key=repr):
        hits = data["hist"].get(key, 0)
        t = known.get(key)
        prediction = _predict(table.tree_type_prob(cfg.r, t), cfg) if t is not None else None
        label = f"#{registry.id_of(t)} {describe(t, registry)}" if t is not None else f"unlisted {key!r}"
        rows.append(_row(cfg, label, hits / count, proportion_stderr(hits, count), prediction))
    return McReport(config=cfg, rows=rows)


def report_degrees(cfg: McConfig, vocab: Vocabulary, data: Dict[str, Any]) -> McReport:
    count = data["count"]
    lam = sum(cfg.densities[rel.name] * rel.arity * float(rel.full_constant) for rel in vocab.relations)
    top = max(data["hist"]) + 1 if data["hist"] else 1
    predicted = dict(enumerate(poisson_pmf_table(lam, top + 1).tolist()))
    empirical = {d: c / count for d, c in data["hist"].items()}
    rows = [_row(cfg, f"degree={d}", empirical.get(d, 0.0), proportion_stderr(data["hist"].get(d, 0), count),
                 predicted[d]) for d in range(top)]
    tv = total_variation(empirical, predicted)
    rows.append(McRow(statistic=cfg.statistic, item="total-variation", n=cfg.n, beta=_beta_text(cfg),
                      estimate=tv, stderr=float("nan"), prediction=0.0, passed=bool(tv <= config.MC_TOLERANCE_FLOOR)))
    return McReport(config=cfg, rows=rows, extra={"poisson_mean": lam})


def report_edges(cfg: McConfig, vocab: Vocabulary, data: Dict[str, Any]) -> McReport:
    mean, var, stderr = mean_stderr(data["sum"], data["sum_sq"], data["count"])
    expected = expected_edge_count(vocab, DensityMap.from_mapping(vocab, cfg.densities), cfg.n)
    return McReport(config=cfg, rows=[_row(cfg, "edges", mean, stderr, expected, scale=max(expected, 1.0))],
                    extra={"variance": var})


def _count_rows(cfg: McConfig, label: str, hist: Counter, count: int,
                prediction: Optional[float], extra: Dict[str, Any]) -> McRow:
    full = Counter(hist)
    full[0] += count - sum(hist.values())
    total = sum(c * m for c, m in full.items())
    total_sq = sum(c * c * m for c, m in full.items())
    mean, var, stderr = mean_stderr(total, total_sq, count)
    if mean > 0:
        extra["dispersion"][label] = var / mean
    if prediction:
        extra["gof_pvalue"][label] = poisson_gof(dict(full), prediction)
    return _row(cfg, label, mean, stderr, prediction, scale=max(prediction or 0.0, 1e-12))


def report_cycles(cfg: McConfig, vocab: Vocabulary, data: Dict[str, Any]) -> McReport:
    count = data["count"]
    registry = _registry(vocab, cfg.k, cfg.r)
    table = ProbabilityTable(registry)
    cycles = {c.key: c for c in enumerate_cycles(vocab, cfg.k, cfg.r, registry, edge_cap=cfg.cycle_edge_cap)}
    extra: Dict[str, Any] = {"dispersion": {}, "gof_pvalue": {}}
    rows = []
    for shape in enumerate_shapes(vocab, cfg.r, cfg.cycle_edge_cap):
        prediction = float(np.prod([cfg.densities[name] ** a for name, a in shape.edge_counts])) / shape.aut
        rows.append(_count_rows(cfg, f"shape L{shape.length} aut={shape.aut}",
                                data["shapes"].get(shape.key, Counter()), count, prediction, extra))
    for key, hist in sorted(data["classes"].items(), key=lambda kv: repr(kv[0])):
        cycle = cycles.get(key)
        prediction = _predict(table.gamma(cfg.r, cycle), cfg) if cycle is not None else None
        label = cycle.label if cycle is not None else f"unlisted L{key[0]}"
        rows.append(_count_rows(cfg, label, hist, count, prediction, extra))
    extra["dense_components"] = data["dense"]
    return McReport(config=cfg, rows=rows, extra=extra)


def report_proportion(cfg: McConfig, vocab: Vocabulary, data: Dict[str, Any]) -> McReport:
    prediction = None
    item = cfg.statistic
    if cfg.statistic == "sentence":
        item = cfg.formula
        try:
            result = limit_probability(vocab, parse(cfg.formula, vocab), cfg.override_r, cfg.cycle_edge_cap)
            prediction = _predict(result.expression, cfg)
        except SparseLimitError as e:
            logger.warning(f"No symbolic prediction for '{cfg.formula}': {e.code}: {e.message}")
    rows, extra = _proportion_rows(cfg, data["hist"], data["count"], prediction, item)
    return McReport(config=cfg, rows=rows, extra=extra)


_REPORTS = {
    "tree-type-dist": report_tree_types,
    "degree-dist": report_degrees,
    "edge-count": report_edges,
    "cycle-counts": report_cycles,
    "simple-fraction": report_proportion,
    "rich-fraction": report_proportion,
    "sentence": report_proportion,
}


async def run_monte_carlo(cfg: McConfig) -> McReport:
    vocab = load_vocabulary(cfg.vocabulary)
    if cfg.statistic == "sentence" and not cfg.formula:
        raise ValueError("The sentence statistic needs a formula")
    if cfg.statistic == "cycle-counts":
        _registry(vocab, cfg.k, cfg.r)
    data = await collect(cfg)
    report = _REPORTS[cfg.statistic](cfg, vocab, data)
    failed = [row.item for row in report.rows if row.passed is False]
    if failed:
        logger.warning(f"Monte Carlo '{cfg.statistic}': {len(failed)} rows outside tolerance: {failed[:5]}")
    else:
        logger.info(f"Monte Carlo '{cfg.statistic}': {len(report.rows)} rows within tolerance")
    return report


async def simple_fraction_scan(cfg: McConfig, ns: List[int]) -> List[McReport]:
    """simple-fraction over an n-grid with the soft monotonicity check."""
    reports = [await run_monte_carlo(cfg.model_copy(update={"n": n, "statistic": "simple-fraction"})) for n in ns]
    check_monotone([(rep.config.n, rep.rows[0].estimate, rep.rows[0].stderr) for rep in reports])
    return reports
