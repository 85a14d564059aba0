# src/modules/cnf/experiments.py

import asyncio
import logging
from concurrent.futures import ProcessPoolExecutor
from typing import Any, Dict, List, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator

from src import config
from src.modules.fo.parser import parse
from src.modules.fo.service import evaluate, is_sentence
from src.modules.montecarlo.stats import check_monotone, proportion_stderr, wilson_interval

from .dpll import Outcome, dpll_sat
from .service import certificate_text, cnf_vocabulary, lint_certificate, sample_cnf, to_structure

logger = logging.getLogger(__name__)


class ScanConfig(BaseModel):
    """One grid of F(l, n, β) cells. With `formula` set the scan measures Pr(F ⊨ formula) instead of Pr(sat)."""

    model_config = ConfigDict(frozen=True)

    l: int = Field(ge=2)
    betas: List[float]
    ns: List[int]
    samples: int = Field(ge=1)
    seed: int = Field(ge=0)
    formula: Optional[str] = None
    check_dpll: bool = False
    max_decisions: Optional[int] = Field(default=None, ge=1)
    workers: int = Field(default=1, ge=1)
    chunk_size: int = Field(default=config.MC_CHUNK_SIZE, ge=1)

    @field_validator("betas")
    @classmethod
    def _check_betas(cls, betas: List[float]) -> List[float]:
        bad = [b for b in betas if not np.isfinite(b) or b < 0]
        if bad:
            raise ValueError(f"Densities must be finite and non-negative, got {bad}")
        return betas

    @field_validator("ns")
    @classmethod
    def _check_ns(cls, ns: List[int]) -> List[int]:
        if any(n < 1 for n in ns):
            raise ValueError(f"Sizes must be positive, got {ns}")
        return ns


class ScanRow(BaseModel):
    l: int
    beta: float
    n: int
    samples: int
    estimate: float
    stderr: float
    ci_low: float
    ci_high: float
    indeterminate: int = 0
    dpll_unsat: Optional[float] = None

    def record(self, kind: str) -> Dict[str, Any]:
        out = {"l": self.l, "beta": self.beta, "n": self.n, "samples": self.samples,
               f"p_{kind}": self.estimate, "stderr": self.stderr, "ci_low": self.ci_low, "ci_high": self.ci_high,
               "indeterminate": self.indeterminate}
        if self.dpll_unsat is not None:
            out["dpll_unsat"] = self.dpll_unsat
        return out


def cell_seed(seed: int, beta: float, n: int) -> int:
    """Sub-seed of one (β, n) cell; independent of grid order and of the worker count."""
    if not np.isfinite(beta) or beta < 0:
        raise ValueError(f"Cell density must be finite and non-negative, got {beta}")
    key = (int(round(beta * 1_000_000)), n)
    return int(np.random.SeedSequence(seed, spawn_key=key).generate_state(1)[0])


def run_cell_chunk(payload: Dict[str, Any], beta: float, n: int, indices: List[int]) -> Dict[str, int]:
    cfg = ScanConfig(**payload)
    seed = cell_seed(cfg.seed, beta, n)
    phi = parse(cfg.formula, cnf_vocabulary(cfg.l)) if cfg.formula else None
    counts = {"count": 0, "hits": 0, "indeterminate": 0, "dpll_unsat": 0}
    for i in indices:
        F = sample_cnf(cfg.l, n, beta=beta, seed=seed, index=i)
        counts["count"] += 1
        if phi is None or cfg.check_dpll:
            outcome = dpll_sat(F, cfg.max_decisions).outcome
            if outcome is Outcome.INDETERMINATE:
                counts["indeterminate"] += 1
            elif outcome is Outcome.UNSAT:
                counts["dpll_unsat"] += 1
            elif phi is None:
                counts["hits"] += 1
        if phi is not None and evaluate(to_structure(F), phi):
            counts["hits"] += 1
    return counts


async def _run_cell(cfg: ScanConfig, beta: float, n: int, pool: Optional[ProcessPoolExecutor]) -> ScanRow:
    loop = asyncio.get_running_loop()
    payload = cfg.model_dump()
    chunks = [list(range(s, min(s + cfg.chunk_size, cfg.samples))) for s in range(0, cfg.samples, cfg.chunk_size)]
    parts = await asyncio.gather(*(loop.run_in_executor(pool, run_cell_chunk, payload, beta, n, c) for c in chunks))
    total = {key: sum(p[key] for p in parts) for key in parts[0]}
    decided = total["count"] - total["indeterminate"] if cfg.formula is None else total["count"]
    if decided == 0:
        logger.warning(f"Cell beta={beta} n={n}: every instance hit DPLL_MAX_DECISIONS")
        estimate = stderr = low = high = float("nan")
    else:
        estimate = total["hits"] / decided
        stderr = proportion_stderr(total["hits"], decided)
        low, high = wilson_interval(total["hits"], decided)
    if total["indeterminate"]:
        logger.warning(f"Cell beta={beta} n={n}: {total['indeterminate']} indeterminate instances excluded")
    dpll_unsat = total["dpll_unsat"] / total["count"] if cfg.formula is not None and cfg.check_dpll else None
    logger.info(f"Cell l={cfg.l} beta={beta} n={n}: estimate={estimate:.4f} ± {stderr:.4f}")
    return ScanRow(l=cfg.l, beta=beta, n=n, samples=total["count"], estimate=estimate, stderr=stderr,
                   ci_low=low, ci_high=high, indeterminate=total["indeterminate"], dpll_unsat=dpll_unsat)


async def _scan(cfg: ScanConfig) -> List[ScanRow]:
    cells = [(beta, n) for beta in cfg.betas for n in cfg.ns]
    logger.info(f"Scan l={cfg.l}: {len(cells)} cells x {cfg.samples} samples, {cfg.workers} workers")
    if cfg.workers == 1:
        return [await _run_cell(cfg, beta, n, None) for beta, n in cells]
    with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
        return list(await asyncio.gather(*(_run_cell(cfg, beta, n, pool) for beta, n in cells)))


async def sat_scan(cfg: ScanConfig) -> List[ScanRow]:
    """Empirical Pr(F(l, n, β) satisfiable) per cell; Pr(sat) should not increase in β."""
    rows = await _scan(cfg.model_copy(update={"formula": None, "check_dpll": False}))
    for n in cfg.ns:
        check_monotone([(r.beta, r.estimate, r.stderr) for r in rows if r.n == n and r.samples], label="beta",
                       decreasing=True)
    return rows


async def certificate_scan(cfg: ScanConfig) -> List[ScanRow]:
    """Empirical Pr(F(l, n, β) ⊨ φ); φ defaults to the built-in certificate for cfg.l."""
    text = cfg.formula or certificate_text(cfg.l)
    phi = parse(text, cnf_vocabulary(cfg.l))
    if not is_sentence(phi):
        raise ValueError("Certificate must be a sentence (no free variables)")
    lint_certificate(phi, cfg.l)
    return await _scan(cfg.model_copy(update={"formula": text}))
