# tests/test_acceptance.py
# Desk-scale runs; pytest --run-acceptance

import itertools
import math

import numpy as np
import pytest

from src import config
from src.modules.cnf.dpll import dpll_sat
from src.modules.cnf.experiments import ScanConfig, certificate_scan, sat_scan
from src.modules.cnf.service import CnfFormula
from src.modules.fo.games import Winner, ef_winner
from src.modules.fo.parser import parse
from src.modules.fo.service import evaluate, quantifier_rank
from src.modules.montecarlo.service import McConfig, run_monte_carlo
from src.modules.structure.service import Hypergraph, RootedTree
from src.modules.tree_types.service import type_of
from src.modules.vocabulary.presets import preset

pytestmark = [pytest.mark.acceptance, pytest.mark.asyncio]

WORKERS = max(1, config.WORKERS)
MUTUAL = "exists x. exists y. (E(x,y) and E(y,x))"
BATTERY = [
    "exists x. x = x",
    "exists x. exists y. E(x,y)",
    "forall x. exists y. E(x,y)",
    "exists x. forall y. (x = y or E(x,y))",
    "exists x. exists y. exists z. (E(x,y) and E(y,z) and x != z)",
    "exists x. exists y. exists z. (E(x,y) and E(x,z) and y != z)",
]


def graph_mc(statistic, beta, n, samples, **extra):
    return McConfig(vocabulary="graph", densities={"E": beta}, n=n, samples=samples, seed=2024,
                    statistic=statistic, workers=WORKERS, **extra)


async def test_degree_law():
    report = await run_monte_carlo(graph_mc("degree-dist", 1.5, 50_000, 10_000))
    total_variation = report.rows[-1]
    assert total_variation.estimate < 0.02


@pytest.mark.parametrize("beta", [0.5, 1.0, 2.0])
async def test_leaf_type_frequency(beta):
    report = await run_monte_carlo(graph_mc("tree-type-dist", beta, 50_000, 10_000, k=1, r=1))
    leaf = next(row for row in report.rows if "leaf" in row.item)
    assert leaf.prediction == pytest.approx(math.exp(-beta), abs=1e-12)
    assert abs(leaf.estimate - leaf.prediction) < 0.015


async def test_triangle_counts_are_poisson():
    report = await run_monte_carlo(graph_mc("cycle-counts", 1.0, 30_000, 20_000, k=1, r=0))
    triangles = next(row for row in report.rows if row.item.startswith("shape L3"))
    assert triangles.estimate == pytest.approx(1 / 6, rel=0.1)
    assert 0.9 <= report.extra["dispersion"][triangles.item] <= 1.1


async def test_most_samples_are_simple():
    report = await run_monte_carlo(graph_mc("simple-fraction", 1.0, 100_000, 400, r=1))
    assert report.rows[0].estimate >= 0.99


async def test_mutual_edge_end_to_end():
    cfg = McConfig(vocabulary="digraph", densities={"E": 1.0}, n=20_000, samples=4000, seed=7,
                   statistic="sentence", formula=MUTUAL, override_r=1, cycle_edge_cap=2,
                   workers=WORKERS)
    report = await run_monte_carlo(cfg)
    row = report.rows[0]
    assert row.prediction == pytest.approx(1 - math.exp(-0.5), abs=1e-6)
    assert abs(row.estimate - row.prediction) < 0.02


async def test_sat_phase_transition():
    betas = [0.5 * i for i in range(1, 13)]
    rows = await sat_scan(ScanConfig(l=3, betas=betas, ns=[200], samples=400, seed=3, workers=WORKERS))
    estimates = [row.estimate for row in rows]
    assert estimates[0] > 0.95
    assert estimates[-1] < 0.05
    crossing = next(beta for beta, p in zip(betas, estimates) if p < 0.5)
    assert 2.5 <= crossing <= 4.0


async def test_certificate_is_absent_while_unsat():
    rows = await certificate_scan(ScanConfig(l=3, betas=[5.0], ns=[100], samples=1000, seed=5,
                                             check_dpll=True, workers=WORKERS))
    assert rows[0].estimate == 0.0
    assert rows[0].dpll_unsat > 0.9


def random_tree(rng, size):
    edges = [("E", (int(rng.integers(0, v)), v)) for v in range(1, size)]
    return Hypergraph.from_edges(preset("graph"), edges, vertices=[0])


async def test_tree_types_imply_game_equivalence():
    rng = np.random.default_rng(12)
    battery = [parse(text) for text in BATTERY]
    violations = []
    for trial in range(200):
        k = int(rng.integers(1, 4))
        A = random_tree(rng, int(rng.integers(1, 13)))
        B = random_tree(rng, int(rng.integers(1, 13)))
        if type_of(RootedTree(A, 0), k) == type_of(RootedTree(B, 0), k):
            if ef_winner(A, (0,), B, (0,), k, distance=True) is not Winner.DUPLICATOR:
                violations.append((trial, k))
        if ef_winner(A, (), B, (), k) is Winner.DUPLICATOR:
            for phi in battery:
                if quantifier_rank(phi) <= k and evaluate(A, phi) != evaluate(B, phi):
                    violations.append((trial, k))
    assert violations == []


async def test_dpll_matches_truth_tables():
    rng = np.random.default_rng(99)
    for _ in range(500):
        n = int(rng.integers(3, 13))
        l = int(rng.integers(2, 4))
        clauses = set()
        for _ in range(int(rng.integers(1, 5 * n))):
            variables = rng.choice(np.arange(1, n + 1), size=l, replace=False)
            clauses.add(frozenset(int(v) * int(s) for v, s in zip(variables, rng.choice([-1, 1], size=l))))
        F = CnfFormula(n, l, frozenset(clauses))
        brute = any(F.satisfied_by(dict(zip(range(1, n + 1), bits)))
                    for bits in itertools.product((False, True), repeat=n))
        assert dpll_sat(F).satisfiable == brute
