# tests/test_montecarlo.py

import math

import pytest
from pydantic import ValidationError

from src.modules.montecarlo.service import McConfig, _root_tree_type, run_chunk, run_monte_carlo, simple_fraction_scan
from src.modules.montecarlo.stats import (
    check_monotone, mean_stderr, poisson_gof, poisson_pmf_table, proportion_stderr, tolerance, total_variation,
    wilson_interval,
)
from src.modules.structure.service import RootedTree
from src.modules.tree_types.service import type_of


def mc(statistic, **overrides):
    fields = dict(vocabulary="graph", densities={"E": 1.0}, n=60, samples=40, seed=11, statistic=statistic)
    fields.update(overrides)
    return McConfig(**fields)


def test_tolerance_has_a_floor():
    assert tolerance(0.0) == pytest.approx(0.02)
    assert tolerance(0.1) == pytest.approx(0.4)
    assert tolerance(0.0, scale=50.0) == pytest.approx(1.0)


def test_proportion_helpers():
    assert math.isnan(proportion_stderr(0, 0))
    assert proportion_stderr(50, 100) == pytest.approx(0.05)
    low, high = wilson_interval(30, 100)
    assert low < 0.3 < high


def test_mean_stderr_from_sums():
    # 1, 2, 3
    mean, var, stderr = mean_stderr(6.0, 14.0, 3)
    assert mean == pytest.approx(2.0)
    assert var == pytest.approx(1.0)
    assert stderr == pytest.approx(math.sqrt(1 / 3))
    assert all(math.isnan(x) for x in mean_stderr(0.0, 0.0, 0))


def test_poisson_table_and_gof():
    table = poisson_pmf_table(1.5, 6)
    assert table.sum() == pytest.approx(1.0)
    assert table[0] == pytest.approx(math.exp(-1.5))
    exact = {i: round(10000 * p) for i, p in enumerate(poisson_pmf_table(2.0, 9))}
    assert poisson_gof(exact, 2.0) > 0.9
    skewed = {0: 5000, 8: 5000}
    assert poisson_gof(skewed, 2.0) < 1e-6
    assert poisson_gof({}, 2.0) is None


def test_total_variation():
    assert total_variation({0: 0.5, 1: 0.5}, {0: 0.5, 1: 0.5}) == 0.0
    assert total_variation({0: 1.0}, {1: 1.0}) == pytest.approx(1.0)


def test_check_monotone_only_flags_clear_drops():
    assert check_monotone([(10, 0.5, 0.01), (20, 0.6, 0.01), (40, 0.59, 0.01)])
    assert not check_monotone([(10, 0.9, 0.01), (20, 0.5, 0.01)])
    assert check_monotone([(1.0, 0.9, 0.01), (2.0, 0.5, 0.01)], label="beta", decreasing=True)


def test_config_validation():
    with pytest.raises(ValidationError):
        mc("edge-count", samples=0)
    with pytest.raises(ValidationError):
        mc("clustering")


def test_chunks_are_deterministic():
    payload = mc("edge-count").model_dump()
    first = run_chunk(payload, [0, 1, 2, 3])
    again = run_chunk(payload, [0, 1, 2, 3])
    split = [run_chunk(payload, [0, 1]), run_chunk(payload, [2, 3])]
    assert first["sum"] == again["sum"] == sum(part["sum"] for part in split)
    assert first["count"] == 4


@pytest.mark.asyncio
async def test_edge_count_matches_expectation():
    report = await run_monte_carlo(mc("edge-count", n=50, samples=200))
    row = report.rows[0]
    assert row.prediction == pytest.approx(24.5)
    assert row.passed
    assert report.passed
    assert "variance" in report.extra


@pytest.mark.asyncio
async def test_degree_distribution():
    report = await run_monte_carlo(mc("degree-dist", n=200, samples=60))
    assert report.extra["poisson_mean"] == pytest.approx(1.0)
    degree_rows = [row for row in report.rows if row.item.startswith("degree=")]
    assert sum(row.estimate for row in degree_rows) == pytest.approx(1.0)
    assert degree_rows[0].prediction == pytest.approx(math.exp(-1.0))
    assert report.rows[-1].item == "total-variation"


@pytest.mark.asyncio
async def test_tree_type_distribution_has_predictions():
    report = await run_monte_carlo(mc("tree-type-dist", n=200, samples=80, k=1, r=1))
    assert len(report.rows) == 2
    assert sum(row.estimate for row in report.rows) == pytest.approx(1.0)
    assert all(row.prediction is not None for row in report.rows)
    assert sum(row.prediction for row in report.rows) == pytest.approx(1.0)


@pytest.mark.asyncio
async def test_cycle_counts_list_every_shape():
    report = await run_monte_carlo(mc("cycle-counts", n=100, samples=30, k=1, r=1, cycle_edge_cap=4))
    shapes = [row for row in report.rows if row.item.startswith("shape")]
    assert [row.item for row in shapes] == ["shape L3 aut=6", "shape L4 aut=8"]
    assert shapes[0].prediction == pytest.approx(1 / 6)
    assert shapes[1].prediction == pytest.approx(1 / 8)
    assert "dense_components" in report.extra


@pytest.mark.asyncio
async def test_sentence_statistic_uses_the_limit():
    cfg = mc("sentence", vocabulary="digraph-loops", n=200, samples=300, formula="exists x. E(x,x)", override_r=0)
    report = await run_monte_carlo(cfg)
    row = report.rows[0]
    assert row.item == "exists x. E(x,x)"
    assert row.prediction == pytest.approx(1 - math.exp(-1.0))
    assert row.passed
    low, high = report.extra["wilson"]
    assert low <= row.estimate <= high


@pytest.mark.asyncio
async def test_sentence_statistic_needs_formula():
    with pytest.raises(ValueError):
        await run_monte_carlo(mc("sentence"))


@pytest.mark.asyncio
async def test_simple_fraction_scan():
    reports = await simple_fraction_scan(mc("simple-fraction", samples=20, r=1), [40, 80])
    assert [rep.config.n for rep in reports] == [40, 80]
    for rep in reports:
        assert rep.config.statistic == "simple-fraction"
        assert 0.0 <= rep.rows[0].estimate <= 1.0


def test_root_tree_type_looks_away_from_nearby_cycles(make_graph):
    # 0 hangs off the triangle 1-2-3 and carries the leaf 4
    H = make_graph([(0, 1), (1, 2), (2, 3), (1, 3), (0, 4)])
    one_child = type_of(RootedTree(make_graph([(0, 4)]), 0), 1)
    assert _root_tree_type(H, 1, 1) == one_child
    star = make_graph([(0, 1), (0, 4)])
    assert _root_tree_type(star, 1, 1) == type_of(RootedTree(star, 0), 1)
