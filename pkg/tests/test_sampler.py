# tests/test_sampler.py

import numpy as np
import pytest
from scipy import stats

from src.modules.sampler.service import SampleConfig, expected_edge_count, local_orbits, pattern_counts, sample
from src.modules.vocabulary.presets import preset
from src.modules.vocabulary.service import DensityMap, canonical_edge
from src.utils.errors import Overflow


def draw(name, n, value, seed=1, index=0, regime="beta"):
    vocab = preset(name)
    cfg = SampleConfig(vocabulary=name, n=n, densities={r: value for r in vocab.names}, seed=seed, regime=regime)
    return sample(vocab, cfg, index=index)


def test_same_seed_and_index_is_reproducible():
    assert draw("graph", 200, 1.0, seed=5, index=3) == draw("graph", 200, 1.0, seed=5, index=3)
    assert draw("graph", 200, 1.0, seed=5, index=3) != draw("graph", 200, 1.0, seed=5, index=4)


def test_zero_density_gives_empty_structure():
    H = draw("cnf3", 30, 0.0)
    assert H.order == 30
    assert H.num_edges == 0


def test_probability_one_gives_complete_structures():
    assert draw("graph", 12, 1.0, regime="p").num_edges == 66
    assert draw("digraph-loops", 7, 1.0, regime="p").num_edges == 49
    assert draw("cnf3", 6, 1.0, regime="p").num_edges == 160


def test_sampled_edges_are_canonical_and_admissible():
    H = draw("cnf3", 40, 3.0, seed=11)
    assert H.num_edges > 0
    for name, t in H.edges():
        assert canonical_edge(H.vocabulary.relation(name), t) == t
        assert len(set(t)) == 3


def test_loops_show_up_in_pattern_counts():
    H = draw("digraph-loops", 400, 20.0, seed=3)
    counts = pattern_counts(H)
    assert counts.get(("E", 1), 0) > 0
    assert counts[("E", 2)] > counts[("E", 1)]


def test_mean_edge_count_matches_expectation():
    vocab = preset("graph")
    expected = expected_edge_count(vocab, DensityMap.uniform(vocab, 2.0), 50)
    assert expected == pytest.approx(49.0)
    totals = [draw("graph", 50, 2.0, seed=17, index=i).num_edges for i in range(200)]
    assert abs(np.mean(totals) - expected) < 3.0


def test_large_space_draws_without_enumeration():
    H = draw("hypergraph3", 3000, 1.5, seed=2)
    # |E| ~ Bin(C(3000,3), 1.5/3000^2), mean about 750
    assert 640 < H.num_edges < 860


def test_local_orbits_match_label_orbits():
    rel = preset("cnf3").relation("R1")
    for pattern in rel.patterns:
        assert len(local_orbits(rel, pattern)) == pattern.label_orbits


def test_edge_budget_is_enforced():
    with pytest.raises(Overflow):
        draw("graph", 20000, 1.0, regime="p")


@pytest.mark.parametrize("name, n", [("digraph-loops", 4), ("cnf3", 5), ("hypergraph3", 6)])
def test_every_orbit_is_included_with_probability_p(name, n):
    p, trials = 0.3, 1500
    orbits = sorted(draw(name, n, 1.0, regime="p").edges())
    hits = dict.fromkeys(orbits, 0)
    for seed in range(trials):
        for edge in draw(name, n, p, seed=seed, regime="p").edges():
            hits[edge] += 1
    assert len(hits) == len(orbits)
    spread = 5 * np.sqrt(p * (1 - p) / trials)
    assert all(abs(c / trials - p) < spread for c in hits.values())


def binomial_chi_square(observed, space, p):
    trials = len(observed)
    pmf = stats.binom.pmf(np.arange(space + 1), space, p)
    histogram = np.bincount(observed, minlength=space + 1)
    wide = trials * pmf >= 5
    obs = list(histogram[wide]) + [histogram[~wide].sum()]
    exp = list(trials * pmf[wide]) + [trials * pmf[~wide].sum()]
    if exp[-1] == 0:
        obs, exp = obs[:-1], exp[:-1]
    return stats.chisquare(obs, exp).pvalue


@pytest.mark.parametrize("name, n, spaces", [
    ("digraph-loops", 6, {1: 6, 2: 30}),
    ("graph", 7, {2: 21}),
])
def test_pattern_counts_follow_the_binomial(name, n, spaces):
    p, trials = 0.2, 2000
    samples = [pattern_counts(draw(name, n, p, seed=seed, regime="p")) for seed in range(trials)]
    for d, space in spaces.items():
        observed = [counts.get(("E", d), 0) for counts in samples]
        assert binomial_chi_square(observed, space, p) > 1e-4
