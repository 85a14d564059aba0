# src/modules/montecarlo/stats.py

import logging
import math
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import stats

from src import config

logger = logging.getLogger(__name__)


def tolerance(stderr: float, scale: float = 1.0) -> float:
    return max(config.MC_TOLERANCE_FLOOR * scale, config.MC_TOLERANCE_SIGMAS * stderr)


def proportion_stderr(successes: int, trials: int) -> float:
    if trials == 0:
        return float("nan")
    p = successes / trials
    return math.sqrt(p * (1 - p) / trials)


def wilson_interval(successes: int, trials: int, confidence: float = 0.95) -> Tuple[float, float]:
    ci = stats.binomtest(successes, trials).proportion_ci(confidence_level=confidence, method="wilson")
    return float(ci.low), float(ci.high)


def mean_stderr(total: float, total_sq: float, count: int) -> Tuple[float, float, float]:
    """Mean, variance and standard error from running sums."""
    if count == 0:
        return float("nan"), float("nan"), float("nan")
    mean = total / count
    var = max(0.0, total_sq / count - mean * mean)
    if count > 1:
        var *= count / (count - 1)
    return mean, var, math.sqrt(var / count)


def poisson_pmf_table(mean: float, upto: int) -> np.ndarray:
    """Poisson probabilities of 0..upto-1 with the tail folded into the last cell."""
    probs = stats.poisson.pmf(np.arange(upto), mean)
    probs[-1] += stats.poisson.sf(upto - 1, mean)
    return probs


def poisson_gof(histogram: Dict[int, int], mean: float, min_expected: float = 5.0) -> Optional[float]:
    """Chi-square p-value of an integer histogram against Poisson(mean); None when too few cells."""
    total = sum(histogram.values())
    if total == 0 or mean <= 0:
        return None
    upto = max(histogram) + 2
    expected = poisson_pmf_table(mean, upto) * total
    observed = np.array([histogram.get(i, 0) for i in range(upto)], dtype=float)
    # хвіст: зливаємо клітинки з малими очікуваннями
    obs_cells: List[float] = []
    exp_cells: List[float] = []
    acc_o = acc_e = 0.0
    for o, e in zip(observed, expected):
        acc_o += o
        acc_e += e
        if acc_e >= min_expected:
            obs_cells.append(acc_o)
            exp_cells.append(acc_e)
            acc_o = acc_e = 0.0
    if acc_e > 0 and exp_cells:
        obs_cells[-1] += acc_o
        exp_cells[-1] += acc_e
    if len(exp_cells) < 2:
        return None
    exp_arr = np.array(exp_cells)
    exp_arr *= sum(obs_cells) / exp_arr.sum()
    return float(stats.chisquare(obs_cells, exp_arr).pvalue)


def total_variation(empirical: Dict[int, float], predicted: Dict[int, float]) -> float:
    keys = set(empirical) | set(predicted)
    return 0.5 * sum(abs(empirical.get(i, 0.0) - predicted.get(i, 0.0)) for i in keys)


def check_monotone(values: Sequence[Tuple[float, float, float]], label: str = "n", decreasing: bool = False) -> bool:
    """Soft check that estimates move one way along `label` within two standard errors; only warns."""
    ordered = sorted(values)
    sign = -1.0 if decreasing else 1.0
    ok = True
    for (x1, e1, s1), (x2, e2, s2) in zip(ordered, ordered[1:]):
        if sign * (e2 - e1) < -2 * math.hypot(s1, s2):
            logger.warning(f"Non-monotone estimate: {e1:.4f} at {label}={x1} vs {e2:.4f} at {label}={x2}")
            ok = False
    return ok
