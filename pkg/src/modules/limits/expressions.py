# src/modules/limits/expressions.py
"""Closed expression families for limit probabilities.

    Λ   one, Poisson pmf/tail with an M mean, products of Λ
    M   (β_R / b) · Π λ  with λ ∈ Λ
    Γ   (λ / b) · Π β_R^a  with λ ∈ Λ
    ΣΓ  a sum of Γ terms, admitted only as a Poisson mean
    Υ   products of Poisson pmf/tail with Γ or ΣΓ means
    ΣΥ  a finite sum of Υ terms (the limit of a sentence)

Nodes are immutable and shared; evaluation is vectorized over numpy arrays of β values
and runs in log space."""

import logging
from typing import Dict, FrozenSet, Iterable, List, Mapping, Sequence, Tuple, Union

import numpy as np
from scipy.special import logsumexp
from scipy.stats import poisson

from src.utils.errors import FamilyError, NonPositiveBeta

logger = logging.getLogger(__name__)

LAMBDA, M, GAMMA, GAMMA_SUM, UPSILON, UPSILON_SUM, RATIONAL, SYMBOL = "Λ", "M", "Γ", "ΣΓ", "Υ", "ΣΥ", "Q", "B"

BetaValues = Mapping[str, np.ndarray]


class SymExpr:
    __slots__ = ("families",)

    families: FrozenSet[str]

    @property
    def children(self) -> Tuple["SymExpr", ...]:
        return ()

    def in_family(self, family: str) -> bool:
        return family in self.families

    def symbols(self) -> FrozenSet[str]:
        found = set()
        stack: List[SymExpr] = [self]
        seen = set()
        while stack:
            node = stack.pop()
            if id(node) in seen:
                continue
            seen.add(id(node))
            if isinstance(node, Beta):
                found.add(node.relation)
            elif isinstance(node, (Mu, Gamma)):
                found.update(node.beta_names)
            stack.extend(node.children)
        return frozenset(found)

    def _log(self, betas: BetaValues, memo: Dict[int, np.ndarray]) -> np.ndarray:
        raise NotImplementedError

    def log_value(self, betas: BetaValues, memo: Dict[int, np.ndarray]) -> np.ndarray:
        key = id(self)
        if key not in memo:
            memo[key] = self._log(betas, memo)
        return memo[key]

    def sexpr(self) -> str:
        raise NotImplementedError

    def __repr__(self) -> str:
        text = self.sexpr()
        return text if len(text) < 200 else text[:197] + "..."


def _require(expr: SymExpr, allowed: Iterable[str], role: str) -> None:
    if not expr.families & frozenset(allowed):
        raise FamilyError(f"{role} must belong to {sorted(allowed)}, got {sorted(expr.families)}: {expr!r}")


class One(SymExpr):
    __slots__ = ()

    def __init__(self):
        self.families = frozenset({LAMBDA, UPSILON})

    def _log(self, betas, memo):
        return np.zeros(_shape(betas))

    def sexpr(self) -> str:
        return "(one)"


class Rat(SymExpr):
    __slots__ = ("p", "q")

    def __init__(self, p: int, q: int = 1):
        if q <= 0 or p < 0:
            raise FamilyError(f"Rational constants are non-negative with a positive denominator, got {p}/{q}")
        self.p, self.q = int(p), int(q)
        self.families = frozenset({RATIONAL})

    def _log(self, betas, memo):
        return np.full(_shape(betas), np.log(self.p / self.q) if self.p else -np.inf)

    def sexpr(self) -> str:
        return f"(rat {self.p} {self.q})"


class Beta(SymExpr):
    __slots__ = ("relation",)

    def __init__(self, relation: str):
        self.relation = relation
        self.families = frozenset({SYMBOL})

    def _log(self, betas, memo):
        return np.log(betas[self.relation])

    def sexpr(self) -> str:
        return f"(beta {self.relation})"


class Mu(SymExpr):
    """(β_R / b) · Π λ."""

    __slots__ = ("relation", "b", "lambdas")

    def __init__(self, relation: str, b: int, lambdas: Sequence[SymExpr]):
        if int(b) < 1:
            raise FamilyError(f"M denominator must be a positive integer, got {b}")
        for lam in lambdas:
            _require(lam, [LAMBDA], "M factor")
        self.relation, self.b, self.lambdas = relation, int(b), tuple(lambdas)
        self.families = frozenset({M})

    @property
    def children(self):
        return self.lambdas

    @property
    def beta_names(self) -> Tuple[str, ...]:
        return (self.relation,)

    def _log(self, betas, memo):
        total = np.log(betas[self.relation]) - np.log(self.b)
        for lam in self.lambdas:
            total = total + lam.log_value(betas, memo)
        return total

    def sexpr(self) -> str:
        inner = " ".join(lam.sexpr() for lam in self.lambdas)
        return f"(mu {self.relation} {self.b}{' ' + inner if inner else ''})"


class Gamma(SymExpr):
    """(λ / b) · Π β_R^a."""

    __slots__ = ("b", "lam", "powers")

    def __init__(self, b: int, lam: SymExpr, powers: Sequence[Tuple[str, int]]):
        if int(b) < 1:
            raise FamilyError(f"Γ denominator must be a positive integer, got {b}")
        _require(lam, [LAMBDA], "Γ factor")
        if any(a < 0 for _, a in powers):
            raise FamilyError(f"Γ exponents must be non-negative: {powers}")
        self.b, self.lam = int(b), lam
        self.powers = tuple(sorted((name, int(a)) for name, a in powers if a))
        self.families = frozenset({GAMMA})

    @property
    def children(self):
        return (self.lam,)

    @property
    def beta_names(self) -> Tuple[str, ...]:
        return tuple(name for name, _ in self.powers)

    def _log(self, betas, memo):
        total = self.lam.log_value(betas, memo) - np.log(self.b)
        for name, a in self.powers:
            total = total + a * np.log(betas[name])
        return total

    def sexpr(self) -> str:
        powers = " ".join(f"({name} {a})" for name, a in self.powers)
        return f"(gamma {self.b} {self.lam.sexpr()}{' ' + powers if powers else ''})"


class GammaSum(SymExpr):
    __slots__ = ("terms",)

    def __init__(self, terms: Sequence[SymExpr]):
        if not terms:
            raise FamilyError("ΣΓ needs at least one Γ term")
        for term in terms:
            _require(term, [GAMMA], "ΣΓ term")
        self.terms = tuple(terms)
        self.families = frozenset({GAMMA_SUM})

    @property
    def children(self):
        return self.terms

    def _log(self, betas, memo):
        return logsumexp(np.stack([t.log_value(betas, memo) for t in self.terms]), axis=0)

    def sexpr(self) -> str:
        return "(gsum " + " ".join(t.sexpr() for t in self.terms) + ")"


class _Poisson(SymExpr):
    __slots__ = ("mean", "n")

    tag = ""

    def __init__(self, mean: SymExpr, n: int):
        if int(n) < 0:
            raise FamilyError(f"Poisson count must be ≥ 0, got {n}")
        _require(mean, [M, GAMMA, GAMMA_SUM], "Poisson mean")
        self.mean, self.n = mean, int(n)
        self.families = frozenset({LAMBDA}) if M in mean.families else frozenset({UPSILON})

    @property
    def children(self):
        return (self.mean,)

    def sexpr(self) -> str:
        return f"({self.tag} {self.mean.sexpr()} {self.n})"


class PoissonPmf(_Poisson):
    """Poiss_λ(n) = e^{-λ} λ^n / n!."""

    __slots__ = ()
    tag = "pmf"

    def _log(self, betas, memo):
        return poisson.logpmf(self.n, np.exp(self.mean.log_value(betas, memo)))


class PoissonTail(_Poisson):
    """Poiss_λ(≥n)."""

    __slots__ = ()
    tag = "tail"

    def _log(self, betas, memo):
        if self.n == 0:
            return np.zeros(_shape(betas))
        return poisson.logsf(self.n - 1, np.exp(self.mean.log_value(betas, memo)))


class Prod(SymExpr):
    __slots__ = ("factors",)

    def __init__(self, factors: Sequence[SymExpr]):
        self.factors = tuple(factors)
        families = frozenset({LAMBDA, UPSILON})
        for f in self.factors:
            families &= f.families
        if not families:
            raise FamilyError(f"Product mixes families: {[sorted(f.families) for f in self.factors]}")
        self.families = families

    @property
    def children(self):
        return self.factors

    def _log(self, betas, memo):
        total = np.zeros(_shape(betas))
        for f in self.factors:
            total = total + f.log_value(betas, memo)
        return total

    def sexpr(self) -> str:
        return "(prod" + "".join(" " + f.sexpr() for f in self.factors) + ")"


class Sum(SymExpr):
    __slots__ = ("terms",)

    def __init__(self, terms: Sequence[SymExpr]):
        for term in terms:
            _require(term, [UPSILON], "ΣΥ term")
        self.terms = tuple(terms)
        self.families = frozenset({UPSILON_SUM})

    @property
    def children(self):
        return self.terms

    def _log(self, betas, memo):
        if not self.terms:
            return np.full(_shape(betas), -np.inf)
        return logsumexp(np.stack([t.log_value(betas, memo) for t in self.terms]), axis=0)

    def sexpr(self) -> str:
        return "(sum" + "".join(" " + t.sexpr() for t in self.terms) + ")"


def product(factors: Sequence[SymExpr]) -> SymExpr:
    """Prod that collapses to One for an empty factor list and drops One factors."""
    kept = [f for f in factors if not isinstance(f, One)]
    if not kept:
        return ONE
    return kept[0] if len(kept) == 1 else Prod(kept)


ONE = One()
ZERO = Sum(())


def _shape(betas: BetaValues) -> tuple:
    for value in betas.values():
        return np.shape(value)
    return ()


def _as_arrays(betas: Mapping[str, Union[float, np.ndarray]], needed: Iterable[str]) -> Dict[str, np.ndarray]:
    arrays = {}
    for name in needed:
        if name not in betas:
            raise NonPositiveBeta(f"No value given for β_{name}")
        arr = np.asarray(betas[name], dtype=float)
        if np.any(~(arr > 0)):
            raise NonPositiveBeta(f"β_{name} must be > 0 for evaluation, got {betas[name]}")
        arrays[name] = arr
    return arrays


def evaluate_many(e: SymExpr, betas: Mapping[str, Union[float, np.ndarray]]) -> np.ndarray:
    arrays = _as_arrays(betas, sorted(set(betas) | e.symbols()))
    shape = np.broadcast_shapes(*(a.shape for a in arrays.values())) if arrays else ()
    arrays = {name: np.broadcast_to(a, shape) for name, a in arrays.items()}
    return np.exp(e.log_value(arrays, {}))


def eval_expr(e: SymExpr, betas: Mapping[str, float]) -> float:
    return float(evaluate_many(e, betas))


def grid_eval(e: SymExpr, grid: Sequence[Mapping[str, float]]) -> List[float]:
    if not grid:
        return []
    names = sorted(grid[0])
    columns = {name: np.array([point[name] for point in grid], dtype=float) for name in names}
    return evaluate_many(e, columns).tolist()


def parse_beta_grid(text: str, relation_names: Sequence[str]) -> List[Dict[str, float]]:
    """`a:b:step` gives every relation the same β; `E=a:b:step,F=c` gives the Cartesian product."""
    def axis(part: str) -> List[float]:
        parts = [float(x) for x in part.split(":")]
        if len(parts) == 1:
            return parts
        if len(parts) != 3 or parts[2] <= 0 or parts[1] < parts[0]:
            raise ValueError(f"Bad grid axis '{part}', expected start:stop:step")
        start, stop, step = parts
        count = int(np.floor((stop - start) / step + 1e-9)) + 1
        return [round(start + i * step, 12) for i in range(count)]

    text = text.strip()
    if "=" not in text:
        return [{name: value for name in relation_names} for value in axis(text)]
    axes: Dict[str, List[float]] = {}
    for item in text.split(","):
        name, _, part = item.partition("=")
        axes[name.strip()] = axis(part.strip())
    missing = [n for n in relation_names if n not in axes]
    if missing:
        raise ValueError(f"Grid does not cover relations {missing}")
    points: List[Dict[str, float]] = [{}]
    for name in relation_names:
        points = [dict(p, **{name: v}) for p in points for v in axes[name]]
    return points
