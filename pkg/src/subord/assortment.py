"""Choice models, revenue, and the monotone revenue objective.

Three model families are supported (MNL, Markov chain, MNL mixture) plus an
explicit table model used as a negative control. Each single-segment model
offers ``revenue(S)``, ``choice_prob(i, S)`` and ``unconstrained_opt(ground)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import Callable, Sequence

import numpy as np

from .constraints import PartitionMatroid, UniformMatroid
from .core import TOL, InputError, NumericalError, Order, ValueOracle, as_set, check_elements

VI_TOL = 1e-10
VI_MAX_ITER = 100_000


def _nonneg(name: str, arr) -> np.ndarray:
    arr = np.asarray(arr, dtype=float)
    if np.any(arr < 0) or not np.all(np.isfinite(arr)):
        raise InputError(f"{name} must be finite and nonnegative")
    return arr


class MNLModel:
    def __init__(self, v: Sequence[float], v0: float, r: Sequence[float]):
        self.v = _nonneg("preference weights", v)
        self.r = _nonneg("prices", r)
        if self.v.shape != self.r.shape or self.v.ndim != 1:
            raise InputError("weights and prices must be vectors of equal length")
        if v0 < 0:
            raise InputError("outside-option weight must be nonnegative")
        self.v0 = float(v0)
        if self.v0 + self.v.sum() <= 0:
            raise InputError("total weight must be positive")

    @property
    def n(self) -> int:
        return len(self.v)

    def choice_prob(self, i: int, S) -> float:
        S = as_set(S)
        if i not in S:
            return 0.0
        denom = self.v0 + sum(self.v[e] for e in S)
        return float(self.v[i] / denom) if denom > 0 else 0.0

    def revenue(self, S) -> float:
        S = as_set(S)
        check_elements(S, self.n)
        if not S:
            return 0.0
        idx = list(S)
        denom = self.v0 + self.v[idx].sum()
        if denom <= 0:
            return 0.0
        return float(self.r[idx] @ self.v[idx] / denom)

    def unconstrained_opt(self, ground=None, maximal: bool = False):
        return mnl_unconstrained_opt(self, ground, maximal)

    def __eq__(self, other):
        return (isinstance(other, MNLModel) and self.v0 == other.v0
                and np.array_equal(self.v, other.v) and np.array_equal(self.r, other.r))

    def __repr__(self):
        return f"MNLModel(v={self.v.tolist()}, v0={self.v0}, r={self.r.tolist()})"


def mnl_revenue(mdl: MNLModel, S) -> float:
    return mdl.revenue(S)


def mnl_unconstrained_opt(mdl: MNLModel, ground=None, maximal: bool = False):
    """Best revenue-ordered prefix of ``ground``.

    The default returns the shortest optimal prefix without zero-weight items;
    ``maximal=True`` returns the largest optimal set instead.
    """
    ground = range(mdl.n) if ground is None else as_set(ground)
    items = sorted(ground, key=lambda e: (-mdl.r[e], e))
    best_val, best_len, longest = 0.0, 0, 0
    num = 0.0
    den = mdl.v0
    for pos, e in enumerate(items, 1):
        num += mdl.r[e] * mdl.v[e]
        den += mdl.v[e]
        val = num / den if den > 0 else 0.0
        if val > best_val + TOL:
            best_val, best_len, longest = val, pos, pos
        elif val >= best_val - TOL:
            longest = pos
    if maximal:
        S = frozenset(items[:longest]) | frozenset(e for e in items if mdl.v[e] == 0)
    else:
        S = frozenset(e for e in items[:best_len] if mdl.v[e] > 0)
    return S, mdl.revenue(S)


class MarkovModel:
    """Random-walk choice: arrive at i w.p. lam[i], move i -> j w.p. rho[i][j].

    The outside option gets the leftover mass of ``lam`` and of each row.
    Every product must be able to reach the outside option so that every
    absorbing system is solvable.
    """

    def __init__(self, lam: Sequence[float], rho, r: Sequence[float]):
        self.lam = _nonneg("arrival probabilities", lam)
        self.rho = _nonneg("transition probabilities", rho)
        self.r = _nonneg("prices", r)
        n = len(self.lam)
        if self.rho.shape != (n, n) or self.r.shape != (n,):
            raise InputError("arrival vector, transition matrix and prices disagree in size")
        if self.lam.sum() > 1 + TOL:
            raise InputError(f"arrival probabilities sum to {self.lam.sum():.6g} > 1")
        for i, row in enumerate(self.rho):
            s = row.sum()
            if s > 1 + TOL:
                raise InputError(f"transition row {i} sums to {s:.6g} > 1")
        self.lam0 = max(0.0, 1.0 - float(self.lam.sum()))
        self.rho0 = np.clip(1.0 - self.rho.sum(axis=1), 0.0, None)
        self._check_exit()

    def _check_exit(self) -> None:
        n = self.n
        exits = set(np.flatnonzero(self.rho0 > TOL).tolist())
        changed = True
        while changed:
            changed = False
            for i in range(n):
                if i not in exits and any(self.rho[i, j] > 0 for j in exits):
                    exits.add(i)
                    changed = True
        stuck = sorted(set(range(n)) - exits)
        if stuck:
            raise InputError(f"products {stuck} can never reach the outside option")

    @property
    def n(self) -> int:
        return len(self.lam)

    def _absorb(self, S: frozenset[int], payoff: np.ndarray) -> float:
        idx_S = sorted(S)
        idx_T = [i for i in range(self.n) if i not in S]
        val = float(self.lam[idx_S] @ payoff[idx_S])
        if idx_T:
            A = np.eye(len(idx_T)) - self.rho[np.ix_(idx_T, idx_T)]
            b = self.rho[np.ix_(idx_T, idx_S)] @ payoff[idx_S]
            h = np.linalg.solve(A, b)
            val += float(self.lam[idx_T] @ h)
        return val

    def revenue(self, S) -> float:
        S = as_set(S)
        check_elements(S, self.n)
        if not S:
            return 0.0
        return self._absorb(S, self.r)

    def choice_prob(self, i: int, S) -> float:
        S = as_set(S)
        if i not in S:
            return 0.0
        e = np.zeros(self.n)
        e[i] = 1.0
        return self._absorb(S, e)

    def unconstrained_opt(self, ground=None, maximal: bool = False):
        return markov_unconstrained_opt(self, ground, maximal)

    def __eq__(self, other):
        return (isinstance(other, MarkovModel) and np.array_equal(self.lam, other.lam)
                and np.array_equal(self.rho, other.rho) and np.array_equal(self.r, other.r))

    def __repr__(self):
        return f"MarkovModel(n={self.n})"


def markov_revenue(mdl: MarkovModel, S) -> float:
    return mdl.revenue(S)


def markov_unconstrained_opt(mdl: MarkovModel, ground=None, maximal: bool = False):
    """Optimal stopping by value iteration.

    A walker at an offered product may stop (collect its price) or is forced
    to keep walking elsewhere; the continuation value at i is ``rho[i] @ g``.
    Offered products are those where stopping beats continuing.
    """
    n = mdl.n
    allowed = np.zeros(n, dtype=bool)
    allowed[list(range(n) if ground is None else as_set(ground))] = True
    stop = np.where(allowed, mdl.r, -np.inf)
    g = np.where(allowed, mdl.r, 0.0)
    for _ in range(VI_MAX_ITER):
        cont = mdl.rho @ g
        g_new = np.maximum(stop, cont)
        if np.max(np.abs(g_new - g)) < VI_TOL:
            g = g_new
            break
        g = g_new
    else:
        raise NumericalError("value iteration did not converge")
    # polish with exact policy evaluation so ties are judged on exact values
    for _ in range(n + 1):
        offer = frozenset(np.flatnonzero(allowed & (mdl.r > mdl.rho @ g + 1e-12)).tolist())
        g_exact = _stopping_values(mdl, offer)
        if np.allclose(g_exact, g, atol=1e-13, rtol=0):
            g = g_exact
            break
        g = g_exact
    cont = mdl.rho @ g
    if maximal:
        pick = allowed & (mdl.r >= cont - TOL)
    else:
        pick = allowed & (mdl.r > cont + TOL)
    S = frozenset(np.flatnonzero(pick).tolist())
    return S, mdl.revenue(S)


def _stopping_values(mdl: MarkovModel, S: frozenset[int]) -> np.ndarray:
    """Expected collected price from each start state when stopping exactly on S."""
    g = np.zeros(mdl.n)
    idx_S = sorted(S)
    g[idx_S] = mdl.r[idx_S]
    idx_T = [i for i in range(mdl.n) if i not in S]
    if idx_T and idx_S:
        A = np.eye(len(idx_T)) - mdl.rho[np.ix_(idx_T, idx_T)]
        g[idx_T] = np.linalg.solve(A, mdl.rho[np.ix_(idx_T, idx_S)] @ mdl.r[idx_S])
    return g


class ExplicitChoiceModel:
    """Choice probabilities given by a callable; used for hand-built controls."""

    def __init__(self, r: Sequence[float], prob: Callable[[int, frozenset[int]], float]):
        self.r = _nonneg("prices", r)
        self.prob = prob

    @property
    def n(self) -> int:
        return len(self.r)

    def choice_prob(self, i: int, S) -> float:
        S = as_set(S)
        return float(self.prob(i, S)) if i in S else 0.0

    def revenue(self, S) -> float:
        S = as_set(S)
        return float(sum(self.r[i] * self.prob(i, S) for i in S))

    def unconstrained_opt(self, ground=None, maximal: bool = False):
        return brute_force_unconstrained(self, ground, maximal)


def brute_force_unconstrained(model, ground=None, maximal: bool = False):
    """Exhaustive optimum; ties go to the smallest (or, if maximal, largest) set."""
    ground = sorted(range(model.n) if ground is None else as_set(ground))
    subsets = [frozenset(X) for size in range(len(ground) + 1)
               for X in combinations(ground, size)]
    values = [model.revenue(X) for X in subsets]
    best_val = max(values)
    scan = range(len(subsets) - 1, -1, -1) if maximal else range(len(subsets))
    for idx in scan:
        if values[idx] >= best_val - TOL:
            return subsets[idx], values[idx]
    raise AssertionError("unreachable")


class ChoiceObjective(ValueOracle):
    """f(S) = best revenue of any sub-assortment of S (memoized per set)."""

    def __init__(self, model):
        super().__init__(model.n)
        self.model = model
        self._memo: dict[frozenset[int], float] = {}

    def _value(self, S):
        hit = self._memo.get(S)
        if hit is None:
            hit = self._memo[S] = self.model.unconstrained_opt(S)[1]
        return hit

    def U(self, ground=None, maximal: bool = False) -> frozenset[int]:
        """Optimal unconstrained assortment over ``ground``."""
        return self.model.unconstrained_opt(ground, maximal)[0]


def f_phi(model, S) -> float:
    return model.unconstrained_opt(as_set(S))[1]


def descending_price_order(r: Sequence[float]) -> Order:
    return Order(tuple(sorted(range(len(r)), key=lambda i: (-float(r[i]), i))))


@dataclass
class MixtureMNL:
    alpha: Sequence[float]
    models: Sequence[MNLModel]
    r: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        self.alpha = _nonneg("type weights", self.alpha)
        if len(self.alpha) != len(self.models) or not self.models:
            raise InputError("need one weight per MNL segment")
        if abs(self.alpha.sum() - 1) > 1e-9:
            raise InputError(f"type weights sum to {self.alpha.sum():.6g}, not 1")
        self.r = self.models[0].r
        for m in self.models[1:]:
            if m.n != self.models[0].n or not np.allclose(m.r, self.r, atol=0, rtol=0):
                raise InputError("mixture segments must share one price vector")

    @property
    def n(self) -> int:
        return self.models[0].n

    def revenue(self, S) -> float:
        return float(sum(a * m.revenue(S) for a, m in zip(self.alpha, self.models)))

    def value(self, S) -> float:
        S = as_set(S)
        return float(sum(a * m.unconstrained_opt(S)[1] for a, m in zip(self.alpha, self.models)))


class MixtureObjective(ValueOracle):
    """Weighted sum of the per-segment objectives (each segment picks its own best subset)."""

    def __init__(self, mix: MixtureMNL):
        super().__init__(mix.n)
        self.mix = mix
        self._memo: dict[frozenset[int], float] = {}

    def _value(self, S):
        hit = self._memo.get(S)
        if hit is None:
            hit = self._memo[S] = self.mix.value(S)
        return hit


def mixture_oracle(mix: MixtureMNL) -> MixtureObjective:
    return MixtureObjective(mix)


@dataclass(frozen=True)
class PriceLadder:
    prices: tuple[float, ...]

    def __post_init__(self):
        prices = tuple(float(p) for p in self.prices)
        if not prices:
            raise InputError("price ladder must be nonempty")
        if any(p <= 0 for p in prices):
            raise InputError("prices must be positive")
        if len(set(prices)) != len(prices):
            raise InputError("prices must be distinct")
        object.__setattr__(self, "prices", prices)

    def __len__(self):
        return len(self.prices)


def pricing_expansion(n: int, ladder: PriceLadder, k: int,
                      build: Callable[[list[tuple[int, float]]], object]):
    """Expand products into (product, price) pairs.

    ``build`` receives the list of pairs (index = expanded id) and returns a
    choice model on the expanded ground set. The matroid allows one price per
    product and at most ``k`` offered products overall.
    Returns ``(pairs, model, matroid)``.
    """
    if k < 0:
        raise InputError("cardinality bound must be nonnegative")
    pairs = [(i, p) for i in range(n) for p in ladder.prices]
    model = build(pairs)
    if getattr(model, "n", len(pairs)) != len(pairs):
        raise InputError("built model does not match the expanded ground set")
    if len(ladder) == 1:
        return pairs, model, UniformMatroid(len(pairs), k)
    blocks = [[idx for idx, (i, _) in enumerate(pairs) if i == prod] for prod in range(n)]
    return pairs, model, PartitionMatroid(len(pairs), blocks, 1, total=k)


def mnl_pricing_model(weight: Callable[[int, float], float], v0: float):
    """``build`` helper: an MNL over pairs with weight(i, p) and price p."""

    def build(pairs):
        return MNLModel([weight(i, p) for i, p in pairs], v0, [p for _, p in pairs])

    return build
