"""Ground sets, orders, and value oracles with exact query accounting."""

from __future__ import annotations

import copy
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

TOL = 1e-9


class InputError(ValueError):
    """Raised for malformed arguments: bad element ids, empty sets, bad parameters."""


class ContractError(RuntimeError):
    """Raised when a caller violates an operation's precondition contract."""


class NumericalError(ArithmeticError):
    """Raised when an iterative numeric routine fails to converge."""


def as_set(S: Iterable[int] | None) -> frozenset[int]:
    if S is None:
        return frozenset()
    if isinstance(S, frozenset):
        return S
    return frozenset(int(e) for e in S)


def check_elements(S: frozenset[int], n: int) -> None:
    for e in S:
        if e < 0 or e >= n:
            raise InputError(f"element id {e} out of range for ground set of size {n}")


@dataclass(frozen=True)
class Order:
    """A sequence of distinct element ids with an inverse rank map.

    Usually a permutation of ``0..n-1``; the assortment framework also builds
    orders over a subset of the ground set.
    """

    perm: tuple[int, ...]
    rank: dict[int, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        perm = tuple(int(e) for e in self.perm)
        object.__setattr__(self, "perm", perm)
        rank = {e: i for i, e in enumerate(perm)}
        if len(rank) != len(perm):
            raise InputError("order contains repeated elements")
        object.__setattr__(self, "rank", rank)

    @classmethod
    def identity(cls, n: int) -> "Order":
        return cls(tuple(range(n)))

    def __len__(self) -> int:
        return len(self.perm)

    def __iter__(self):
        return iter(self.perm)

    def __contains__(self, e: object) -> bool:
        return e in self.rank

    def is_permutation_of(self, n: int) -> bool:
        return len(self.perm) == n and set(self.perm) == set(range(n))

    def restrict(self, elements: Iterable[int]) -> "Order":
        keep = set(elements)
        return Order(tuple(e for e in self.perm if e in keep))

    def sorted(self, S: Iterable[int]) -> list[int]:
        return sorted(S, key=self.rank.__getitem__)


def rightmost(order: Order, S: Iterable[int]) -> int:
    S = as_set(S)
    if not S:
        raise InputError("rightmost of an empty set")
    return max(S, key=order.rank.__getitem__)


def leftmost(order: Order, S: Iterable[int]) -> int:
    S = as_set(S)
    if not S:
        raise InputError("leftmost of an empty set")
    return min(S, key=order.rank.__getitem__)


class ValueOracle:
    """Set function on ``0..n-1``; every call through ``__call__`` is one query.

    Subclasses implement ``_value`` on a frozenset. ``peek`` evaluates without
    touching the counter and is meant for auditing code, never for algorithms.
    """

    def __init__(self, n: int):
        if n < 0:
            raise InputError("ground set size must be nonnegative")
        self.n = int(n)
        self.query_count = 0

    def __call__(self, S: Iterable[int]) -> float:
        S = as_set(S)
        check_elements(S, self.n)
        self.query_count += 1
        if not S:
            return 0.0
        return float(self._value(S))

    def peek(self, S: Iterable[int]) -> float:
        S = as_set(S)
        check_elements(S, self.n)
        if not S:
            return 0.0
        return float(self._value(S))

    def _value(self, S: frozenset[int]) -> float:
        raise NotImplementedError

    def clone(self) -> "ValueOracle":
        """Shallow copy with a fresh counter (caches stay shared)."""
        other = copy.copy(self)
        other.query_count = 0
        return other

    def reset(self) -> None:
        self.query_count = 0


class SetFunction(ValueOracle):
    """Oracle backed by an arbitrary callable on frozensets."""

    def __init__(self, n: int, fn: Callable[[frozenset[int]], float]):
        super().__init__(n)
        self.fn = fn

    def _value(self, S):
        return self.fn(S)


class TableFunction(ValueOracle):
    """Explicit value table indexed by bitmask (bit e set iff e in S)."""

    def __init__(self, n: int, values: Sequence[float]):
        super().__init__(n)
        values = np.asarray(values, dtype=float)
        if values.shape != (1 << n,):
            raise InputError(f"value table must have 2**{n} entries, got {values.shape}")
        if abs(values[0]) > TOL:
            raise InputError("value table must satisfy f(empty) = 0")
        self.values = values

    def _value(self, S):
        mask = 0
        for e in S:
            mask |= 1 << e
        return self.values[mask]


class ModularFunction(ValueOracle):
    def __init__(self, weights: Sequence[float]):
        super().__init__(len(weights))
        self.weights = [float(w) for w in weights]

    def _value(self, S):
        return sum(self.weights[e] for e in S)


class CoverageFunction(ValueOracle):
    """Weighted coverage: f(S) = total weight of universe items covered by S."""

    def __init__(self, covers: Sequence[Iterable[int]], weights: Sequence[float]):
        super().__init__(len(covers))
        self.covers = [frozenset(c) for c in covers]
        self.weights = [float(w) for w in weights]
        for c in self.covers:
            for u in c:
                if u < 0 or u >= len(self.weights):
                    raise InputError(f"universe item {u} has no weight")

    def _value(self, S):
        covered = set()
        for e in S:
            covered |= self.covers[e]
        return sum(self.weights[u] for u in covered)


class NoisyOracle(ValueOracle):
    """Multiplicative noise in ``[(1-delta) f, (1+delta) f]``.

    The perturbation of a set is a pure function of ``(seed, S)``, so repeated
    queries agree and results do not depend on query order.
    """

    def __init__(self, inner: ValueOracle, delta: float, seed: int = 0):
        if not 0 <= delta < 1:
            raise InputError(f"noise level must lie in [0, 1), got {delta}")
        super().__init__(inner.n)
        self.inner = inner
        self.delta = float(delta)
        self.seed = int(seed)
        self._memo: dict[frozenset[int], float] = {}

    def _value(self, S):
        hit = self._memo.get(S)
        if hit is not None:
            return hit
        base = self.inner.peek(S)
        if self.delta == 0.0:
            val = base
        else:
            u = np.random.default_rng([self.seed, *sorted(S)]).uniform(-1.0, 1.0)
            val = base * (1.0 + self.delta * u)
        self._memo[S] = val
        return val


def wrap_noisy(f: ValueOracle, delta: float, seed: int = 0) -> NoisyOracle:
    return NoisyOracle(f, delta, seed)


def marginal(f: ValueOracle, C: Iterable[int], S: Iterable[int]) -> float:
    """f(C | S) = f(C u S) - f(S); two queries, or one when S is empty."""
    C, S = as_set(C), as_set(S)
    check_elements(C, f.n)
    check_elements(S, f.n)
    if not S:
        return f(C)
    return f(C | S) - f(S)
