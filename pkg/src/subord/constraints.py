"""Feasibility structures: cardinality, knapsack budgets, and matroids.

Matroids expose only an independence oracle. Rank and circuits are derived
from it on demand, and every oracle call is counted in ``queries``.
"""

from __future__ import annotations

from itertools import combinations
from typing import Iterable, Sequence

from .core import TOL, ContractError, InputError, as_set, check_elements


class Cardinality:
    kind = "cardinality"

    def __init__(self, k: int):
        if k < 0:
            raise InputError("cardinality bound must be nonnegative")
        self.k = int(k)

    def feasible(self, S) -> bool:
        return len(as_set(S)) <= self.k

    def __repr__(self):
        return f"Cardinality(k={self.k})"


class Budget:
    """Knapsack constraint: sum of b_i over S at most B."""

    kind = "budget"

    def __init__(self, budgets: Sequence[float], B: float):
        budgets = [float(b) for b in budgets]
        if any(b < 0 for b in budgets):
            raise InputError("element budgets must be nonnegative")
        if B < 0:
            raise InputError("total budget must be nonnegative")
        self.budgets = budgets
        self.B = float(B)

    @property
    def n(self) -> int:
        return len(self.budgets)

    def cost(self, S) -> float:
        return sum(self.budgets[e] for e in S)

    def feasible(self, S) -> bool:
        return self.cost(as_set(S)) <= self.B + TOL

    @classmethod
    def unit(cls, n: int, k: int) -> "Budget":
        return cls([1.0] * n, k)

    def __repr__(self):
        return f"Budget(budgets={self.budgets}, B={self.B})"


class Matroid:
    """Independence-oracle matroid on ``0..n-1``."""

    kind = "matroid"

    def __init__(self, n: int):
        self.n = int(n)
        self.queries = 0
        self._rank_full: int | None = None

    def _independent(self, S: frozenset[int]) -> bool:
        raise NotImplementedError

    def is_independent(self, S) -> bool:
        S = as_set(S)
        check_elements(S, self.n)
        self.queries += 1
        return self._independent(S)

    def feasible(self, S) -> bool:
        S = as_set(S)
        check_elements(S, self.n)
        return self._independent(S)

    @property
    def d(self) -> int:
        """Rank of the ground set (computed once, not counted)."""
        if self._rank_full is None:
            base: set[int] = set()
            for e in range(self.n):
                if self._independent(frozenset(base | {e})):
                    base.add(e)
            self._rank_full = len(base)
        return self._rank_full

    def rank(self, S) -> int:
        return rank(self, S)

    def circuit(self, S, j: int) -> frozenset[int]:
        return circuit(self, S, j)


class UniformMatroid(Matroid):
    def __init__(self, n: int, k: int):
        super().__init__(n)
        self.k = int(k)

    def _independent(self, S):
        return len(S) <= self.k

    def __repr__(self):
        return f"UniformMatroid(n={self.n}, k={self.k})"


class FreeMatroid(UniformMatroid):
    def __init__(self, n: int):
        super().__init__(n, n)


class PartitionMatroid(Matroid):
    """At most ``capacities[b]`` elements from block b, optionally at most
    ``total`` elements overall (a truncation, still a matroid)."""

    def __init__(self, n: int, blocks: Sequence[Iterable[int]],
                 capacities: Sequence[int] | int = 1, total: int | None = None):
        super().__init__(n)
        self.blocks = [tuple(sorted(int(e) for e in b)) for b in blocks]
        if isinstance(capacities, int):
            capacities = [capacities] * len(self.blocks)
        if len(capacities) != len(self.blocks):
            raise InputError("one capacity per block required")
        self.capacities = [int(c) for c in capacities]
        self.total = None if total is None else int(total)
        self.block_of: dict[int, int] = {}
        for idx, b in enumerate(self.blocks):
            for e in b:
                if e in self.block_of:
                    raise InputError(f"element {e} appears in two blocks")
                if not 0 <= e < n:
                    raise InputError(f"element id {e} out of range")
                self.block_of[e] = idx
        if len(self.block_of) != n:
            raise InputError("partition blocks must cover the ground set")

    def _independent(self, S):
        if self.total is not None and len(S) > self.total:
            return False
        counts = [0] * len(self.blocks)
        for e in S:
            b = self.block_of[e]
            counts[b] += 1
            if counts[b] > self.capacities[b]:
                return False
        return True

    def __repr__(self):
        return (f"PartitionMatroid(blocks={self.blocks}, capacities={self.capacities}, "
                f"total={self.total})")


class ExplicitMatroid(Matroid):
    """Matroid given by its list of bases; independent iff contained in a base."""

    def __init__(self, n: int, bases: Iterable[Iterable[int]], audit: bool = True):
        super().__init__(n)
        self.bases = sorted({frozenset(b) for b in bases}, key=sorted)
        if not self.bases:
            raise InputError("explicit matroid needs at least one base")
        for b in self.bases:
            check_elements(b, n)
        if audit:
            bad = basis_exchange_violation(self.bases)
            if bad is not None:
                raise InputError(f"bases violate the exchange axiom: {bad}")

    def _independent(self, S):
        return any(S <= b for b in self.bases)

    def __repr__(self):
        return f"ExplicitMatroid(n={self.n}, bases={[sorted(b) for b in self.bases]})"


def basis_exchange_violation(bases):
    """Return (B1, B2, x) breaking basis exchange, or None if the family is valid."""
    family = set(bases)
    sizes = {len(b) for b in family}
    if len(sizes) > 1:
        return ("unequal base sizes", sorted(sizes))
    for b1 in family:
        for b2 in family:
            for x in b1 - b2:
                if not any((b1 - {x}) | {y} in family for y in b2 - b1):
                    return (sorted(b1), sorted(b2), x)
    return None


def feasible(c, S) -> bool:
    return c.feasible(S)


def rank(m: Matroid, S) -> int:
    """Size of a maximal independent subset of S, grown greedily."""
    S = as_set(S)
    base: set[int] = set()
    for e in sorted(S):
        if m.is_independent(base | {e}):
            base.add(e)
    return len(base)


def circuit(m: Matroid, S, j: int) -> frozenset[int]:
    """The unique circuit in S+j for independent S with S+j dependent.

    Uses |S| counted independence queries. The precondition itself is
    asserted through the uncounted ``feasible`` check.
    """
    S = as_set(S)
    if j in S:
        raise ContractError(f"element {j} already in S")
    if m.feasible(S | {j}):
        raise ContractError("S + j is independent; no circuit exists")
    C = {j}
    for i in sorted(S):
        if m.is_independent((S - {i}) | {j}):
            C.add(i)
    return frozenset(C)


def is_circuit(m: Matroid, C) -> bool:
    C = as_set(C)
    if m.feasible(C):
        return False
    return all(m.feasible(C - {e}) for e in C)


def check_matroid_axioms(m: Matroid):
    """Exhaustive audit on small ground sets; returns a violation tuple or None."""
    n = m.n
    if not m.feasible(frozenset()):
        return ("empty set dependent",)
    indep = [frozenset(c) for r in range(n + 1) for c in combinations(range(n), r)
             if m.feasible(frozenset(c))]
    indep_set = set(indep)
    for I in indep:
        for e in I:
            if I - {e} not in indep_set:
                return ("downward closure", sorted(I), e)
    for I in indep:
        for J in indep:
            if len(J) > len(I):
                if not any(I | {x} in indep_set for x in J - I):
                    return ("augmentation", sorted(I), sorted(J))
    return None
