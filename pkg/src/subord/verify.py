"""Exhaustive property checkers and brute-force optima for small instances.

Every checker returns ``None`` when the property holds and a ``Witness``
otherwise. Witness sets re-evaluate to a violation larger than ``TOL``.
Checkers read values through ``peek`` so they never disturb query counts.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import Sequence

import numpy as np

from .constraints import Budget, Cardinality, Matroid
from .core import TOL, InputError, Order, ValueOracle, as_set

CAP_PROPERTY = 12
CAP_ORDER = 10
CAP_ENUM = 20
CAP_MATROID = 16
CAP_COMPAT = 7


class EnumerationCapError(InputError):
    """Instance too large for exhaustive enumeration."""


@dataclass
class Witness:
    prop: str
    A: frozenset[int] = frozenset()
    B: frozenset[int] = frozenset()
    C: frozenset[int] = frozenset()
    slack: float = 0.0
    extra: dict = field(default_factory=dict)

    def describe(self) -> str:
        parts = [f"A={sorted(self.A)}", f"B={sorted(self.B)}", f"C={sorted(self.C)}"]
        parts += [f"{k}={v}" for k, v in self.extra.items()]
        return f"{self.prop} violated: " + ", ".join(parts) + f", slack={self.slack:.3g}"


def _cap(n: int, cap: int, what: str) -> None:
    if n > cap:
        raise EnumerationCapError(f"{what} is limited to n <= {cap}, got n = {n}")


def _mask(S) -> int:
    m = 0
    for e in S:
        m |= 1 << e
    return m


def _bits(mask: int) -> frozenset[int]:
    return frozenset(e for e in range(int(mask).bit_length()) if mask >> e & 1)


def _lex_key(mask: int):
    members = sorted(_bits(mask))
    return (len(members), members)


def value_table(f: ValueOracle, n: int | None = None) -> np.ndarray:
    """All 2^n values indexed by bitmask (uncounted)."""
    n = f.n if n is None else n
    table = np.empty(1 << n)
    for m in range(1 << n):
        table[m] = f.peek(_bits(m))
    return table


def check_monotone(f: ValueOracle, n: int | None = None):
    n = f.n if n is None else n
    _cap(n, CAP_PROPERTY, "monotonicity check")
    t = value_table(f, n)
    masks = np.arange(1 << n)
    for e in range(n):
        base = masks[(masks >> e & 1) == 0]
        drop = t[base] - t[base | (1 << e)]
        bad = np.flatnonzero(drop > TOL)
        if bad.size:
            B = int(base[bad[0]])
            return Witness("monotone", A=_bits(B | 1 << e), B=_bits(B), slack=float(drop[bad[0]]))
    return None


def check_subadditive(f: ValueOracle, n: int | None = None):
    n = f.n if n is None else n
    _cap(n, CAP_PROPERTY, "subadditivity check")
    t = value_table(f, n)
    masks = np.arange(1 << n)
    for A in range(1 << n):
        Bs = masks[A:]
        excess = t[A | Bs] - t[A] - t[Bs]
        bad = np.flatnonzero(excess > TOL)
        if bad.size:
            return Witness("subadditive", A=_bits(A), B=_bits(int(Bs[bad[0]])),
                           slack=float(excess[bad[0]]))
    return None


def check_strong_order(f: ValueOracle, order: Order, n: int | None = None):
    """f(i|A) <= f(i|B) for B in A and i right of A (single elements suffice).

    Violations are reported for the smallest A (by size, then members) and,
    for that A, the largest violating B.
    """
    n = f.n if n is None else n
    _cap(n, CAP_ORDER, "order check")
    t = value_table(f, n)
    masks = np.arange(1 << n)
    for pos, i in enumerate(order.perm):
        left = _mask(order.perm[:pos])
        bit = 1 << i
        gain = np.full(1 << n, np.inf)
        inside = masks[(masks & ~left) == 0]
        gain[inside] = t[inside | bit] - t[inside]
        low = gain.copy()
        for e in order.perm[:pos]:
            has = inside[(inside >> e & 1) == 1]
            low[has] = np.minimum(low[has], low[has ^ (1 << e)])
        bad = inside[gain[inside] > low[inside] + TOL]
        if bad.size:
            A = min((int(a) for a in bad), key=_lex_key)
            subs = sorted(_submasks(A), key=lambda m: (-bin(m).count("1"), sorted(_bits(m))))
            for B in subs:
                if gain[A] > gain[B] + TOL:
                    return Witness("strong-order", A=_bits(A), B=_bits(B), C=frozenset([i]),
                                   slack=float(gain[A] - gain[B]))
    return None


def _submasks(mask: int) -> list[int]:
    out, sub = [], mask
    while True:
        out.append(sub)
        if sub == 0:
            return out
        sub = (sub - 1) & mask


def check_weak_order(f: ValueOracle, order: Order, n: int | None = None):
    """f(C|A) <= f(C|B) for nested B in A (A minus B right of B) and C right of A."""
    n = f.n if n is None else n
    _cap(n, CAP_ORDER, "order check")
    t = value_table(f, n)
    masks = np.arange(1 << n)
    rank = order.rank
    for A in sorted(range(1 << n), key=_lex_key):
        members = order.sorted(_bits(A))
        right = masks.max() if not members else _mask(order.perm[rank[members[-1]] + 1:])
        C = masks[(masks & ~right) == 0]
        C = C[C != 0]
        if C.size == 0:
            continue
        gain_A = t[C | A] - t[A]
        for cut in range(len(members) - 1, -1, -1):
            B = _mask(members[:cut])
            gain_B = t[C | B] - t[B]
            bad = np.flatnonzero(gain_A > gain_B + TOL)
            if bad.size:
                return Witness("weak-order", A=_bits(A), B=_bits(B), C=_bits(int(C[bad[0]])),
                               slack=float(gain_A[bad[0]] - gain_B[bad[0]]))
    return None


def brute_force_opt(f: ValueOracle, constraint=None, n: int | None = None):
    """Exact maximum of f over the (downward-closed) feasible family.

    Depth-first over element ids with feasibility pruning. Values come from
    ``peek``. Ties keep the first set found.
    """
    n = f.n if n is None else n
    if isinstance(constraint, Matroid):
        _cap(n, CAP_MATROID, "matroid enumeration")
    else:
        _cap(n, CAP_ENUM, "enumeration")
    if isinstance(constraint, Cardinality):
        k = constraint.k
        best, best_val = frozenset(), 0.0
        for size in range(1, min(k, n) + 1):
            for S in combinations(range(n), size):
                v = f.peek(S)
                if v > best_val + TOL:
                    best, best_val = frozenset(S), v
        return best, best_val

    if constraint is None:
        feasible = lambda S: True  # noqa: E731
    elif isinstance(constraint, Budget):
        b, B = constraint.budgets, constraint.B
        feasible = lambda S: sum(b[e] for e in S) <= B + TOL  # noqa: E731
    else:
        feasible = constraint.feasible
    best = [frozenset(), 0.0]

    def dfs(start: int, S: list[int]):
        for e in range(start, n):
            S.append(e)
            if feasible(S):
                v = f.peek(S)
                if v > best[1] + TOL:
                    best[0], best[1] = frozenset(S), v
                dfs(e + 1, S)
            S.pop()

    dfs(0, [])
    return best[0], best[1]


@dataclass
class InterleavedPartition:
    """Alternating blocks O_1, E_1, ..., O_m, E_m and a permutation sigma of 0..m-1."""

    O: Sequence[frozenset[int]]
    E: Sequence[frozenset[int]]
    sigma: tuple[int, ...] | None = None

    def __post_init__(self):
        self.O = [as_set(x) for x in self.O]
        self.E = [as_set(x) for x in self.E]
        if len(self.O) != len(self.E):
            raise InputError("need as many O blocks as E blocks")
        m = len(self.O)
        self.sigma = tuple(range(m)) if self.sigma is None else tuple(self.sigma)
        if sorted(self.sigma) != list(range(m)):
            raise InputError("sigma must be a permutation of the block indices")

    @property
    def m(self) -> int:
        return len(self.O)

    def validate(self, order: Order, A) -> None:
        A = as_set(A)
        blocks = [blk for pair in zip(self.O, self.E) for blk in pair]
        union: set[int] = set()
        for blk in blocks:
            if union & blk:
                raise InputError("blocks overlap")
            union |= blk
        if union != A:
            raise InputError("blocks do not partition the set")
        prev = -1
        for blk in blocks:
            if not blk:
                continue
            ranks = [order.rank[e] for e in blk]
            if min(ranks) <= prev:
                raise InputError("blocks cross each other in the order")
            prev = max(ranks)

    def E_upto(self, j: int) -> frozenset[int]:
        """Union of the first j E blocks."""
        return frozenset().union(*self.E[:j])

    def L(self, j: int) -> frozenset[int]:
        """O blocks left of O_j that sigma places at or after O_j."""
        return frozenset().union(*(self.O[l] for l in range(j) if self.sigma[l] >= self.sigma[j]))


def interleaved_bound(f: ValueOracle, part: InterleavedPartition) -> float:
    total = f.peek(part.E_upto(part.m))
    for j in range(part.m):
        base = part.L(j) | part.E_upto(j)
        total += f.peek(part.O[j] | base) - f.peek(base)
    return total


def check_interleaved_bound(f: ValueOracle, order: Order, A, part: InterleavedPartition) -> bool:
    part.validate(order, A)
    return f.peek(A) <= interleaved_bound(f, part) + TOL


def random_interleaved_partition(order: Order, A, rng: np.random.Generator,
                                 m: int | None = None) -> InterleavedPartition:
    """Cut the order-sorted A into 2m consecutive (possibly empty) runs."""
    seq = order.sorted(as_set(A))
    if m is None:
        m = int(rng.integers(1, max(1, len(seq)) + 1))
    cuts = np.sort(rng.integers(0, len(seq) + 1, size=2 * m - 1))
    bounds = [0, *cuts.tolist(), len(seq)]
    blocks = [frozenset(seq[bounds[i]:bounds[i + 1]]) for i in range(2 * m)]
    sigma = tuple(rng.permutation(m).tolist())
    return InterleavedPartition(blocks[0::2], blocks[1::2], sigma)


def _best_subset_gain(R: np.ndarray, A: int, n: int) -> np.ndarray:
    """For every C: max over X in C of R(X | A)."""
    masks = np.arange(1 << n)
    g = R[masks | A] - R[A]
    for e in range(n):
        has = masks[(masks >> e & 1) == 1]
        g[has] = np.maximum(g[has], g[has ^ (1 << e)])
    return g


def check_compatibility(model, n: int | None = None, form: str = "literal"):
    """Exhaustive check of the two compatibility inequalities.

    With S* the largest optimal unconstrained assortment (found by brute
    force), checks R(A|C) >= 0 for A in S* and any C, then for B in A in S*
    and any C:

    - ``form="literal"``: R(C|A) <= R(C|B);
    - ``form="best-subset"``: max over X in C of R(X|A) <= the same for B,
      i.e. the objective's marginals f(C|A) <= f(C|B) relative to A and B.
    """
    if form not in ("literal", "best-subset"):
        raise InputError(f"unknown compatibility form {form!r}")
    n = model.n if n is None else n
    _cap(n, CAP_COMPAT, "compatibility check")
    R = np.array([model.revenue(_bits(m)) for m in range(1 << n)])
    best = R.max()
    opt = [m for m in range(1 << n) if R[m] >= best - TOL]
    star = max(opt, key=lambda m: (bin(m).count("1"), -m))
    masks = np.arange(1 << n)
    info = {"S_star": sorted(_bits(star))}
    for A in _submasks(star)[::-1]:
        lift = R[masks | A] - R[masks]
        bad = np.flatnonzero(lift < -TOL)
        if bad.size:
            return Witness("compatibility-nonneg", A=_bits(A), C=_bits(int(masks[bad[0]])),
                           slack=float(-lift[bad[0]]), extra=info)

    def gain(X):
        return R[masks | X] - R[X] if form == "literal" else _best_subset_gain(R, X, n)

    for A in _submasks(star)[::-1]:
        gain_A = gain(A)
        for B in _submasks(A)[::-1]:
            gain_B = gain(B)
            bad = np.flatnonzero(gain_A > gain_B + TOL)
            if bad.size:
                return Witness(f"compatibility-{form}", A=_bits(A), B=_bits(B),
                               C=_bits(int(masks[bad[0]])),
                               slack=float(gain_A[bad[0]] - gain_B[bad[0]]), extra=info)
    return None


def check_substitutable(model, n: int | None = None):
    """phi(i, S + j) <= phi(i, S) for all i in S, j outside S."""
    n = model.n if n is None else n
    _cap(n, CAP_PROPERTY, "substitutability check")
    for m in range(1 << n):
        S = _bits(m)
        for j in range(n):
            if j in S:
                continue
            Sj = S | {j}
            for i in sorted(S):
                d = model.choice_prob(i, Sj) - model.choice_prob(i, S)
                if d > TOL:
                    return Witness("substitutable", A=Sj, B=S, C=frozenset([i]), slack=d,
                                   extra={"added": j})
    return None
