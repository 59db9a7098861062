"""Single-pass maximization algorithms for functions with a submodular order.

Every composite algorithm is the best of a family of per-setting runs. Each
run parses the ordered ground set exactly once and reports ``(S, R)``, where
``R`` holds elements that were once kept and later discarded. Marginals are
always taken with respect to subsets of ``S | R``; the value of the running
set is cached so each parsed element costs at most one value query.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from itertools import combinations
from typing import NamedTuple, Sequence

from .constraints import Budget, Cardinality, Matroid, circuit
from .core import TOL, InputError, Order, ValueOracle

TAGS = ("cardinality", "budget_third", "budget_half", "matroid")


class TraceEvent(NamedTuple):
    kind: str  # add | reject | swap | final_add | drop
    element: int
    gain: float = 0.0
    removed: tuple[int, ...] = ()


@dataclass(frozen=True)
class ParamSetting:
    algo: str
    tau: float | None = None
    X: frozenset[int] | None = None
    eps: float | None = None

    def __post_init__(self):
        if self.algo not in TAGS:
            raise InputError(f"unknown algorithm tag {self.algo!r}")
        if self.tau is not None and not self.tau > 0:
            raise InputError("threshold must be positive")


@dataclass
class RunResult:
    S: frozenset[int]
    R: frozenset[int]
    value: float
    queries: int
    trace: list[TraceEvent] = field(default_factory=list)
    setting: ParamSetting | None = None
    runs: list["RunResult"] = field(default_factory=list)
    info: dict = field(default_factory=dict)

    @property
    def parsed(self) -> list[int]:
        return [ev.element for ev in self.trace]


def _grid_size(base: float, eps: float) -> int:
    """ceil(log_{1+eps} base), at least one setting."""
    if base <= 1:
        return 1
    return max(1, math.ceil(math.log(base) / math.log1p(eps) - 1e-12))


def _check_eps(eps: float, hi: float = 1.0, closed: bool = False) -> None:
    if not (0 < eps <= hi if closed else 0 < eps < hi):
        raise InputError(f"epsilon must lie in (0, {hi}), got {eps}")


# ---------------------------------------------------------------------------
# Cardinality


def threshold_add(f: ValueOracle, order: Order, k: int, tau: float) -> RunResult:
    """Accept, in order, every element whose marginal clears ``tau`` until |S| = k."""
    q0 = f.query_count
    S: list[int] = []
    fS = 0.0
    trace: list[TraceEvent] = []
    for e in order:
        if len(S) >= k:
            break
        val = f(S + [e])
        gain = val - fS
        if gain >= tau - TOL:
            S.append(e)
            fS = val
            trace.append(TraceEvent("add", e, gain))
        else:
            trace.append(TraceEvent("reject", e, gain))
    return RunResult(frozenset(S), frozenset(), fS, f.query_count - q0, trace,
                     ParamSetting("cardinality", tau))


def greedy(f: ValueOracle, k: int, ground: Sequence[int] | None = None) -> RunResult:
    """Classic greedy baseline: repeatedly add the largest marginal (ties: smallest id)."""
    q0 = f.query_count
    rest = sorted(range(f.n) if ground is None else ground)
    S: list[int] = []
    fS = 0.0
    trace = []
    while len(S) < k and rest:
        best, best_val = None, -math.inf
        for e in rest:
            v = f(S + [e])
            if v > best_val + TOL:
                best, best_val = e, v
        trace.append(TraceEvent("add", best, best_val - fS))
        S.append(best)
        rest.remove(best)
        fS = best_val
    return RunResult(frozenset(S), frozenset(), fS, f.query_count - q0, trace)


def cardinality_max(f: ValueOracle, order: Order, k: int, eps: float, jobs: int = 1) -> RunResult:
    if k < 1:
        raise InputError("cardinality k must be at least 1")
    return solve("cardinality", f, order, Cardinality(k), eps, jobs=jobs)


# ---------------------------------------------------------------------------
# Budget


def budget_threshold_add(f: ValueOracle, order: Order, bc: Budget, tau: float) -> RunResult:
    """Single pass accepting elements that fit and clear ``tau`` per unit budget."""
    q0 = f.query_count
    b, B = bc.budgets, bc.B
    S: list[int] = []
    fS, used = 0.0, 0.0
    trace = []
    for e in order:
        if b[e] > B + TOL:
            trace.append(TraceEvent("drop", e))
            continue
        if b[e] > B - used + TOL:
            # cannot fit; still parsed, no query needed
            trace.append(TraceEvent("reject", e, math.nan))
            continue
        val = f(S + [e])
        gain = val - fS
        if gain >= tau * b[e] - TOL:
            S.append(e)
            fS, used = val, used + b[e]
            trace.append(TraceEvent("add", e, gain))
        else:
            trace.append(TraceEvent("reject", e, gain))
    return RunResult(frozenset(S), frozenset(), fS, f.query_count - q0, trace,
                     ParamSetting("budget_third", tau))


def budget_third(f: ValueOracle, order: Order, bc: Budget, eps: float, jobs: int = 1) -> RunResult:
    return solve("budget_third", f, order, bc, eps, jobs=jobs)


def final_add(bc: Budget, eps: float, S: Sequence[int], j: int) -> tuple[list[int], list[int], bool]:
    """Make room for ``j`` by discarding small-budget elements of S.

    Elements with budget below ``eps * B`` are removed in the order they appear
    in ``S`` (parse order, so smallest rank first) until ``j`` fits. If ``j``
    cannot fit even after removing all of them, S is returned untouched.
    Returns ``(new_S, removed, added)``.
    """
    b, B = bc.budgets, bc.B
    S = list(S)
    used = sum(b[i] for i in S)
    if b[j] + used <= B + TOL:
        return S + [j], [], True
    small = [i for i in S if b[i] < eps * B]
    if b[j] + used - sum(b[i] for i in small) > B + TOL:
        return S, [], False
    removed = []
    for i in small:
        if b[j] + used <= B + TOL:
            break
        removed.append(i)
        used -= b[i]
    gone = set(removed)
    return [i for i in S if i not in gone] + [j], removed, True


def _budget_half_run(f: ValueOracle, order: Order, bc: Budget, tau: float,
                     X: frozenset[int], eps: float) -> RunResult:
    q0 = f.query_count
    b, B = bc.budgets, bc.B
    cap = min((b[i] for i in X), default=B)
    S: list[int] = []
    R: list[int] = []
    fS, used = 0.0, 0.0
    trace = []
    finished_by_final_add = False
    for e in order:
        if used >= B - TOL:
            break
        if b[e] > B + TOL or (e not in X and b[e] > cap + TOL):
            trace.append(TraceEvent("drop", e))
            continue
        val = f(S + [e])
        gain = val - fS
        if gain < tau * b[e] - TOL:
            trace.append(TraceEvent("reject", e, gain))
            continue
        if used + b[e] <= B + TOL:
            S.append(e)
            fS, used = val, used + b[e]
            trace.append(TraceEvent("add", e, gain))
            continue
        new_S, removed, added = final_add(bc, eps, S, e)
        if added:
            S, R = new_S, R + removed
            trace.append(TraceEvent("final_add", e, gain, tuple(removed)))
            finished_by_final_add = True
        else:
            trace.append(TraceEvent("reject", e, gain))
        break
    if finished_by_final_add:
        fS = f(S)
    res = RunResult(frozenset(S), frozenset(R), fS, f.query_count - q0, trace,
                    ParamSetting("budget_half", tau, X, eps))
    res.info["final_add"] = finished_by_final_add
    return res


def budget_half(f: ValueOracle, order: Order, bc: Budget, eps: float, jobs: int = 1) -> RunResult:
    _check_eps(eps, 0.5)
    return solve("budget_half", f, order, bc, eps, jobs=jobs)


# ---------------------------------------------------------------------------
# Matroid


def matroid_local_search(f: ValueOracle, order: Order, m: Matroid) -> RunResult:
    """Ordered local search where a swap must beat the accumulated chain value."""
    q0 = f.query_count
    iq0 = m.queries
    d = m.d
    S: set[int] = set()
    SR: list[int] = []
    R: list[int] = []
    fSR = 0.0
    v: dict[int, float] = {}
    trace = []
    marginal_queries = 0
    for j in order:
        # |S| = d means S + j is dependent; skip the independence query
        indep = len(S) < d and m.is_independent(S | {j})
        val = f(SR + [j])
        marginal_queries += 1
        gain = val - fSR
        if indep:
            v[j] = gain
            S.add(j)
            SR.append(j)
            fSR = val
            trace.append(TraceEvent("add", j, gain))
            continue
        C = circuit(m, S, j)
        i_star = min(C - {j}, key=lambda i: (v[i], i))
        v_C = v[i_star]
        if gain > v_C + TOL:
            v[j] = v_C + gain
            S.remove(i_star)
            S.add(j)
            R.append(i_star)
            SR.append(j)
            fSR = val
            trace.append(TraceEvent("swap", j, gain, (i_star,)))
        else:
            trace.append(TraceEvent("reject", j, gain))
    if R:
        value = f(S)
    else:
        value = fSR
    res = RunResult(frozenset(S), frozenset(R), value, f.query_count - q0, trace,
                    ParamSetting("matroid"))
    res.info.update(values=dict(v), marginal_queries=marginal_queries,
                    independence_queries=m.queries - iq0)
    return res


# ---------------------------------------------------------------------------
# Parameter enumeration and the generic driver


def _singletons(f: ValueOracle, elements) -> dict[int, float]:
    return {e: f([e]) for e in elements}


def _params_from_singletons(tag: str, single: dict[int, float], constraint, eps: float,
                            ground: Sequence[int]) -> list[ParamSetting]:
    if tag == "matroid":
        return [ParamSetting("matroid")]
    if tag == "cardinality":
        k = constraint.k
        top = max(single.values(), default=0.0)
        if top <= 0:
            return []
        base = top / k
        return [ParamSetting("cardinality", base * (1 + eps) ** i)
                for i in range(_grid_size(k, eps))]
    b, B = constraint.budgets, constraint.B
    fits = [e for e in ground if b[e] <= B + TOL]
    if tag == "budget_third":
        top = max((single[e] for e in fits), default=0.0)
        if top <= 0 or B <= 0:
            return []
        return [ParamSetting("budget_third", top / B * (1 + eps) ** i)
                for i in range(_grid_size(len(fits), eps))]
    # budget_half: enumerate small sets X, filter, grid per X
    settings = []
    max_size = math.floor(1 / eps + 1e-12)
    for size in range(0, max_size + 1):
        for X in combinations(sorted(fits), size):
            if sum(b[i] for i in X) > B + TOL:
                continue
            X = frozenset(X)
            cap = min((b[i] for i in X), default=B)
            kept = [e for e in fits if e in X or b[e] <= cap + TOL]
            top = max((single[e] for e in kept), default=0.0)
            if top <= 0 or B <= 0:
                continue
            for i in range(_grid_size(len(kept), eps)):
                settings.append(ParamSetting("budget_half", top / B * (1 + eps) ** i, X, eps))
    return settings


def _needs_singletons(tag: str) -> bool:
    return tag != "matroid"


def _validate(tag: str, constraint, eps: float, closed: bool = False) -> None:
    if tag not in TAGS:
        raise InputError(f"unknown algorithm tag {tag!r}")
    if tag == "cardinality":
        if not isinstance(constraint, Cardinality):
            raise InputError("cardinality algorithm needs a Cardinality constraint")
        if constraint.k < 1:
            raise InputError("cardinality k must be at least 1")
        _check_eps(eps, 1.0, closed)
    elif tag in ("budget_third", "budget_half"):
        if not isinstance(constraint, Budget):
            raise InputError(f"{tag} needs a Budget constraint")
        _check_eps(eps, 0.5 if tag == "budget_half" else 1.0, closed)
    elif not isinstance(constraint, Matroid):
        raise InputError("matroid algorithm needs a Matroid constraint")


def enumerate_params(tag: str, f: ValueOracle, constraint, eps: float = 0.1,
                     ground: Sequence[int] | None = None) -> list[ParamSetting]:
    """The parameter settings a composite algorithm runs over.

    Thresholds are anchored at the largest singleton value over ``ground``
    (default: the whole ground set), which costs one query per element.
    The upper end of the epsilon range is accepted here so grid sizes can be
    inspected at the boundary.
    """
    _validate(tag, constraint, eps, closed=True)
    ground = list(range(f.n)) if ground is None else list(ground)
    single = _singletons(f, ground) if _needs_singletons(tag) else {}
    return _params_from_singletons(tag, single, constraint, eps, ground)


def run_one(setting: ParamSetting, f: ValueOracle, order: Order, constraint) -> RunResult:
    """One pass over ``order`` under a fixed parameter setting."""
    if setting.algo == "cardinality":
        return threshold_add(f, order, constraint.k, setting.tau)
    if setting.algo == "budget_third":
        return budget_threshold_add(f, order, constraint, setting.tau)
    if setting.algo == "budget_half":
        return _budget_half_run(f, order, constraint, setting.tau, setting.X, setting.eps)
    return matroid_local_search(f, order, constraint)


def best_run(runs: Sequence[RunResult]) -> RunResult | None:
    """Highest value; ties go to the earliest run."""
    best = None
    for r in runs:
        if best is None or r.value > best.value + TOL:
            best = r
    return best


def _run_all(settings, f, order, constraint, jobs):
    if jobs <= 1 or len(settings) <= 1:
        return [run_one(g, f, order, constraint) for g in settings]

    def task(g):
        return run_one(g, f.clone(), order, _fresh(constraint))

    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(task, settings))


def _fresh(constraint):
    if isinstance(constraint, Matroid):
        import copy
        c = copy.copy(constraint)
        c.queries = 0
        return c
    return constraint


def solve(tag: str, f: ValueOracle, order: Order, constraint, eps: float = 0.1,
          jobs: int = 1) -> RunResult:
    """Best run over ``enumerate_params``; budget_third also tries every singleton."""
    _validate(tag, constraint, eps)
    q0 = f.query_count
    ground = list(order)
    single = _singletons(f, ground) if _needs_singletons(tag) else {}
    settings = _params_from_singletons(tag, single, constraint, eps, ground)
    runs = _run_all(settings, f, order, constraint, jobs)
    candidates = list(runs)
    if tag == "budget_third":
        for e in ground:
            if constraint.budgets[e] <= constraint.B + TOL:
                candidates.append(RunResult(frozenset([e]), frozenset(), single[e], 0,
                                            [TraceEvent("add", e, single[e])]))
    best = best_run(candidates)
    total = (f.query_count - q0) + (sum(r.queries for r in runs) if jobs > 1 else 0)
    if best is None:
        best = RunResult(frozenset(), frozenset(), 0.0, 0)
    out = RunResult(best.S, best.R, best.value, total, best.trace, best.setting, runs,
                    dict(best.info))
    out.info["singleton_queries"] = len(single)
    return out
