"""Phase-based constrained assortment optimization.

When no global order is known, the order is built incrementally: parse the
current optimal unconstrained assortment, keep what the algorithm keeps,
discard what it rejected, re-optimize over what is left, and append any newly
optimal products to the end of the order.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .algorithms import (RunResult, TraceEvent, _params_from_singletons, _singletons,
                         _validate, best_run, run_one)
from .assortment import ChoiceObjective
from .core import TOL, InputError, Order, ValueOracle
from .verify import EnumerationCapError, Witness, value_table


class FrameworkError(RuntimeError):
    """Phase loop failed to terminate within n + 1 phases."""


@dataclass
class PhaseHistory:
    """Per-phase (new elements, kept new elements) plus the final order."""

    phases: list[tuple[frozenset[int], frozenset[int]]] = field(default_factory=list)
    order: tuple[int, ...] = ()

    def full_order(self, n: int) -> Order:
        tail = sorted(set(range(n)) - set(self.order))
        return Order(tuple(self.order) + tuple(tail))


def _phase_loop(setting, f: ChoiceObjective, constraint, n: int):
    remaining = frozenset(range(n))
    active = f.U(remaining)
    order = sorted(active)
    kept: frozenset[int] = frozenset()
    hist = PhaseHistory()
    result = None
    for _ in range(n + 1):
        new = active - kept
        if not new:
            break
        result = run_one(setting, f, Order(tuple(order)), constraint)
        kept_now = result.S | result.R
        hist.phases.append((frozenset(new), frozenset(kept_now & new)))
        remaining = (remaining - active) | kept_now
        active_next = f.U(remaining) | kept_now
        order = [e for e in order if e in kept_now]
        order += sorted(active_next - kept_now)
        active, kept = active_next, kept_now
    else:
        raise FrameworkError("phase loop exceeded n + 1 phases")
    # new elements enter the order in ascending id, phase by phase
    hist.order = tuple(e for N, _ in hist.phases for e in sorted(N))
    if result is None:
        result = RunResult(frozenset(), frozenset(), 0.0, 0, [], setting)
    result.info["history"] = hist
    return result


def run_framework(tag: str, model, constraint, eps: float = 0.1,
                  f: ValueOracle | None = None) -> RunResult:
    """Best phase-loop result over the algorithm's parameter settings.

    Settings are fixed once from the full ground set. The returned result
    carries every per-setting run in ``runs``; each has its phase history in
    ``info['history']``.
    """
    _validate(tag, constraint, eps)
    f = ChoiceObjective(model) if f is None else f
    n = model.n
    q0 = f.query_count
    ground = list(range(n))
    single = _singletons(f, ground) if tag != "matroid" else {}
    settings = _params_from_singletons(tag, single, constraint, eps, ground)
    runs = [_phase_loop(g, f, constraint, n) for g in settings]
    candidates = list(runs)
    if tag == "budget_third":
        for e in ground:
            if constraint.budgets[e] <= constraint.B + TOL:
                candidates.append(RunResult(frozenset([e]), frozenset(), single[e], 0,
                                            [TraceEvent("add", e, single[e])]))
    best = best_run(candidates) or RunResult(frozenset(), frozenset(), 0.0, 0)
    out = RunResult(best.S, best.R, best.value, f.query_count - q0, best.trace,
                    best.setting, runs, dict(best.info))
    out.info["phases"] = len(out.info["history"].phases) if "history" in out.info else 0
    return out


def _proper_pairs(pieces, n, literal=False):
    """(A, allowed-B mask) pairs for every proper set A.

    A is any subset of one parsed piece plus kept elements of earlier pieces;
    B may be any subset of A. Elements never parsed (the tail) may also
    join A on top of kept elements. By default B is then limited to the kept
    part; ``literal`` lets B range over all subsets of A there too.
    """
    out = {}
    kept = 0
    covered = 0
    for N, M in pieces:
        N_mask = sum(1 << e for e in N)
        covered |= N_mask
        kept_subsets = _submasks(kept)
        for sub in _submasks(N_mask):
            for k in kept_subsets:
                out[sub | k] = -1
        kept |= sum(1 << e for e in M)
    tail = ((1 << n) - 1) & ~covered
    for sub in _submasks(tail):
        if sub == 0:
            continue
        for k in _submasks(kept):
            out.setdefault(sub | k, -1 if literal else kept)
    return sorted(out.items())


def _submasks(mask: int) -> list[int]:
    out = []
    sub = mask
    while True:
        out.append(sub)
        if sub == 0:
            break
        sub = (sub - 1) & mask
    return out


def check_piecewise_order(f: ValueOracle, phases, order: Order, n: int | None = None,
                          form: str = "kept-base"):
    """Exhaustive check of f(C|A) <= f(C|B) over proper A, B in A, C right of A.

    ``phases`` is the list of (N_i, M_i) pairs of the phases that ran
    (``PhaseHistory.phases``). With ``form="kept-base"`` a set reaching into
    the never-parsed tail is only compared against subsets of its kept part;
    ``form="literal"`` compares it against every subset. Returns None or a
    Witness.
    """
    if form not in ("kept-base", "literal"):
        raise InputError(f"unknown piecewise form {form!r}")
    n = f.n if n is None else n
    if n > 12:
        raise EnumerationCapError("piecewise order check limited to n <= 12")
    table = value_table(f, n)
    rank = np.array([order.rank[e] for e in range(n)])
    full = (1 << n) - 1
    masks_all = np.arange(1 << n)
    for A, b_limit in _proper_pairs(phases, n, literal=form == "literal"):
        members = [e for e in range(n) if A >> e & 1]
        right = full
        if members:
            r_A = max(rank[e] for e in members)
            right = sum(1 << e for e in range(n) if rank[e] > r_A)
        C = masks_all[(masks_all & ~right) == 0]
        C = C[C != 0]
        if C.size == 0:
            continue
        gain_A = table[C | A] - table[A]
        for B in _submasks(A if b_limit < 0 else A & b_limit):
            if B == A:
                continue
            gain_B = table[C | B] - table[B]
            bad = np.flatnonzero(gain_A > gain_B + TOL)
            if bad.size:
                c = int(C[bad[0]])
                return Witness("piecewise-order", A=_bits(A), B=_bits(B), C=_bits(c),
                               slack=float(gain_A[bad[0]] - gain_B[bad[0]]))
    return None


def _bits(mask: int) -> frozenset[int]:
    return frozenset(e for e in range(mask.bit_length()) if mask >> e & 1)
