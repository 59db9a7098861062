import math

import pytest

from subord.algorithms import (ParamSetting, budget_half, budget_third, budget_threshold_add,
                               cardinality_max, enumerate_params, final_add, greedy,
                               matroid_local_search, run_one, solve, threshold_add)
from subord.constraints import Budget, Cardinality, FreeMatroid, UniformMatroid
from subord.core import InputError, ModularFunction, Order, SetFunction
from subord.instances import gen_example1, gen_random_submodular
from helpers import corpus, random_budgets, random_matroid
from oracles import opt_over

EPS = 0.1


def assert_single_pass(res, order):
    for run in res.runs or [res]:
        ranks = [order.rank[e] for e in run.parsed]
        assert ranks == sorted(set(ranks))


# threshold add / cardinality ----------------------------------------------------


def test_threshold_add_example1_collects_good_elements():
    f, order = gen_example1(5, 0.01)
    res = threshold_add(f, order, 5, 0.5)
    assert res.S == frozenset(range(5)) and res.value == 5 and res.R == frozenset()


def test_threshold_add_high_threshold_is_empty():
    f = gen_random_submodular(8, 1)
    top = max(f.peek([e]) for e in range(8))
    assert threshold_add(f, Order.identity(8), 3, top * 1.01).S == frozenset()


def test_threshold_add_one_query_per_parsed_element():
    f = gen_random_submodular(10, 2)
    res = threshold_add(f, Order.identity(10), 3, 0.5)
    assert res.queries == len(res.parsed)


@pytest.mark.parametrize("seed", range(10))
def test_threshold_add_half_of_opt_at_right_threshold(seed):
    n, k = 10, 3
    f = gen_random_submodular(n, seed)
    opt = opt_over(f, lambda S: len(S) <= k, n)
    res = threshold_add(f, Order.identity(n), k, opt / (2 * k))
    assert res.value >= opt / 2 - 1e-9
    assert res.value >= len(res.S) * opt / (2 * k) - 1e-9


def test_cardinality_example1_reaches_opt_while_greedy_fails():
    f, order = gen_example1(5, 0.01)
    assert cardinality_max(f, order, 5, EPS).value == 5
    assert greedy(f, 5).value == pytest.approx(1.05, abs=1e-12)


def test_cardinality_k1_returns_best_singleton():
    f = gen_random_submodular(9, 4)
    assert cardinality_max(f, Order.identity(9), 1, EPS).value == max(f.peek([e]) for e in range(9))


def test_cardinality_rejects_bad_k():
    with pytest.raises(InputError):
        cardinality_max(gen_random_submodular(3, 0), Order.identity(3), 0, EPS)


@pytest.mark.parametrize("name,f,order,n", corpus(20, 10), ids=lambda x: x if isinstance(x, str) else "")
def test_cardinality_ratio_and_queries(name, f, order, n):
    k = 4
    opt = opt_over(f, lambda S: len(S) <= k, n)
    res = cardinality_max(f, order, k, EPS)
    assert res.value >= (1 - EPS) * 0.5 * opt - 1e-9
    assert res.queries <= 4 * n / EPS * math.log(k)
    assert_single_pass(res, order)
    for run in res.runs:
        assert run.value >= len(run.S) * run.setting.tau - 1e-9


def test_composite_ties_keep_lowest_setting():
    f = ModularFunction([1.0, 1.0, 1.0])
    res = cardinality_max(f, Order.identity(3), 2, 0.5)
    best = [r.value for r in res.runs]
    assert res.setting == res.runs[best.index(max(best))].setting


def test_parallel_runs_match_sequential():
    f = gen_random_submodular(10, 7)
    a = cardinality_max(f, Order.identity(10), 3, EPS)
    b = cardinality_max(gen_random_submodular(10, 7), Order.identity(10), 3, EPS, jobs=4)
    assert a.S == b.S and a.value == b.value and a.queries == b.queries


# budget ----------------------------------------------------------------------


def test_unit_budget_threshold_add_matches_cardinality():
    for seed in range(5):
        f = gen_random_submodular(10, seed)
        o = Order.identity(10)
        a = threshold_add(f, o, 3, 0.8)
        b = budget_threshold_add(f, o, Budget.unit(10, 3), 0.8)
        assert a.S == b.S


def test_budget_threshold_add_stops_at_exhausted_budget():
    f = ModularFunction([1.0, 1.0])
    res = budget_threshold_add(f, Order.identity(2), Budget([5, 5], 5), 1e-6)
    assert res.S == {0}


@pytest.mark.parametrize("seed", range(10))
def test_budget_threshold_accounting(seed):
    f = gen_random_submodular(10, seed)
    b, B = random_budgets(10, seed)
    bc = Budget(b, B)
    res = budget_threshold_add(f, Order.identity(10), bc, 0.3)
    assert res.value >= 0.3 * bc.cost(res.S) - 1e-9
    assert bc.feasible(res.S)


def test_budget_third_takes_dominant_singleton():
    f = SetFunction(3, lambda S: 10.0 if 2 in S else float(len(S)))
    res = budget_third(f, Order.identity(3), Budget([1, 1, 5], 5), EPS)
    assert res.S == {2} and res.value == 10


@pytest.mark.parametrize("seed", range(20))
def test_budget_third_ratio(seed):
    n = 10
    f = gen_random_submodular(n, seed)
    b, B = random_budgets(n, seed)
    bc = Budget(b, B)
    opt = opt_over(f, bc.feasible, n)
    res = budget_third(f, Order.identity(n), bc, EPS)
    assert bc.feasible(res.S)
    assert res.value >= (1 - EPS) / 3 * opt - 1e-9


@pytest.mark.parametrize("seed", range(5))
def test_budget_third_unit_budgets(seed):
    n, k = 10, 3
    f = gen_random_submodular(n, seed)
    opt = opt_over(f, lambda S: len(S) <= k, n)
    assert budget_third(f, Order.identity(n), Budget.unit(n, k), EPS).value >= (1 - EPS) / 3 * opt - 1e-9


def test_final_add_examples():
    bc = Budget([1, 10], 10)
    S, removed, added = final_add(bc, 0.25, [0], 1)
    assert S == [1] and removed == [0] and added
    bc = Budget([5, 5, 6], 10)
    S, removed, added = final_add(bc, 0.25, [0, 1], 2)
    assert S == [0, 1] and removed == [] and not added


def test_final_add_removes_smallest_rank_first():
    bc = Budget([1, 1, 1, 9], 10)
    S, removed, _ = final_add(bc, 0.25, [2, 0, 1], 3)
    assert removed == [2, 0] and S == [1, 3]


@pytest.mark.parametrize("seed", range(20))
def test_final_add_output_feasible(seed):
    import random
    rng = random.Random(seed)
    b = [rng.randint(1, 6) for _ in range(8)]
    bc = Budget(b, 10)
    S, used = [], 0
    for e in range(7):
        if used + b[e] <= 10:
            S.append(e)
            used += b[e]
    if used + b[7] > 10:
        new_S, removed, added = final_add(bc, 0.3, S, 7)
        assert bc.feasible(new_S)
        assert added == (7 in new_S)
        assert set(removed) <= set(S)


def test_budget_half_rejects_eps():
    f = gen_random_submodular(4, 0)
    for eps in (0.0, 0.5, 0.7):
        with pytest.raises(InputError):
            budget_half(f, Order.identity(4), Budget.unit(4, 2), eps)


def test_budget_half_enumeration_size():
    n, eps = 4, 0.5 - 1e-6
    f = gen_random_submodular(n, 3)
    gamma = enumerate_params("budget_half", f, Budget.unit(n, 2), eps)
    xs = {g.X for g in gamma}
    assert max(len(X) for X in xs) == 2
    n_x = 1 + 4 + 6
    grid = math.ceil(math.log(4) / math.log(1 + eps))
    assert len(xs) == n_x and len(gamma) == n_x * grid


@pytest.mark.parametrize("seed", range(6))
def test_budget_half_at_least_budget_third_on_unit_budgets(seed):
    n = 6
    f = gen_random_submodular(n, seed)
    bc = Budget.unit(n, 3)
    a = budget_half(f, Order.identity(n), bc, 0.5 - 1e-6)
    b = budget_third(f, Order.identity(n), bc, 0.5 - 1e-6)
    assert a.value >= b.value - 1e-9


def test_budget_half_finds_huge_budget_element():
    f = SetFunction(4, lambda S: 10.0 * (3 in S) + 0.5 * len(S - {3}))
    res = budget_half(f, Order.identity(4), Budget([1, 1, 1, 10], 10), 0.25)
    assert res.S == {3}


@pytest.mark.parametrize("seed", range(20))
def test_budget_half_ratio(seed):
    n = 8
    f = gen_random_submodular(n, seed)
    b, B = random_budgets(n, seed)
    bc = Budget(b, B)
    opt = opt_over(f, bc.feasible, n)
    res = budget_half(f, Order.identity(n), bc, 0.25)
    assert bc.feasible(res.S)
    assert res.value >= 0.25 * opt - 1e-9
    assert_single_pass(res, Order.identity(n))
    for run in res.runs:
        assert not (run.S & run.R)
        if not run.info["final_add"]:
            assert run.value >= run.setting.tau * bc.cost(run.S) - 1e-9


# matroid ---------------------------------------------------------------------


def test_matroid_free_takes_everything():
    f = gen_random_submodular(6, 0)
    res = matroid_local_search(f, Order.identity(6), FreeMatroid(6))
    assert res.S == frozenset(range(6)) and res.R == frozenset()


def test_matroid_swap_arithmetic():
    res = matroid_local_search(ModularFunction([1.0, 3.0]), Order.identity(2), UniformMatroid(2, 1))
    assert res.S == {1} and res.R == {0} and res.info["values"][1] == 4


def test_matroid_no_swap_on_tie():
    res = matroid_local_search(ModularFunction([2.0, 2.0]), Order.identity(2), UniformMatroid(2, 1))
    assert res.S == {0} and res.R == frozenset()


def _rank(m, S):
    base = set()
    for e in sorted(S):
        if m.feasible(base | {e}):
            base.add(e)
    return len(base)


def replay_matroid(res, m):
    """Rebuild S after each event; check maximal independence and swap-chain values."""
    S, parsed, v = set(), set(), {}
    for ev in res.trace:
        parsed.add(ev.element)
        if ev.kind == "add":
            S.add(ev.element)
            v[ev.element] = ev.gain
        elif ev.kind == "swap":
            (out,) = ev.removed
            S.remove(out)
            S.add(ev.element)
            v[ev.element] = v[out] + ev.gain
        assert m.feasible(S)
        assert _rank(m, S) == _rank(m, parsed)
    assert S == res.S
    for e in S:
        assert v[e] == pytest.approx(res.info["values"][e], abs=1e-12)


@pytest.mark.parametrize("seed", range(20))
def test_matroid_ratio_and_invariants(seed):
    n = 10
    f = gen_random_submodular(n, seed)
    m = random_matroid(n, seed)
    opt = opt_over(f, m.feasible, n)
    res = matroid_local_search(f, Order.identity(n), m)
    assert res.value >= 0.25 * opt - 1e-9
    assert res.info["marginal_queries"] <= n
    assert res.info["independence_queries"] <= n * m.d
    assert not (res.S & res.R)
    replay_matroid(res, m)


# enumeration -----------------------------------------------------------------


def test_matroid_gamma_is_singleton():
    f = gen_random_submodular(5, 0)
    assert enumerate_params("matroid", f, UniformMatroid(5, 2)) == [ParamSetting("matroid")]


def test_cardinality_grid_size():
    f = gen_random_submodular(6, 0)
    assert len(enumerate_params("cardinality", f, Cardinality(4), 1.0)) == 2


def test_unknown_tag():
    with pytest.raises(InputError):
        enumerate_params("nope", gen_random_submodular(3, 0), Cardinality(1))


def test_best_over_run_one_equals_composite():
    f = gen_random_submodular(9, 5)
    o = Order.identity(9)
    gamma = enumerate_params("cardinality", f, Cardinality(3), EPS)
    best = max(run_one(g, f, o, Cardinality(3)).value for g in gamma)
    assert solve("cardinality", f, o, Cardinality(3), EPS).value == best
