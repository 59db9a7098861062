import json
from itertools import combinations

import numpy as np
import pytest

from subord.algorithms import greedy
from subord.assortment import ChoiceObjective
from subord.core import CoverageFunction, InputError, ModularFunction
from subord.instances import (InstanceError, gen_example1, gen_hidden_set, gen_markov_4item,
                              gen_random_markov, gen_random_mixture, gen_random_mnl,
                              gen_random_submodular, instance_from_dict, instance_from_model,
                              instance_from_table, load_instance, save_instance)
from subord.verify import (check_monotone, check_strong_order, check_subadditive,
                           check_substitutable)
from oracles import subsets


def test_example1_values():
    k, e = 5, 0.01
    f, order = gen_example1(k, e)
    assert f.n == 11 and order.perm == tuple(range(11))
    assert f({2 * k}) == pytest.approx(1 + e)
    assert f(range(k)) == k
    assert f({0, 1, 2 * k, 7}) == pytest.approx(2 + e)
    assert greedy(f, k).value == pytest.approx(1 + k * e, abs=1e-12)


def test_example1_rejects_bad_params():
    with pytest.raises(InputError):
        gen_example1(1, 0.1)


def _alpha_form(n1, k1, k2, r, A1, S):
    """Value assembled from the closed-form pieces used in the construction."""
    S1 = {e for e in S if e < n1}
    S2 = {e for e in S if e >= n1}
    f1 = min(len(S1), 2 * k1)
    lost = min(1.0, (len(S1 - A1) + min(r, len(S1 & A1))) / k1)
    return f1 + (k1 / k2) * len(S2) * (1 - lost)


def test_hidden_set_formulas():
    n1, k1, k2, r = 8, 3, 2, 1
    f, order, A1 = gen_hidden_set(n1, k1, k2, r, seed=5)
    assert len(A1) == k1 and A1 <= set(range(n1))
    N2 = frozenset(range(n1, n1 + k2))
    assert f(A1 | N2) == pytest.approx(2 * k1 - r)
    alpha = k1 / k2
    for S in subsets(range(n1)):
        if len(S & A1) <= r:
            want = alpha * k2 * (1 - min(1, len(S) / k1))
            assert f.peek(S | N2) - f.peek(S) == pytest.approx(want)
    for S in list(subsets(range(n1 + k2)))[::7]:
        assert f.peek(S) == pytest.approx(_alpha_form(n1, k1, k2, r, A1, S))


def test_hidden_set_optimum_is_planted():
    n1, k1, k2, r = 7, 3, 2, 1
    f, _, A1 = gen_hidden_set(n1, k1, k2, r, seed=1)
    k = k1 + k2
    best = max((f.peek(S), S) for S in map(frozenset, combinations(range(n1 + k2), k)))
    assert best[0] == pytest.approx(2 * k1 - r)


def test_hidden_set_tiny_properties():
    f, order, _ = gen_hidden_set(6, 2, 1, 1)
    assert check_monotone(f) is None
    assert check_subadditive(f) is None
    assert check_strong_order(f, order) is None


def test_hidden_set_not_submodular():
    f, _, A1 = gen_hidden_set(6, 3, 2, 1, seed=0)
    a = sorted(A1)
    N2 = frozenset({6, 7})
    B1 = frozenset(a[:2])
    assert f.peek(B1 | N2 | {a[2]}) - f.peek(B1 | N2) == pytest.approx(1)
    assert f.peek(N2 | {a[2]}) - f.peek(N2) == pytest.approx(0)


@pytest.mark.parametrize("params", [(3, 3, 1, 0), (5, 3, 3, 1), (5, 3, 1, 3), (5, 0, 0, 0)])
def test_hidden_set_param_rules(params):
    with pytest.raises(InputError):
        gen_hidden_set(*params)


def test_generators_deterministic():
    a, b = gen_random_submodular(8, 3), gen_random_submodular(8, 3)
    assert all(a.peek(S) == b.peek(S) for S in subsets(range(8)))
    assert gen_random_mnl(6, 2) == gen_random_mnl(6, 2)
    assert gen_random_markov(6, 2) == gen_random_markov(6, 2)
    x, y = gen_random_mixture(5, 2, 1), gen_random_mixture(5, 2, 1)
    assert np.array_equal(x.alpha, y.alpha) and x.models == y.models


def test_markov_generator_invariants():
    m = gen_random_markov(7, 4)
    assert np.all(np.diag(m.rho) == 0)
    assert m.lam.sum() + m.lam0 == pytest.approx(1)
    assert np.allclose(m.rho.sum(axis=1) + m.rho0, 1)


def test_markov_4item_fixture():
    m = gen_markov_4item()
    assert list(m.r) == [8, 4, 4, 2] and m.lam[1] == 1
    assert ChoiceObjective(m)({0, 1}) == pytest.approx(4)


def test_disjoint_coverage_is_modular():
    f = CoverageFunction([[0, 1], [2], [3, 4, 5]], [1.0, 2.0, 0.5, 1.0, 1.0, 3.0])
    g = ModularFunction([3.0, 0.5, 5.0])
    assert all(f.peek(S) == pytest.approx(g.peek(S)) for S in subsets(range(3)))


def test_random_mnl_substitutable():
    assert check_substitutable(gen_random_mnl(8, 0)) is None


# files ------------------------------------------------------------------------


def test_round_trip_markov4(tmp_path):
    inst = instance_from_model(gen_markov_4item(), {"type": "cardinality", "k": 2}, name="markov4")
    save_instance(inst, tmp_path / "m.json")
    back = load_instance(tmp_path / "m.json")
    assert back.model == inst.model
    assert back.to_dict() == inst.to_dict()


@pytest.mark.parametrize("model", [gen_random_mnl(5, 1), gen_random_mixture(5, 3, 2)])
def test_round_trip_models(tmp_path, model):
    inst = instance_from_model(model, {"type": "matroid", "matroid": "uniform", "k": 2},
                               order=[4, 3, 2, 1, 0])
    save_instance(inst, tmp_path / "x.json")
    back = load_instance(tmp_path / "x.json")
    assert back.to_dict() == inst.to_dict()
    f, g = inst.oracle(), back.oracle()
    assert all(f.peek(S) == g.peek(S) for S in subsets(range(5)))
    assert back.get_order().perm == (4, 3, 2, 1, 0)


def test_round_trip_table(tmp_path):
    inst = instance_from_table(gen_random_submodular(4, 0),
                               {"type": "budget", "budgets": [1, 2, 1, 2], "B": 3})
    save_instance(inst, tmp_path / "t.json")
    back = load_instance(tmp_path / "t.json")
    assert back.to_dict() == inst.to_dict()
    assert back.build_constraint().B == 3


def test_missing_constraint_is_unconstrained():
    inst = instance_from_dict({"kind": "example1", "k": 3, "eps_f": 0.1})
    assert inst.constraint_kind == "unconstrained" and inst.build_constraint() is None


def test_bad_row_names_the_row(tmp_path):
    rho = [[0.0, 0.5, 0.5], [0.6, 0.0, 0.6], [0.0, 0.0, 0.0]]
    p = tmp_path / "bad.json"
    p.write_text(json.dumps({"kind": "markov", "lam": [0.3, 0.3, 0.3], "rho": rho, "r": [1, 2, 3]}))
    with pytest.raises(InstanceError, match="row 1"):
        load_instance(p)


def test_parse_errors_have_context(tmp_path):
    p = tmp_path / "broken.json"
    p.write_text('{"kind": "mnl",\n "v": [1, 2,\n}')
    with pytest.raises(InstanceError, match="line 3"):
        load_instance(p)
    with pytest.raises(InstanceError, match="v0"):
        instance_from_dict({"kind": "mnl", "v": [1], "r": [1]})
    with pytest.raises(InstanceError, match="kind"):
        instance_from_dict({"kind": "nope"})
    with pytest.raises(InstanceError, match="budgets"):
        instance_from_dict({"kind": "example1", "k": 2, "eps_f": 0.1,
                            "constraint": {"type": "budget", "budgets": [1], "B": 1}})
    with pytest.raises(InstanceError, match="order"):
        instance_from_dict({"kind": "example1", "k": 2, "eps_f": 0.1, "order": [0, 0, 1, 2, 3]})


def test_explicit_table_cap():
    with pytest.raises(InstanceError):
        instance_from_dict({"kind": "explicit-function", "n": 17, "values": []})


def test_hidden_set_instance_file():
    inst = instance_from_dict({"kind": "hidden-set", "n1": 6, "k1": 2, "k2": 1, "r": 1,
                               "constraint": {"type": "cardinality", "k": 3}})
    assert inst.n == 7
    assert inst.oracle()(inst.model | {6}) == pytest.approx(3)
