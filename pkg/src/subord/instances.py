"""Instance generators and the JSON instance file format.

File layout (one JSON object)::

    {"kind": "mnl", "v": [...], "v0": 1.0, "r": [...],
     "constraint": {"type": "cardinality", "k": 3},
     "order": [2, 0, 1]}

``kind`` is one of explicit-function, mnl, markov, mixture, hidden-set,
example1. ``constraint`` and ``order`` are optional.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .assortment import ChoiceObjective, MarkovModel, MixtureMNL, MNLModel, mixture_oracle
from .constraints import (Budget, Cardinality, ExplicitMatroid, FreeMatroid, PartitionMatroid,
                          UniformMatroid)
from .core import (CoverageFunction, InputError, Order, SetFunction, TableFunction,
                   ValueOracle)

KINDS = ("explicit-function", "mnl", "markov", "mixture", "hidden-set", "example1")
EXPLICIT_MAX_N = 16


class InstanceError(InputError):
    """Malformed instance file or parameters; the message names the field."""


# ---------------------------------------------------------------------------
# Named constructions


def example1_value(k: int, eps_f: float, S) -> float:
    good = sum(1 for e in S if e < k)
    poor = sum(1 for e in S if k <= e < 2 * k)
    if 2 * k in S:
        return max(good, 1 + eps_f) + eps_f * poor
    return good + eps_f * poor


def gen_example1(k: int, eps_f: float):
    """Good items 0..k-1, poor items k..2k-1, and one tempting item 2k.

    Returns ``(oracle, natural order)``.
    """
    if k < 2 or not 0 < eps_f < 1:
        raise InputError("need k >= 2 and 0 < eps_f < 1")
    n = 2 * k + 1
    f = SetFunction(n, lambda S: example1_value(k, eps_f, S))
    return f, Order.identity(n)


def hidden_set_value(n1: int, k1: int, k2: int, r: int, A1: frozenset[int], S) -> float:
    S1 = [e for e in S if e < n1]
    s2 = len(S) - len(S1)
    inside = sum(1 for e in S1 if e in A1)
    base = min(len(S1), 2 * k1)
    covered = (len(S1) - inside + min(r, inside)) / k1
    return base + (k1 / k2) * s2 * (1 - min(1.0, covered))


def gen_hidden_set(n1: int, k1: int, k2: int, r: int, seed: int = 0):
    """Planted instance: a k1-subset A1 of the first n1 items is hard to find.

    The last k2 items are only valuable on top of few first-block items,
    unless those items come from A1. Returns ``(oracle, order, A1)``.
    """
    if not (n1 > k1 > k2 >= 1) or not 0 <= r < k1:
        raise InputError("need n1 > k1 > k2 >= 1 and 0 <= r < k1")
    rng = np.random.default_rng(seed)
    A1 = frozenset(int(e) for e in rng.choice(n1, size=k1, replace=False))
    n = n1 + k2
    f = SetFunction(n, lambda S: hidden_set_value(n1, k1, k2, r, A1, S))
    return f, Order.identity(n), A1


def gen_random_submodular(n: int, seed: int = 0, universe: int | None = None) -> CoverageFunction:
    """Random weighted coverage function."""
    if n < 1:
        raise InputError("n must be at least 1")
    rng = np.random.default_rng(seed)
    universe = universe or 2 * n
    weights = rng.uniform(0.5, 2.0, size=universe).round(3)
    covers = []
    for _ in range(n):
        size = int(rng.integers(1, max(2, universe // 3) + 1))
        covers.append(sorted(rng.choice(universe, size=size, replace=False).tolist()))
    return CoverageFunction(covers, weights.tolist())


def gen_random_mnl(n: int, seed: int = 0) -> MNLModel:
    if n < 1:
        raise InputError("n must be at least 1")
    rng = np.random.default_rng(seed)
    v = rng.uniform(0.1, 2.0, size=n).round(4)
    r = rng.uniform(1.0, 10.0, size=n).round(2)
    v0 = round(float(rng.uniform(0.5, 3.0)), 4)
    return MNLModel(v, v0, r)


def gen_random_markov(n: int, seed: int = 0) -> MarkovModel:
    """Dirichlet arrivals and rows; no self loops; every row leaks to the outside."""
    if n < 1:
        raise InputError("n must be at least 1")
    rng = np.random.default_rng(seed)
    lam = rng.dirichlet(np.ones(n + 1))[:n]
    rho = np.zeros((n, n))
    for i in range(n):
        row = rng.dirichlet(np.ones(n))  # n-1 products plus the outside option
        others = [j for j in range(n) if j != i]
        rho[i, others] = row[:-1]
    r = rng.uniform(1.0, 10.0, size=n).round(2)
    return MarkovModel(lam, rho, r)


def gen_markov_4item() -> MarkovModel:
    """Everyone arrives at item 1, which forwards to items 0, 2, 3 equally;
    the other items exit when not offered."""
    rho = np.zeros((4, 4))
    rho[1, [0, 2, 3]] = 1 / 3
    return MarkovModel([0.0, 1.0, 0.0, 0.0], rho, [8.0, 4.0, 4.0, 2.0])


def gen_random_mixture(n: int, m: int, seed: int = 0) -> MixtureMNL:
    rng = np.random.default_rng(seed)
    r = rng.uniform(1.0, 10.0, size=n).round(2)
    alpha = rng.dirichlet(np.ones(m))
    models = [MNLModel(rng.uniform(0.1, 2.0, size=n).round(4),
                       round(float(rng.uniform(0.5, 3.0)), 4), r) for _ in range(m)]
    return MixtureMNL(alpha, models)


# ---------------------------------------------------------------------------
# Instance objects and serialization


@dataclass
class Instance:
    kind: str
    params: dict[str, Any]
    constraint: dict[str, Any] | None = None
    order: list[int] | None = None
    name: str | None = None
    _model: Any = field(default=None, init=False, repr=False, compare=False)
    _aux: Any = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InstanceError(f"kind: unknown instance kind {self.kind!r}; expected one of {KINDS}")
        self._build()
        if self.order is not None:
            try:
                o = Order(tuple(self.order))
            except InputError as exc:
                raise InstanceError(f"order: {exc}") from None
            if not o.is_permutation_of(self.n):
                raise InstanceError(f"order: must be a permutation of 0..{self.n - 1}")
        if self.constraint is not None:
            self.build_constraint()

    @property
    def constraint_kind(self) -> str:
        return "unconstrained" if self.constraint is None else self.constraint["type"]

    @property
    def is_choice_model(self) -> bool:
        return self.kind in ("mnl", "markov", "mixture")

    @property
    def model(self):
        return self._model

    @property
    def n(self) -> int:
        if self.kind in ("mnl", "markov", "mixture"):
            return self._model.n
        return self._aux.n

    def _build(self) -> None:
        p = self.params
        try:
            if self.kind == "mnl":
                self._model = MNLModel(_req(p, "v"), _req(p, "v0"), _req(p, "r"))
            elif self.kind == "markov":
                self._model = MarkovModel(_req(p, "lam"), _req(p, "rho"), _req(p, "r"))
            elif self.kind == "mixture":
                r = _req(p, "r")
                segs = _req(p, "segments")
                models = [MNLModel(_req(s, "v", f"segments[{i}]"), _req(s, "v0", f"segments[{i}]"), r)
                          for i, s in enumerate(segs)]
                self._model = MixtureMNL(_req(p, "alpha"), models)
            elif self.kind == "explicit-function":
                n = int(_req(p, "n"))
                if n > EXPLICIT_MAX_N:
                    raise InstanceError(f"n: explicit tables are limited to n <= {EXPLICIT_MAX_N}")
                self._aux = TableFunction(n, _req(p, "values"))
            elif self.kind == "hidden-set":
                f, _, A1 = gen_hidden_set(int(_req(p, "n1")), int(_req(p, "k1")),
                                          int(_req(p, "k2")), int(_req(p, "r")),
                                          int(p.get("seed", 0)))
                self._aux = f
                self._model = A1
            else:
                f, _ = gen_example1(int(_req(p, "k")), float(_req(p, "eps_f")))
                self._aux = f
        except InstanceError:
            raise
        except (InputError, TypeError, ValueError) as exc:
            raise InstanceError(f"{self.kind}: {exc}") from None

    def oracle(self) -> ValueOracle:
        """A fresh value oracle (own query counter and cache)."""
        if self.kind in ("mnl", "markov"):
            return ChoiceObjective(self._model)
        if self.kind == "mixture":
            return mixture_oracle(self._model)
        return self._aux.clone()

    def build_constraint(self):
        c = self.constraint
        if c is None:
            return None
        n = self.n
        try:
            t = _req(c, "type", "constraint")
            if t == "cardinality":
                return Cardinality(int(_req(c, "k", "constraint")))
            if t == "budget":
                b = _req(c, "budgets", "constraint")
                if len(b) != n:
                    raise InstanceError(f"constraint.budgets: expected {n} entries, got {len(b)}")
                return Budget(b, _req(c, "B", "constraint"))
            if t == "matroid":
                mt = _req(c, "matroid", "constraint")
                if mt == "uniform":
                    return UniformMatroid(n, int(_req(c, "k", "constraint")))
                if mt == "free":
                    return FreeMatroid(n)
                if mt == "partition":
                    return PartitionMatroid(n, _req(c, "blocks", "constraint"),
                                            c.get("capacities", 1), c.get("total"))
                if mt == "explicit":
                    return ExplicitMatroid(n, _req(c, "bases", "constraint"))
                raise InstanceError(f"constraint.matroid: unknown matroid type {mt!r}")
            raise InstanceError(f"constraint.type: unknown constraint type {t!r}")
        except InstanceError:
            raise
        except (InputError, TypeError, ValueError) as exc:
            raise InstanceError(f"constraint: {exc}") from None

    def get_order(self) -> Order | None:
        return None if self.order is None else Order(tuple(self.order))

    def to_dict(self) -> dict[str, Any]:
        d: dict[str, Any] = {"kind": self.kind}
        if self.name:
            d["name"] = self.name
        d.update(self.params)
        if self.constraint is not None:
            d["constraint"] = self.constraint
        if self.order is not None:
            d["order"] = list(self.order)
        return d


def _req(d: dict, key: str, where: str | None = None):
    if not isinstance(d, dict) or key not in d:
        loc = f"{where}.{key}" if where else key
        raise InstanceError(f"{loc}: required field missing")
    return d[key]


def _plain(x):
    if isinstance(x, np.ndarray):
        return x.tolist()
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    return x


def instance_from_model(model, constraint: dict | None = None, order=None,
                        name: str | None = None) -> Instance:
    if isinstance(model, MNLModel):
        params = {"v": _plain(model.v), "v0": model.v0, "r": _plain(model.r)}
        kind = "mnl"
    elif isinstance(model, MarkovModel):
        params = {"lam": _plain(model.lam), "rho": _plain(model.rho), "r": _plain(model.r)}
        kind = "markov"
    elif isinstance(model, MixtureMNL):
        params = {"alpha": _plain(model.alpha), "r": _plain(model.r),
                  "segments": [{"v": _plain(m.v), "v0": m.v0} for m in model.models]}
        kind = "mixture"
    else:
        raise InputError(f"unsupported model type {type(model).__name__}")
    return Instance(kind, params, constraint, None if order is None else list(order), name)


def instance_from_table(f: ValueOracle, constraint: dict | None = None, order=None,
                        name: str | None = None) -> Instance:
    n = f.n
    if n > EXPLICIT_MAX_N:
        raise InstanceError(f"n: explicit tables are limited to n <= {EXPLICIT_MAX_N}")
    values = [f.peek([e for e in range(n) if m >> e & 1]) for m in range(1 << n)]
    return Instance("explicit-function", {"n": n, "values": values}, constraint,
                    None if order is None else list(order), name)


def instance_from_dict(d: dict[str, Any]) -> Instance:
    if not isinstance(d, dict):
        raise InstanceError("top level: expected a JSON object")
    d = dict(d)
    kind = _req(d, "kind")
    constraint = d.pop("constraint", None)
    order = d.pop("order", None)
    name = d.pop("name", None)
    d.pop("kind")
    if constraint is not None and not isinstance(constraint, dict):
        raise InstanceError("constraint: expected an object")
    return Instance(kind, d, constraint, order, name)


def load_instance(path) -> Instance:
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise InstanceError(f"{path}: {exc.strerror}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    try:
        return instance_from_dict(data)
    except InstanceError as exc:
        raise InstanceError(f"{path}: {exc}") from None


def save_instance(inst: Instance, path) -> None:
    with open(path, "w") as fh:
        json.dump(inst.to_dict(), fh, indent=2)
        fh.write("\n")
