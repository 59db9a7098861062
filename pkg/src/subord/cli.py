"""Command-line entry point: ``subord run | verify | gen | bench``.

Exit codes: 0 success, 1 bad instance file, 2 usage error or incompatible
algorithm/constraint, 3 enumeration cap exceeded, 4 a verified property fails.
"""

from __future__ import annotations

import argparse
import csv
import math
import os
import sys
import time
from dataclasses import dataclass, field

import numpy as np

from .algorithms import TAGS, solve
from .assortment import ChoiceObjective, descending_price_order
from .constraints import Budget, Cardinality, Matroid, PartitionMatroid, UniformMatroid
from .core import InputError, Order, wrap_noisy
from .framework import check_piecewise_order, run_framework
from .instances import (Instance, InstanceError, gen_markov_4item, gen_random_markov,
                        gen_random_mixture, gen_random_mnl, gen_random_submodular,
                        instance_from_model, instance_from_table, load_instance, save_instance)
from . import verify as V

EXIT_OK, EXIT_INSTANCE, EXIT_USAGE, EXIT_CAP, EXIT_FAIL = 0, 1, 2, 3, 4

RUN_COLUMNS = ["instance", "algo", "epsilon", "value", "opt", "ratio", "queries",
               "settings", "wall_time"]
BENCH_COLUMNS = ["instance", "algo", "ratio", "bound", "queries", "query_bound"]
PROPERTIES = ("monotone", "subadditive", "strong-order", "weak-order", "substitutable",
              "compatible", "piecewise")


class UsageError(Exception):
    pass


@dataclass
class RunReport:
    instance: str
    algo: str
    epsilon: float
    value: float
    opt: float | None
    queries: int
    settings: int
    wall_time: float
    solution: list[int] = field(default_factory=list)
    per_setting: list[dict] = field(default_factory=list)

    @property
    def ratio(self) -> float | None:
        if self.opt is None:
            return None
        return 1.0 if self.opt <= 0 else self.value / self.opt

    def row(self) -> dict:
        return {
            "instance": self.instance, "algo": self.algo, "epsilon": self.epsilon,
            "value": f"{self.value:.12g}",
            "opt": "" if self.opt is None else f"{self.opt:.12g}",
            "ratio": "" if self.ratio is None else f"{self.ratio:.12g}",
            "queries": self.queries, "settings": self.settings,
            "wall_time": f"{self.wall_time:.4f}",
        }


def _seed(args) -> int:
    if args.seed is not None:
        return args.seed
    return int(os.environ.get("SUBORD_SEED", "0"))


def _resolve_constraint(inst: Instance, algo: str, k: int | None):
    """Instance constraint (or --k override) adapted to the algorithm family."""
    if k is not None:
        c = Cardinality(k)
    else:
        c = inst.build_constraint()
    if c is None:
        raise UsageError("instance has no constraint; pass --k")
    if algo == "cardinality":
        if isinstance(c, Cardinality):
            return c
    elif algo in ("budget_third", "budget_half"):
        if isinstance(c, Budget):
            return c
        if isinstance(c, Cardinality):
            return Budget.unit(inst.n, c.k)
    elif algo == "matroid":
        if isinstance(c, Matroid):
            return c
        if isinstance(c, Cardinality):
            return UniformMatroid(inst.n, c.k)
    raise UsageError(f"algorithm {algo} cannot handle a {c.kind} constraint")


def execute(inst: Instance, algo: str, eps: float, k: int | None = None,
            noisy: float = 0.0, seed: int = 0, jobs: int = 1, with_opt: bool = True,
            name: str = "") -> RunReport:
    constraint = _resolve_constraint(inst, algo, k)
    f = inst.oracle()
    if noisy > 0:
        f = wrap_noisy(f, noisy, seed)
    t0 = time.perf_counter()
    order = inst.get_order()
    if order is None and inst.kind in ("mnl", "markov"):
        res = run_framework(algo, inst.model, constraint, eps, f=f)
    else:
        if order is None:
            order = (descending_price_order(inst.model.r) if inst.kind == "mixture"
                     else Order.identity(inst.n))
        res = solve(algo, f, order, constraint, eps, jobs=jobs)
    wall = time.perf_counter() - t0
    exact = inst.oracle()
    value = exact.peek(res.S)
    opt = None
    if with_opt:
        try:
            opt = V.brute_force_opt(exact, constraint)[1]
        except V.EnumerationCapError:
            opt = None
    per = [{"setting": _setting_str(r.setting), "value": r.value, "queries": r.queries,
            "size": len(r.S)} for r in res.runs]
    return RunReport(name or inst.name or inst.kind, algo, eps, value, opt, res.queries,
                     len(res.runs), wall, sorted(res.S), per)


def _setting_str(s) -> str:
    if s is None:
        return ""
    parts = [s.algo]
    if s.tau is not None:
        parts.append(f"tau={s.tau:.6g}")
    if s.X is not None:
        parts.append(f"X={sorted(s.X)}")
    return " ".join(parts)


def _print_report(rep: RunReport, verbose: bool) -> None:
    print(f"instance: {rep.instance}")
    print(f"algorithm: {rep.algo}  epsilon: {rep.epsilon}")
    print(f"solution: {rep.solution}")
    print(f"value: {rep.value:.12g}")
    if rep.opt is not None:
        print(f"opt: {rep.opt:.12g}")
        print(f"ratio: {rep.ratio:.6f}")
    else:
        print("opt: (not computed: instance exceeds enumeration cap)")
    print(f"queries: {rep.queries}")
    print(f"settings: {rep.settings}")
    if verbose:
        for p in rep.per_setting:
            print(f"  {p['setting']}: value={p['value']:.6g} size={p['size']} queries={p['queries']}")


def _write_csv(path: str, columns, rows) -> None:
    out = sys.stdout if path == "-" else open(path, "w", newline="")
    try:
        w = csv.DictWriter(out, fieldnames=columns)
        w.writeheader()
        for row in rows:
            w.writerow(row)
    finally:
        if out is not sys.stdout:
            out.close()


def cmd_run(args) -> int:
    inst = load_instance(args.instance)
    rep = execute(inst, args.algo, args.epsilon, args.k, args.noisy or 0.0, _seed(args),
                  args.jobs, name=os.path.basename(args.instance))
    _print_report(rep, args.verbose)
    if args.csv:
        _write_csv(args.csv, RUN_COLUMNS, [rep.row()])
    return EXIT_OK


def _verify_order(inst: Instance, how: str | None) -> Order:
    if how == "descending-price":
        if not inst.is_choice_model:
            raise UsageError("descending-price order needs a choice-model instance")
        return descending_price_order(inst.model.r)
    if how == "identity":
        return Order.identity(inst.n)
    if how in (None, "instance"):
        o = inst.get_order()
        return Order.identity(inst.n) if o is None else o
    raise UsageError(f"unknown order {how!r}")


def cmd_verify(args) -> int:
    inst = load_instance(args.instance)
    prop = args.property
    f = inst.oracle()
    if prop in ("substitutable", "compatible") and inst.kind not in ("mnl", "markov"):
        raise UsageError(f"property {prop} needs an MNL or Markov instance")
    if prop == "monotone":
        w = V.check_monotone(f)
    elif prop == "subadditive":
        w = V.check_subadditive(f)
    elif prop == "strong-order":
        w = V.check_strong_order(f, _verify_order(inst, args.order))
    elif prop == "weak-order":
        w = V.check_weak_order(f, _verify_order(inst, args.order))
    elif prop == "substitutable":
        w = V.check_substitutable(inst.model)
    elif prop == "compatible":
        w = V.check_compatibility(inst.model, form=args.form)
    else:
        if inst.kind not in ("mnl", "markov"):
            raise UsageError("piecewise check needs an MNL or Markov instance")
        algo = args.algo or "cardinality"
        constraint = _resolve_constraint(inst, algo, args.k)
        if inst.n > 12:
            raise V.EnumerationCapError("piecewise order check limited to n <= 12")
        res = run_framework(algo, inst.model, constraint, args.epsilon)
        w = None
        exact = ChoiceObjective(inst.model)
        for run in res.runs:
            hist = run.info["history"]
            w = check_piecewise_order(exact, hist.phases, hist.full_order(inst.n))
            if w is not None:
                break
    if w is None:
        print(f"PASS {prop}")
        return EXIT_OK
    print(f"FAIL {prop}")
    print(w.describe())
    return EXIT_FAIL


def cmd_gen(args) -> int:
    seed = _seed(args)
    kind = args.kind
    constraint = {"type": "cardinality", "k": args.k} if args.k is not None else None
    if kind == "example1":
        k = args.k or 5
        inst = Instance("example1", {"k": k, "eps_f": args.eps_f},
                        {"type": "cardinality", "k": k}, name="example1")
    elif kind == "hidden-set":
        inst = Instance("hidden-set", {"n1": args.n1, "k1": args.k1, "k2": args.k2,
                                       "r": args.r, "seed": seed},
                        constraint or {"type": "cardinality", "k": args.k1 + args.k2},
                        name="hidden-set")
    elif kind == "markov4":
        inst = instance_from_model(gen_markov_4item(), constraint, name="markov4")
    elif kind == "mnl":
        inst = instance_from_model(gen_random_mnl(args.n, seed), constraint, name=f"mnl{args.n}")
    elif kind == "markov":
        inst = instance_from_model(gen_random_markov(args.n, seed), constraint,
                                   name=f"markov{args.n}")
    elif kind == "mixture":
        inst = instance_from_model(gen_random_mixture(args.n, args.m, seed), constraint,
                                   name=f"mixture{args.n}")
    else:
        inst = instance_from_table(gen_random_submodular(args.n, seed), constraint,
                                   name=f"coverage{args.n}")
    save_instance(inst, args.out)
    print(f"wrote {kind} instance to {args.out}")
    return EXIT_OK


def bench_rows(suite: str, trials: int, eps: float, seed: int):
    """Benchmark rows for a named suite."""
    cov = gen_random_submodular

    def card(f, n, k, name):
        res = solve("cardinality", f, Order.identity(n), Cardinality(k), eps)
        opt = V.brute_force_opt(f, Cardinality(k))[1]
        return {"instance": name, "algo": "cardinality", "ratio": _ratio(res.value, opt),
                "bound": (1 - eps) * 0.5, "queries": res.queries,
                "query_bound": 4 * n / eps * math.log(k)}

    rows = []
    if suite in ("cardinality", "all"):
        for t in range(trials):
            n, k = 10, 2 + t % 3
            rows.append(card(cov(n, seed + t), n, k, f"coverage-{seed + t}"))
            mdl = gen_random_mnl(n, seed + t)
            f = ChoiceObjective(mdl)
            res = solve("cardinality", f, descending_price_order(mdl.r), Cardinality(k), eps)
            opt = V.brute_force_opt(f, Cardinality(k))[1]
            rows.append({"instance": f"mnl-{seed + t}", "algo": "cardinality",
                         "ratio": _ratio(res.value, opt), "bound": (1 - eps) * 0.5,
                         "queries": res.queries, "query_bound": 4 * n / eps * math.log(k)})
    if suite in ("budget", "all"):
        for t in range(trials):
            n = 8
            f = cov(n, seed + t)
            rng = np.random.default_rng(seed + t)
            b = rng.integers(1, 6, size=n).tolist()
            bc = Budget(b, int(rng.integers(4, 12)))
            opt = V.brute_force_opt(f, bc)[1]
            r3 = solve("budget_third", f, Order.identity(n), bc, eps)
            rows.append({"instance": f"coverage-{seed + t}", "algo": "budget_third",
                         "ratio": _ratio(r3.value, opt), "bound": (1 - eps) / 3,
                         "queries": r3.queries, "query_bound": ""})
            r2 = solve("budget_half", f, Order.identity(n), bc, 0.25)
            rows.append({"instance": f"coverage-{seed + t}", "algo": "budget_half",
                         "ratio": _ratio(r2.value, opt), "bound": 0.25,
                         "queries": r2.queries, "query_bound": ""})
    if suite in ("matroid", "all"):
        for t in range(trials):
            n = 10
            f = cov(n, seed + t)
            m = PartitionMatroid(n, [range(0, 4), range(4, 7), range(7, 10)], [2, 1, 2])
            res = solve("matroid", f, Order.identity(n), m, eps)
            opt = V.brute_force_opt(f, m)[1]
            rows.append({"instance": f"coverage-{seed + t}", "algo": "matroid",
                         "ratio": _ratio(res.value, opt), "bound": 0.25,
                         "queries": res.queries, "query_bound": n})
    if suite in ("framework", "all"):
        for t in range(trials):
            n = 6
            mdl = gen_random_markov(n, seed + t)
            res = run_framework("cardinality", mdl, Cardinality(3), eps)
            opt = V.brute_force_opt(ChoiceObjective(mdl), Cardinality(3))[1]
            rows.append({"instance": f"markov-{seed + t}", "algo": "framework-cardinality",
                         "ratio": _ratio(res.value, opt), "bound": (1 - eps) * 0.5,
                         "queries": res.queries, "query_bound": ""})
    if not rows:
        raise UsageError(f"unknown bench suite {suite!r}")
    return rows


def _ratio(value: float, opt: float) -> float:
    return 1.0 if opt <= 0 else value / opt


def cmd_bench(args) -> int:
    rows = bench_rows(args.suite, args.trials, args.epsilon, _seed(args))
    for row in rows:
        for key in ("ratio", "bound", "query_bound"):
            if isinstance(row[key], float):
                row[key] = f"{row[key]:.6g}"
    _write_csv(args.csv or "-", BENCH_COLUMNS, rows)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="subord", description=(
        "Maximize set functions with a submodular order; assortment optimization."))
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--seed", type=int, default=None,
                        help="random seed (default: $SUBORD_SEED or 0)")
        sp.add_argument("--epsilon", type=float, default=0.1)

    r = sub.add_parser("run", help="run an algorithm on an instance file")
    r.add_argument("instance")
    r.add_argument("--algo", choices=TAGS, required=True)
    r.add_argument("--k", type=int, default=None, help="override with a cardinality bound")
    r.add_argument("--noisy", type=float, default=None, metavar="DELTA")
    r.add_argument("--csv", default=None, help="write a one-row CSV report ('-' for stdout)")
    r.add_argument("--jobs", type=int, default=1)
    r.add_argument("-v", "--verbose", action="store_true", help="list every parameter setting")
    common(r)

    v = sub.add_parser("verify", help="check a structural property exhaustively")
    v.add_argument("instance")
    v.add_argument("--property", choices=PROPERTIES, required=True)
    v.add_argument("--order", choices=("descending-price", "identity", "instance"), default=None)
    v.add_argument("--algo", choices=TAGS, default=None, help="algorithm for the piecewise check")
    v.add_argument("--k", type=int, default=None)
    v.add_argument("--form", choices=("literal", "best-subset"), default="literal",
                   help="which version of the second compatibility inequality to check")
    common(v)

    g = sub.add_parser("gen", help="write a generated instance file")
    g.add_argument("kind", choices=("example1", "hidden-set", "markov4", "mnl", "markov",
                                    "mixture", "coverage"))
    g.add_argument("out")
    g.add_argument("--k", type=int, default=None)
    g.add_argument("--eps-f", type=float, default=0.01)
    g.add_argument("--n", type=int, default=8)
    g.add_argument("--m", type=int, default=2, help="mixture segments")
    g.add_argument("--n1", type=int, default=6)
    g.add_argument("--k1", type=int, default=2)
    g.add_argument("--k2", type=int, default=1)
    g.add_argument("--r", type=int, default=1)
    common(g)

    b = sub.add_parser("bench", help="ratio and query-count benchmark as CSV")
    b.add_argument("suite", choices=("cardinality", "budget", "matroid", "framework", "all"))
    b.add_argument("--csv", default=None, help="output path (default stdout)")
    b.add_argument("--trials", type=int, default=20)
    common(b)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handler = {"run": cmd_run, "verify": cmd_verify, "gen": cmd_gen, "bench": cmd_bench}
    try:
        return handler[args.command](args)
    except InstanceError as exc:
        print(f"instance error: {exc}", file=sys.stderr)
        return EXIT_INSTANCE
    except V.EnumerationCapError as exc:
        print(f"refused: {exc}", file=sys.stderr)
        return EXIT_CAP
    except (UsageError, InputError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
