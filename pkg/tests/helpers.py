"""Random fixtures shared by the algorithm and acceptance tests."""

import numpy as np

from subord.assortment import ChoiceObjective, descending_price_order
from subord.constraints import PartitionMatroid, UniformMatroid
from subord.core import Order
from subord.instances import gen_random_mnl, gen_random_submodular


def corpus(count, n_max=10, seed0=0):
    """Alternating coverage and MNL-objective instances: (name, f, order, n)."""
    out = []
    for t in range(count):
        n = n_max - (t % 3)
        if t % 2 == 0:
            f = gen_random_submodular(n, seed0 + t)
            out.append((f"coverage-{seed0 + t}", f, Order.identity(n), n))
        else:
            mdl = gen_random_mnl(n, seed0 + t)
            out.append((f"mnl-{seed0 + t}", ChoiceObjective(mdl), descending_price_order(mdl.r), n))
    return out


def random_budgets(n, seed):
    rng = np.random.default_rng(10_000 + seed)
    b = rng.integers(1, 6, size=n).tolist()
    B = int(rng.integers(4, 13))
    return b, B


def random_matroid(n, seed):
    rng = np.random.default_rng(20_000 + seed)
    if seed % 3 == 0:
        return UniformMatroid(n, int(rng.integers(1, 5)))
    labels = rng.integers(0, 3, size=n)
    blocks = [[e for e in range(n) if labels[e] == b] for b in range(3)]
    blocks = [b for b in blocks if b]
    caps = rng.integers(1, 3, size=len(blocks)).tolist()
    total = int(rng.integers(2, 5)) if seed % 2 else None
    return PartitionMatroid(n, blocks, caps, total)
