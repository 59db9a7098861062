"""Constrained maximization of set functions that have a submodular order."""

from .algorithms import (ParamSetting, RunResult, TraceEvent, budget_half, budget_third,
                         budget_threshold_add, cardinality_max, enumerate_params, final_add,
                         greedy, matroid_local_search, run_one, solve, threshold_add)
from .assortment import (ChoiceObjective, MarkovModel, MixtureMNL, MNLModel, PriceLadder,
                         descending_price_order, f_phi, markov_revenue,
                         markov_unconstrained_opt, mixture_oracle, mnl_revenue,
                         mnl_unconstrained_opt, pricing_expansion)
from .constraints import (Budget, Cardinality, ExplicitMatroid, FreeMatroid, Matroid,
                          PartitionMatroid, UniformMatroid, circuit, feasible, rank)
from .core import (ContractError, InputError, NumericalError, Order, ValueOracle, leftmost,
                   marginal, rightmost, wrap_noisy)
from .framework import check_piecewise_order, run_framework

__all__ = [name for name in dir() if not name.startswith("_")]
