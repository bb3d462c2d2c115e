"""Minimum-cost subsets of a fixed size M.

Exhaustive enumeration is feasible only for tiny M, so the general tool is
alternating optimization: cycle through the M subset positions, solving each
one-position subproblem exhaustively over the unused feature indices, until
a full sweep makes no change.  Restarting from many random initializations
and keeping the best run recovers the global minimum with high probability.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .data import Dataset, FeatureSubset
from .errors import BudgetExceededError, ConfigError, DegenerateStepError
from .linmodel import CostCache

EXHAUSTIVE_BUDGET = 2_000_000
DEFAULT_MAX_SWEEPS = 100


@dataclass(frozen=True)
class SearchResult:
    """Best subset found, reported with ascending indices."""

    subset: FeatureSubset
    cost: float
    iterations: int
    converged: bool
    restarts_used: int
    update_costs: tuple[float, ...] | None = None


def random_subset(rng: np.random.Generator, r: int, m: int) -> FeatureSubset:
    """Uniform draw over ordered distinct-index subsets."""
    return FeatureSubset(tuple(int(k) + 1 for k in rng.permutation(r)[:m]))


def run_rng(seed: int, run_index: int) -> np.random.Generator:
    """Per-run generator derived by counter-based splitting of the master
    seed, so results never depend on execution order or worker count."""
    return np.random.default_rng(
        np.random.SeedSequence(entropy=seed, spawn_key=(run_index,))
    )


def exhaustive_best_subset(
    dataset: Dataset,
    m: int,
    p: float = 1.0,
    alpha: float = 1.0,
    budget: int = EXHAUSTIVE_BUDGET,
    cache: CostCache | None = None,
) -> SearchResult:
    """Global minimum over all size-m subsets by full enumeration.

    Raises:
        BudgetExceededError: C(R, m) exceeds the subset budget.
        DegenerateStepError: every size-m subset is rank-deficient.
    """
    r = dataset.n_features
    if not 0 <= m <= r:
        raise ConfigError(f"m={m} outside [0, {r}]")
    count = math.comb(r, m)
    if count > budget:
        raise BudgetExceededError(
            f"exhaustive search over C({r},{m}) = {count} subsets exceeds "
            f"the budget of {budget}",
            count=count,
            budget=budget,
        )
    cache = cache or CostCache(dataset, p, alpha)
    best_key, best_cost = None, math.inf
    for key in combinations(range(1, r + 1), m):
        cost = cache.cost(key)
        if cost < best_cost:
            best_key, best_cost = key, cost
    if best_key is None:
        raise DegenerateStepError(f"every subset of size {m} is rank-deficient")
    return SearchResult(
        subset=FeatureSubset(best_key),
        cost=best_cost,
        iterations=count,
        converged=True,
        restarts_used=0,
    )


def alternating_optimization(
    dataset: Dataset,
    m: int,
    init: FeatureSubset,
    max_iters: int = DEFAULT_MAX_SWEEPS,
    p: float = 1.0,
    alpha: float = 1.0,
    cache: CostCache | None = None,
    track_updates: bool = False,
) -> SearchResult:
    """Cyclic coordinate descent over subset positions from a given start.

    Each position update enumerates every feature index not used at the
    other positions (the current index included) and accepts only a strict
    cost improvement, so a sweep without change is a fixed point and the
    cost trace is non-increasing by construction.
    """
    init.validate_against(dataset)
    if init.m != m:
        raise ConfigError(f"init has {init.m} indices, expected m={m}")
    cache = cache or CostCache(dataset, p, alpha)
    r = dataset.n_features
    state = list(init.indices)
    current_cost = cache.cost(tuple(state))
    trace = [current_cost] if track_updates else None
    converged = False
    sweeps = 0
    for _ in range(max_iters):
        sweeps += 1
        changed = False
        for j in range(m):
            others = set(state) - {state[j]}
            best_k, best_cost = state[j], current_cost
            for k in range(1, r + 1):
                if k in others or k == state[j]:
                    continue
                state_j = state.copy()
                state_j[j] = k
                cost = cache.cost(tuple(state_j))
                if cost < best_cost:
                    best_k, best_cost = k, cost
            if best_k != state[j]:
                state[j] = best_k
                current_cost = best_cost
                changed = True
            if trace is not None:
                trace.append(current_cost)
        if not changed:
            converged = True
            break
    if not math.isfinite(current_cost):
        raise DegenerateStepError(
            f"alternating optimization stuck on a rank-deficient subset "
            f"{tuple(state)} with no finite-cost move"
        )
    return SearchResult(
        subset=FeatureSubset(tuple(sorted(state))),
        cost=current_cost,
        iterations=sweeps,
        converged=converged,
        restarts_used=0,
        update_costs=None if trace is None else tuple(trace),
    )


def multi_restart_search(
    dataset: Dataset,
    m: int,
    runs: int = 1000,
    seed: int = 0,
    p: float = 1.0,
    alpha: float = 1.0,
    max_iters: int = DEFAULT_MAX_SWEEPS,
    cache: CostCache | None = None,
) -> SearchResult:
    """Best-of-N alternating optimization from seeded random starts.

    Ties between runs resolve to the lexicographically smallest ascending
    subset, making the result deterministic for a given (seed, runs, m)
    regardless of any parallel execution of the runs.
    """
    if runs < 1:
        raise ConfigError("runs must be >= 1")
    r = dataset.n_features
    if not 1 <= m <= r:
        raise ConfigError(f"m={m} outside [1, {r}]")
    cache = cache or CostCache(dataset, p, alpha)
    best: SearchResult | None = None
    iterations = 0
    for run in range(runs):
        init = random_subset(run_rng(seed, run), r, m)
        try:
            result = alternating_optimization(
                dataset, m, init, max_iters=max_iters, p=p, alpha=alpha,
                cache=cache,
            )
        except DegenerateStepError:
            continue
        iterations += result.iterations
        key = (result.cost, result.subset.indices)
        if best is None or key < (best.cost, best.subset.indices):
            best = result
    if best is None:
        raise DegenerateStepError(
            f"all {runs} restarts landed on rank-deficient subsets"
        )
    return SearchResult(
        subset=best.subset,
        cost=best.cost,
        iterations=iterations,
        converged=best.converged,
        restarts_used=runs,
    )
