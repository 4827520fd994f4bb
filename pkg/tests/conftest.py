"""Shared fixtures and brute-force oracles for the test suite."""

from __future__ import annotations

import numpy as np
import pytest

from genai_share import (
    AllocationRule,
    CostModel,
    GameInstance,
    ModelParams,
    Profile,
    RuleKind,
    creator_utility,
)


def philox(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=int(seed)))


def default_instance(seed: int, n: int = 20, **param_overrides) -> GameInstance:
    """Default configuration: n=20, gamma=0.8, mu=100, theta=1.5, alpha=0.5, a ~ U[1,10]."""
    rng = philox(seed)
    params = ModelParams(
        mu=param_overrides.pop("mu", 100.0),
        gamma=param_overrides.pop("gamma", 0.8),
        alpha=param_overrides.pop("alpha", 0.5),
        **param_overrides,
    )
    return GameInstance.power_costs(rng.uniform(1.0, 10.0, n), 1.5, params)


@pytest.fixture
def btes_instance() -> GameInstance:
    """The two-creator equal-shares counterexample instance."""
    params = ModelParams(mu=10.0, gamma=1.0, alpha=1.0)
    return GameInstance(2, (CostModel.power(0.1, 2.0), CostModel.power(0.4, 2.0)), params)


def brute_force_best_sharing(
    instance: GameInstance,
    x: np.ndarray,
    s_others: np.ndarray,
    i: int,
    rho: float,
    points: int = 1001,
):
    """Dense s-grid oracle for the optimal sharing level of one creator."""
    rule = AllocationRule(RuleKind.PROPORTIONAL, rho)
    n = instance.n
    s_full = np.empty(n)
    s_full[np.arange(n) != i] = s_others
    best_s, best_u = None, -np.inf
    for s in np.linspace(0.0, 1.0, points):
        s_full[i] = s
        u = creator_utility(instance, Profile(x, s_full.copy()), rule, i)
        if u > best_u:
            best_s, best_u = float(s), u
    return best_s, best_u


def brute_force_deviation(
    instance: GameInstance,
    x: np.ndarray,
    rho: float,
    i: int,
    x_max_i: float,
    x_points: int = 20_000,
    rule_kind: RuleKind = RuleKind.PROPORTIONAL,
):
    """Dense (x, s in {0,1}) grid oracle for the maximal deviation gain."""
    rule = AllocationRule(rule_kind, rho)
    reference = creator_utility(instance, Profile(x, np.ones(instance.n)), rule, i)
    best = -np.inf
    xx = x.copy()
    ss = np.ones(instance.n)
    for s_i in (0.0, 1.0):
        ss[i] = s_i
        for xi in np.linspace(0.0, x_max_i, x_points):
            xx[i] = xi
            u = creator_utility(instance, Profile(xx, ss), rule, i)
            if u > best:
                best = u
    return best - reference
