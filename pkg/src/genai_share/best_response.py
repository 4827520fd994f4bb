"""Single-creator optimization: sharing thresholds and best quality deviations."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .model import (
    AllocationRule,
    GameInstance,
    Profile,
    RuleKind,
    TrafficMode,
    WTA_TIE_TOL,
    creator_utility,
)
from .numerics import golden_section_max

#: default resolution of the coarse bracketing grid for 1-d quality searches
DEFAULT_GRID_SIZE = 4096
#: default absolute accuracy of the maximized utility
DEFAULT_TOL_1D = 1e-9


@dataclass(frozen=True)
class DeviationResult:
    """Outcome of a unilateral deviation search for one creator."""

    best_x: float
    best_s: float
    gain: float
    evaluations: int

    def to_dict(self) -> dict:
        return {
            "best_x": self.best_x,
            "best_s": self.best_s,
            "gain": self.gain,
            "evaluations": self.evaluations,
        }


def _split_others(x: np.ndarray, i: int) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    return np.delete(x, i)


def sharing_threshold(
    instance: GameInstance, x: np.ndarray, s_others: np.ndarray, i: int
) -> float:
    """The rho cutoff above which full sharing is creator i's best response.

    ``x`` is the full quality vector; ``s_others`` holds the sharing levels of
    the other n-1 creators. Requires x_i > 0 and the linear AI-quality model.
    """
    p = instance.params
    if p.data_returns_exponent != 1.0:
        raise ValueError("sharing threshold requires data_returns_exponent = 1")
    x = np.asarray(x, dtype=float)
    s_others = np.asarray(s_others, dtype=float)
    xi = float(x[i])
    if xi <= 0.0:
        raise ValueError("sharing threshold undefined for a creator with zero quality")
    x_others = _split_others(x, i)
    y = float(x_others.sum())
    z = float(x_others @ s_others)
    x0 = p.prior_data
    if p.traffic_mode is TrafficMode.HUMAN_PLUS_AI:
        # traffic responds to AI quality: compare the content pool with and
        # without creator i's contribution
        total = x0 + float(x.sum())
        d0 = total + p.alpha * (x0 + z)
        d1 = d0 + p.alpha * xi
        return float(((d1 / d0) ** (1.0 - p.gamma) - 1.0) / p.alpha)
    return float(xi / (xi + y + p.alpha * z + (1.0 + p.alpha) * x0))


def optimal_sharing(
    instance: GameInstance, x: np.ndarray, s_others: np.ndarray, i: int, rho: float
) -> float:
    """Best sharing level for creator i: 1 above the threshold, 0 below, 1 at ties."""
    tau = sharing_threshold(instance, x, s_others, i)
    return 1.0 if rho >= tau else 0.0


def _insert(x_others: np.ndarray, i: int, value: float) -> np.ndarray:
    return np.insert(np.asarray(x_others, dtype=float), i, value)


def _quality_objective(
    instance: GameInstance,
    x_others: np.ndarray,
    s_others: np.ndarray,
    i: int,
    s_i: float,
    rho: float,
    rule_kind: RuleKind,
):
    """Creator i's utility as a function of own quality, others held fixed.

    Returns a callable that accepts floats and numpy arrays alike; callers
    must not evaluate it at x = 0 (handle that point via ``creator_utility``).
    """
    p = instance.params
    mu, gamma, alpha = p.mu, p.gamma, p.alpha
    beta, x0 = p.data_returns_exponent, p.prior_data
    plus_ai = p.traffic_mode is TrafficMode.HUMAN_PLUS_AI
    x_others = np.asarray(x_others, dtype=float)
    s_others = np.asarray(s_others, dtype=float)
    base_h = x0 + float(x_others.sum())
    pool0 = x0 + float(x_others @ s_others)
    cost = instance.costs[i]
    if cost.kind == "power":
        a_c, th_c = cost.a, cost.theta

        def c_of(x):
            return a_c * x**th_c

    else:
        c_of = cost.cost

    if rule_kind is RuleKind.PROPORTIONAL and s_i == 1.0:

        def share(x, pot):
            return pot * (rho * x / (pool0 + x))

    elif rule_kind is RuleKind.BTES and s_i == 1.0:
        members = int(np.sum(s_others >= 1.0 - 1e-12)) + 1
        f_const = rho / members

        def share(x, pot):
            return pot * f_const

    elif rule_kind is RuleKind.WTA and s_i == 1.0:
        contrib = x_others * s_others
        top = float(contrib.max()) if contrib.size else 0.0
        ties = int(np.sum(contrib >= top - WTA_TIE_TOL)) if top > 0.0 else 0

        def share(x, pot):
            wins = x >= top - WTA_TIE_TOL
            tied = np.abs(x - top) <= WTA_TIE_TOL
            count = np.where(tied, ties + 1, 1)
            return pot * np.where(wins, rho / count, 0.0)

    else:
        # withholding (or a rule that pays creator i nothing): no AI revenue
        share = None

    def utility(x):
        total = base_h + x
        pool = pool0 + s_i * x
        q = alpha * pool**beta
        denom = total + q
        if gamma == 0.0:
            t = mu
        elif plus_ai:
            t = mu * denom**gamma
        else:
            t = mu * total**gamma
        u = t * x / denom - c_of(x)
        if share is not None:
            u = u + share(x, t * q / denom)
        return u

    return utility


def best_quality_given_sharing(
    instance: GameInstance,
    x_others: np.ndarray,
    s_others: np.ndarray,
    i: int,
    s_i: float,
    rho: float,
    rule_kind: RuleKind = RuleKind.PROPORTIONAL,
    reference_utility: float = 0.0,
    x_max_i: Optional[float] = None,
    grid_size: int = DEFAULT_GRID_SIZE,
    tol: float = DEFAULT_TOL_1D,
) -> DeviationResult:
    """Maximize creator i's utility over own quality at a fixed sharing level.

    Brackets globally with a ``grid_size``-point grid on [0, x_max_i] (the
    withholding objective can be non-concave), then refines the best bracket
    by golden-section search. ``gain`` is measured against
    ``reference_utility``.
    """
    if s_i not in (0.0, 1.0):
        raise ValueError(f"deviation search only considers s in {{0, 1}}, got {s_i}")
    if x_max_i is None:
        from .equilibrium import compute_x_max

        x_max_i = compute_x_max(instance.costs[i], instance.params.effective_mu, instance.params.gamma)
    obj = _quality_objective(instance, x_others, s_others, i, s_i, rho, rule_kind)

    grid = np.linspace(0.0, x_max_i, grid_size)
    values = np.empty(grid_size)
    values[1:] = obj(grid[1:])
    rule = AllocationRule(kind=rule_kind, rho=rho)
    values[0] = creator_utility(
        instance, Profile(_insert(x_others, i, 0.0), _insert(s_others, i, s_i)), rule, i
    )
    k = int(np.argmax(values))
    evals = grid_size

    best_x, best_u = float(grid[k]), float(values[k])
    lo = float(grid[max(k - 1, 0)])
    hi = float(grid[min(k + 1, grid_size - 1)])
    if hi > lo:
        # golden section never evaluates the bracket endpoints, so x = 0 stays out
        xtol = max(1e-13 * x_max_i, 1e-300)
        gx, gu, gevals = golden_section_max(obj, lo, hi, xtol=xtol)
        evals += gevals
        if gu > best_u:
            best_x, best_u = float(gx), float(gu)

    return DeviationResult(
        best_x=best_x, best_s=s_i, gain=best_u - reference_utility, evaluations=evals
    )


def deviation_gain(
    instance: GameInstance,
    x: np.ndarray,
    rho: float,
    i: int,
    rule_kind: RuleKind = RuleKind.PROPORTIONAL,
    grid_size: int = DEFAULT_GRID_SIZE,
    tol: float = DEFAULT_TOL_1D,
) -> DeviationResult:
    """Maximal gain creator i can get by unilaterally deviating from (x, full sharing).

    Only s in {0, 1} is searched; intermediate sharing levels are dominated.
    The incumbent strategy lies in the search set, so the gain is never
    meaningfully negative.
    """
    x = np.asarray(x, dtype=float)
    rule = AllocationRule(kind=rule_kind, rho=rho)
    reference = creator_utility(instance, Profile(x, np.ones(instance.n)), rule, i)
    x_others = _split_others(x, i)
    s_others = np.ones(instance.n - 1)
    branches = [
        best_quality_given_sharing(
            instance, x_others, s_others, i, s_i, rho, rule_kind,
            reference_utility=reference, grid_size=grid_size, tol=tol,
        )
        for s_i in (1.0, 0.0)
    ]
    best = branches[0] if branches[0].gain >= branches[1].gain else branches[1]
    return DeviationResult(
        best_x=best.best_x,
        best_s=best.best_s,
        gain=best.gain,
        evaluations=branches[0].evaluations + branches[1].evaluations,
    )
