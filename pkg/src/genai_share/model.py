"""Game primitives: model parameters, cost models, profiles, and payoff evaluation.

All types are immutable after construction; every operation here is a pure
function of its inputs.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Optional, Sequence

import numpy as np

from .numerics import inverse_increasing

#: absolute tolerance for winner-set ties under the winner-takes-all rule
WTA_TIE_TOL = 1e-12


class TrafficMode(str, Enum):
    HUMAN_ONLY = "human-only"
    HUMAN_PLUS_AI = "human-plus-ai"


class RuleKind(str, Enum):
    PROPORTIONAL = "proportional"
    WTA = "wta"
    BTES = "btes"


@dataclass(frozen=True)
class ModelParams:
    """Global ecosystem parameters.

    ``data_returns_exponent`` is the diminishing-returns exponent of the AI
    quality map and ``prior_data`` the fixed body of pre-existing training
    content; both default to the baseline model (1 and 0).
    """

    mu: float
    gamma: float
    alpha: float
    data_returns_exponent: float = 1.0
    prior_data: float = 0.0
    traffic_mode: TrafficMode = TrafficMode.HUMAN_ONLY

    def __post_init__(self):
        if self.mu <= 0:
            raise ValueError(f"mu must be positive, got {self.mu}")
        if not 0.0 <= self.gamma <= 1.0:
            raise ValueError(f"gamma must lie in [0, 1], got {self.gamma}")
        if self.alpha <= 0:
            raise ValueError(f"alpha must be positive, got {self.alpha}")
        if not 0.0 < self.data_returns_exponent <= 1.0:
            raise ValueError(
                f"data_returns_exponent must lie in (0, 1], got {self.data_returns_exponent}"
            )
        if self.prior_data < 0:
            raise ValueError(f"prior_data must be non-negative, got {self.prior_data}")
        object.__setattr__(self, "traffic_mode", TrafficMode(self.traffic_mode))

    @property
    def effective_mu(self) -> float:
        """Baseline traffic scale of the enforced-sharing game.

        With AI-dependent traffic the full-sharing game is the human-only game
        with mu rescaled by (1+alpha)^gamma.
        """
        if self.traffic_mode is TrafficMode.HUMAN_PLUS_AI:
            return self.mu * (1.0 + self.alpha) ** self.gamma
        return self.mu


@dataclass(frozen=True)
class CostModel:
    """Production cost c(x): strictly convex, c(0) = 0, c' increasing from 0.

    Either a power cost a * x**theta with theta in (1, 2], or a custom model
    supplying analytic c, c', c''. ``strong_convexity_modulus`` is a lower
    bound on c'' used only by the theoretical-constant diagnostics (0 if
    unknown).
    """

    kind: str
    a: float = 0.0
    theta: float = 0.0
    c: Optional[Callable] = field(default=None, compare=False)
    c_prime: Optional[Callable] = field(default=None, compare=False)
    c_double_prime: Optional[Callable] = field(default=None, compare=False)
    strong_convexity_modulus: float = 0.0

    @staticmethod
    def power(a: float, theta: float, strong_convexity_modulus: float = 0.0) -> "CostModel":
        if a <= 0:
            raise ValueError(f"power cost coefficient must be positive, got {a}")
        if not 1.0 < theta <= 2.0:
            raise ValueError(f"power cost exponent must lie in (1, 2], got {theta}")
        return CostModel(
            kind="power", a=a, theta=theta, strong_convexity_modulus=strong_convexity_modulus
        )

    @staticmethod
    def custom(
        c: Callable,
        c_prime: Callable,
        c_double_prime: Callable,
        strong_convexity_modulus: float = 0.0,
        validate: bool = True,
    ) -> "CostModel":
        """Wrap analytic cost callables; set ``validate=False`` only for test doubles."""
        model = CostModel(
            kind="custom",
            c=c,
            c_prime=c_prime,
            c_double_prime=c_double_prime,
            strong_convexity_modulus=strong_convexity_modulus,
        )
        if validate:
            if abs(float(c(0.0))) > 1e-12:
                raise ValueError("custom cost must satisfy c(0) = 0")
            grid = np.geomspace(1e-6, 1e6, 61)
            if np.any(np.asarray(c_double_prime(grid)) <= 0):
                raise ValueError("custom cost must be strictly convex (c'' > 0 on a grid)")
        return model

    def cost(self, x):
        if self.kind == "power":
            return self.a * x**self.theta
        return self.c(x)

    def marginal(self, x):
        if self.kind == "power":
            return self.a * self.theta * x ** (self.theta - 1.0)
        return self.c_prime(x)

    def curvature(self, x):
        if self.kind == "power":
            return self.a * self.theta * (self.theta - 1.0) * x ** (self.theta - 2.0)
        return self.c_double_prime(x)

    def marginal_inverse(self, y: float) -> float:
        """Solve c'(x) = y for y >= 0; c' is strictly increasing."""
        if y <= 0.0:
            return 0.0
        if self.kind == "power":
            return (y / (self.a * self.theta)) ** (1.0 / (self.theta - 1.0))
        return inverse_increasing(lambda x: float(self.c_prime(x)), y)


@dataclass(frozen=True)
class GameInstance:
    """A game: n >= 2 creators with their cost models plus global parameters."""

    n: int
    costs: tuple
    params: ModelParams

    def __post_init__(self):
        if self.n < 2:
            raise ValueError(f"need at least 2 creators, got n={self.n}")
        object.__setattr__(self, "costs", tuple(self.costs))
        if len(self.costs) != self.n:
            raise ValueError(f"expected {self.n} cost models, got {len(self.costs)}")

    @staticmethod
    def power_costs(a: Sequence[float], theta: float, params: ModelParams) -> "GameInstance":
        costs = tuple(CostModel.power(float(ai), theta) for ai in a)
        return GameInstance(n=len(costs), costs=costs, params=params)

    # -- JSON wire format (field names are part of the CLI contract) --

    def to_dict(self) -> dict:
        costs = []
        for c in self.costs:
            if c.kind != "power":
                raise ValueError("only power cost models are JSON-serializable")
            entry = {"kind": "power", "a": c.a, "theta": c.theta}
            if c.strong_convexity_modulus:
                entry["strong_convexity_modulus"] = c.strong_convexity_modulus
            costs.append(entry)
        return {
            "n": self.n,
            "params": {
                "mu": self.params.mu,
                "gamma": self.params.gamma,
                "alpha": self.params.alpha,
                "beta_ai": self.params.data_returns_exponent,
                "x0": self.params.prior_data,
                "traffic_mode": self.params.traffic_mode.value,
            },
            "costs": costs,
        }

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)

    @staticmethod
    def from_dict(doc: dict) -> "GameInstance":
        p = doc["params"]
        params = ModelParams(
            mu=float(p["mu"]),
            gamma=float(p["gamma"]),
            alpha=float(p["alpha"]),
            data_returns_exponent=float(p.get("beta_ai", 1.0)),
            prior_data=float(p.get("x0", 0.0)),
            traffic_mode=TrafficMode(p.get("traffic_mode", "human-only")),
        )
        costs = []
        for entry in doc["costs"]:
            if entry.get("kind", "power") != "power":
                raise ValueError(f"unsupported cost kind in JSON: {entry.get('kind')}")
            costs.append(
                CostModel.power(
                    float(entry["a"]),
                    float(entry["theta"]),
                    strong_convexity_modulus=float(entry.get("strong_convexity_modulus", 0.0)),
                )
            )
        return GameInstance(n=int(doc["n"]), costs=tuple(costs), params=params)

    @staticmethod
    def from_json(text: str) -> "GameInstance":
        return GameInstance.from_dict(json.loads(text))


@dataclass(frozen=True)
class Profile:
    """A strategy profile: qualities x >= 0 and sharing levels s in [0, 1]."""

    x: np.ndarray
    s: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float).copy()
        s = np.asarray(self.s, dtype=float).copy()
        if x.shape != s.shape or x.ndim != 1:
            raise ValueError(f"x and s must be 1-d vectors of equal length, got {x.shape}, {s.shape}")
        if np.any(x < 0):
            raise ValueError("qualities must be non-negative")
        if np.any((s < 0) | (s > 1)):
            raise ValueError("sharing levels must lie in [0, 1]")
        x.flags.writeable = False
        s.flags.writeable = False
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "s", s)


@dataclass(frozen=True)
class AllocationRule:
    """Allocation rule kind plus the revenue-allocation parameter rho."""

    kind: RuleKind = RuleKind.PROPORTIONAL
    rho: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "kind", RuleKind(self.kind))
        if not 0.0 <= self.rho <= 1.0:
            raise ValueError(f"rho must lie in [0, 1], got {self.rho}")


def _check_profile(instance: GameInstance, profile: Profile) -> None:
    if profile.x.shape[0] != instance.n:
        raise ValueError(
            f"profile has {profile.x.shape[0]} creators but instance has {instance.n}"
        )


def shared_content(instance: GameInstance, profile: Profile) -> float:
    """Total content available to the AI: prior data plus shared creator content."""
    return float(instance.params.prior_data + profile.x @ profile.s)


def genai_quality(instance: GameInstance, profile: Profile) -> float:
    """AI content quality alpha * (shared content)**beta; 0 when nothing is shared."""
    _check_profile(instance, profile)
    base = shared_content(instance, profile)
    if base <= 0.0:
        return 0.0
    return float(instance.params.alpha * base ** instance.params.data_returns_exponent)


def total_content(instance: GameInstance, profile: Profile) -> float:
    """Total human-side content on the platform (prior data counts)."""
    return float(instance.params.prior_data + profile.x.sum())


def traffic(instance: GameInstance, profile: Profile) -> float:
    """User traffic mu * base**gamma, with base set by the traffic mode (0**0 := 1)."""
    _check_profile(instance, profile)
    p = instance.params
    base = total_content(instance, profile)
    if p.traffic_mode is TrafficMode.HUMAN_PLUS_AI:
        base += genai_quality(instance, profile)
    if p.gamma == 0.0:
        return p.mu
    return float(p.mu * base**p.gamma)


def allocation_shares(
    instance: GameInstance, profile: Profile, rule: AllocationRule
) -> np.ndarray:
    """Revenue fractions (f_1, ..., f_n, f_P); entries are non-negative and sum to 1.

    The platform entry absorbs whatever is not allocated to the n strategic
    creators, including the fraction attributable to prior data it hosts.
    """
    _check_profile(instance, profile)
    n = instance.n
    shares = np.zeros(n + 1)
    contrib = profile.x * profile.s
    if rule.kind is RuleKind.PROPORTIONAL:
        pool = instance.params.prior_data + contrib.sum()
        if pool > 0.0:
            shares[:n] = rule.rho * contrib / pool
    elif rule.kind is RuleKind.WTA:
        top = contrib.max() if n else 0.0
        if top > 0.0:
            winners = contrib >= top - WTA_TIE_TOL
            shares[:n][winners] = rule.rho / winners.sum()
    elif rule.kind is RuleKind.BTES:
        opted_in = profile.s >= 1.0 - 1e-12
        k = int(opted_in.sum())
        if k > 0:
            shares[:n][opted_in] = rule.rho / k
    shares[n] = 1.0 - shares[:n].sum()
    return shares


def creator_utility(
    instance: GameInstance, profile: Profile, rule: AllocationRule, i: int
) -> float:
    """Creator i's payoff: direct traffic share + allocated AI revenue - cost."""
    _check_profile(instance, profile)
    if not 0 <= i < instance.n:
        raise IndexError(f"creator index {i} out of range for n={instance.n}")
    cost = float(instance.costs[i].cost(profile.x[i]))
    q_ai = genai_quality(instance, profile)
    denom = total_content(instance, profile) + q_ai
    if denom <= 0.0:
        return -cost
    t = traffic(instance, profile)
    f_i = allocation_shares(instance, profile, rule)[i]
    return float(t * profile.x[i] / denom + t * q_ai / denom * f_i - cost)


def platform_revenue(
    instance: GameInstance, profile: Profile, rule: AllocationRule
) -> float:
    """AI-driven revenue retained by the platform."""
    _check_profile(instance, profile)
    q_ai = genai_quality(instance, profile)
    denom = total_content(instance, profile) + q_ai
    if denom <= 0.0 or q_ai <= 0.0:
        return 0.0
    t = traffic(instance, profile)
    f_p = allocation_shares(instance, profile, rule)[instance.n]
    return float(t * q_ai / denom * f_p)


def full_sharing_creator_utility(
    instance: GameInstance, x: np.ndarray, rho: float, i: int
) -> float:
    """Creator i's payoff at s = 1 under the proportional rule, in closed form.

    Equals ``creator_utility`` at full sharing:
    mu_eff * (1 + alpha*rho) / (1 + alpha) * X**(gamma-1) * x_i - c_i(x_i),
    with X the total content. Requires the linear AI-quality model.
    """
    p = instance.params
    if p.data_returns_exponent != 1.0:
        raise ValueError("closed form requires data_returns_exponent = 1")
    x = np.asarray(x, dtype=float)
    total = p.prior_data + x.sum()
    if total <= 0.0:
        raise ValueError("full-sharing utility undefined at zero total content")
    k = p.effective_mu * (1.0 + p.alpha * rho) / (1.0 + p.alpha)
    return float(k * total ** (p.gamma - 1.0) * x[i] - instance.costs[i].cost(x[i]))
