"""The platform's problem: pick rho to maximize an objective subject to stability.

The solver is a grid scan: at each candidate rho it computes the
enforced-sharing equilibrium, verifies stability of full sharing, and keeps
the best feasible objective. Theoretical step/tolerance constants are exposed
as diagnostics only; they scale polynomially in n and are far too
conservative to drive the scan in practice.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np

from .equilibrium import (
    BoundsLedger,
    EseResult,
    SolverError,
    bounds_ledger,
    solve_ese,
)
from .model import AllocationRule, GameInstance, Profile, RuleKind, creator_utility, platform_revenue
from .stability import FseReport, check_fse


class Objective(str, Enum):
    PLATFORM_REVENUE = "platform-revenue"
    TOTAL_QUALITY = "total-quality"
    CREATOR_WELFARE = "creator-welfare"
    REGULARIZED = "regularized"


@dataclass(frozen=True)
class OptimizerConfig:
    """Scan resolution, stability tolerance, and the objective to maximize.

    Defaults follow the 100-point grid with stability tolerance eta = eps/4
    at eps = 1e-4.
    """

    delta: float = 0.01
    eta: float = 2.5e-5
    objective: Objective = Objective.PLATFORM_REVENUE
    lam: float = 0.0
    use_theoretical_constants: bool = False
    deviation_grid_size: int = 4096
    refine_boundary: bool = True
    boundary_tol: float = 1e-6

    def __post_init__(self):
        if not 0.0 < self.delta <= 1.0:
            raise ValueError(f"delta must lie in (0, 1], got {self.delta}")
        if self.eta <= 0.0:
            raise ValueError(f"eta must be positive, got {self.eta}")
        if not 0.0 <= self.lam <= 1.0:
            raise ValueError(f"lambda must lie in [0, 1], got {self.lam}")
        object.__setattr__(self, "objective", Objective(self.objective))


@dataclass(frozen=True)
class ScanRecord:
    rho: float
    feasible: bool
    objective: float
    total_quality: float
    max_deviation_gain: float


@dataclass(frozen=True)
class OptimizerResult:
    """Best stable rho found by the scan, or an explicitly infeasible outcome."""

    feasible: bool
    rho_hat: Optional[float]
    objective_value: Optional[float]
    ese_at_rho_hat: Optional[EseResult]
    fse_report: Optional[FseReport]
    scan_trace: tuple

    def to_dict(self) -> dict:
        def clean(v: float) -> Optional[float]:
            return None if np.isnan(v) else float(v)

        return {
            "feasible": self.feasible,
            "rho_hat": self.rho_hat,
            "objective_value": self.objective_value,
            "ese_at_rho_hat": self.ese_at_rho_hat.to_dict() if self.ese_at_rho_hat else None,
            "fse_report": self.fse_report.to_dict() if self.fse_report else None,
            "scan_trace": [
                {
                    "rho": r.rho,
                    "feasible": r.feasible,
                    "objective": clean(r.objective),
                    "total_quality": clean(r.total_quality),
                    "max_deviation_gain": clean(r.max_deviation_gain),
                }
                for r in self.scan_trace
            ],
        }


def scan_trace_csv(result: OptimizerResult) -> str:
    """One CSV row per scanned rho candidate."""
    lines = ["rho,feasible,objective,total_quality,max_deviation_gain"]
    for r in result.scan_trace:
        lines.append(
            f"{r.rho!r},{int(r.feasible)},{r.objective!r},{r.total_quality!r},"
            f"{r.max_deviation_gain!r}"
        )
    return "\n".join(lines) + "\n"


def evaluate_objective(
    instance: GameInstance, x: np.ndarray, rho: float, config: OptimizerConfig
) -> float:
    """Platform objective at the full-sharing profile (x, 1) under rho."""
    x = np.asarray(x, dtype=float)
    if config.objective is Objective.TOTAL_QUALITY:
        return float(x.sum())
    profile = Profile(x, np.ones(instance.n))
    rule = AllocationRule(RuleKind.PROPORTIONAL, rho)
    if config.objective is Objective.PLATFORM_REVENUE:
        return platform_revenue(instance, profile, rule)
    if config.objective is Objective.CREATOR_WELFARE:
        return float(sum(creator_utility(instance, profile, rule, i) for i in range(instance.n)))
    revenue = platform_revenue(instance, profile, rule)
    return float((1.0 - config.lam) * revenue + config.lam * x.sum())


def scan_grid(delta: float) -> np.ndarray:
    """Candidate allocation parameters t / ceil(1/delta), t = 1..ceil(1/delta)."""
    m = math.ceil(1.0 / delta)
    return np.minimum(np.arange(1, m + 1) / m, 1.0)


def _evaluate_candidate(instance, rho, config):
    """Solve, stability-check, and score one rho candidate; None on failure."""
    try:
        ese = solve_ese(instance, rho, RuleKind.PROPORTIONAL)
    except (SolverError, ValueError):
        return None
    if not ese.converged or np.any(ese.x_star <= 0):
        return None
    report = check_fse(
        instance, ese.x_star, rho, epsilon=config.eta, grid_size=config.deviation_grid_size
    )
    value = evaluate_objective(instance, ese.x_star, rho, config)
    return ese, report, value


def _evaluate_candidate_job(args):
    return _evaluate_candidate(*args)


def optimize_rho(
    instance: GameInstance,
    config: OptimizerConfig = OptimizerConfig(),
    workers: int = 1,
) -> OptimizerResult:
    """Grid search over rho with a stability check at every candidate.

    Solver failures mark their grid point infeasible and the scan continues;
    ties in the objective resolve to the smaller rho. When no candidate is
    stable the result is explicitly infeasible (rather than silently
    reporting rho = 0, which never induces full sharing).

    With revenue-style objectives the optimum usually sits on the stability
    boundary, where a grid scan leaves up to slope*delta of objective on the
    table. ``refine_boundary`` therefore bisects the feasibility boundary
    just below the best grid point (down to ``boundary_tol`` in rho) and
    returns the refined point when it scores higher; the scan trace still
    holds exactly the grid records.
    """
    if config.use_theoretical_constants:
        consts = theoretical_constants(instance)
        config = OptimizerConfig(
            delta=min(config.delta, 4.0 * config.eta / consts.A),
            eta=config.eta,
            objective=config.objective,
            lam=config.lam,
            deviation_grid_size=config.deviation_grid_size,
        )
    trace = []
    best: Optional[ScanRecord] = None
    best_ese: Optional[EseResult] = None
    best_report: Optional[FseReport] = None
    grid = [float(r) for r in scan_grid(config.delta)]
    if workers > 1:
        import multiprocessing

        with multiprocessing.Pool(workers) as pool:
            evaluations = pool.map(
                _evaluate_candidate_job, [(instance, rho, config) for rho in grid]
            )
    else:
        evaluations = (_evaluate_candidate(instance, rho, config) for rho in grid)
    for rho, evaluated in zip(grid, evaluations):
        if evaluated is None:
            trace.append(ScanRecord(rho, False, float("nan"), float("nan"), float("nan")))
            continue
        ese, report, value = evaluated
        record = ScanRecord(rho, report.is_fse, value, ese.total_quality, report.max_gain)
        trace.append(record)
        if report.is_fse and (best is None or value > best.objective):
            best, best_ese, best_report = record, ese, report
    if best is None:
        return OptimizerResult(False, None, None, None, None, tuple(trace))

    best_rho, best_value = best.rho, best.objective
    if config.refine_boundary:
        # bisect only when the point just below the winner is unstable (or
        # off the grid): that is where a boundary optimum hides
        idx = grid.index(best_rho)
        below_infeasible = idx == 0 or not trace[idx - 1].feasible
        if below_infeasible and best_rho > config.boundary_tol:
            lo = grid[idx - 1] if idx > 0 else 0.0
            hi = best_rho
            while hi - lo > config.boundary_tol:
                mid = 0.5 * (lo + hi)
                evaluated = _evaluate_candidate(instance, mid, config)
                if evaluated is not None and evaluated[1].is_fse:
                    hi = mid
                    if evaluated[2] > best_value:
                        best_rho, best_value = mid, evaluated[2]
                        best_ese, best_report = evaluated[0], evaluated[1]
                else:
                    lo = mid
    return OptimizerResult(
        True, best_rho, best_value, best_ese, best_report, tuple(trace)
    )


# ---------------------------------------------------------------------------
# theoretical constants (diagnostics)


def b_bound(
    q: float, u: float, v: float, w: float, t: float, ledger: BoundsLedger, mu: float, n: int
) -> float:
    """The parametrized bound family used by the approximation analysis.

    b = q * M_c' + mu * u * n**v * (1 + x_max + Y_UB)**w / Y_LB**t
    """
    x_max_global = float(np.max(ledger.x_max))
    return float(
        q * ledger.M_cprime
        + mu * u * n**v * (1.0 + x_max_global + ledger.Y_UB) ** w / ledger.Y_LB**t
    )


@dataclass(frozen=True)
class TheoreticalConstants:
    """Grid/tolerance constants of the approximation guarantee (diagnostic only)."""

    A: float
    B: float
    ese_lipschitz: float
    deviation_lipschitz: float
    strong_convexity: float
    ledger: BoundsLedger

    def to_dict(self) -> dict:
        return {
            "A": self.A,
            "B": self.B,
            "ese_lipschitz": self.ese_lipschitz,
            "deviation_lipschitz": self.deviation_lipschitz,
            "strong_convexity": self.strong_convexity,
            "ledger": self.ledger.to_dict(),
        }


def _strong_convexity(instance: GameInstance, ledger: BoundsLedger) -> float:
    """Smallest curvature lower bound across creators on their strategy spaces.

    Power costs have decreasing curvature, so the bound is c'' at the
    creator's own quality cap; explicit moduli take precedence.
    """
    moduli = []
    for cost, xm in zip(instance.costs, ledger.x_max):
        if cost.strong_convexity_modulus > 0.0:
            moduli.append(cost.strong_convexity_modulus)
        elif cost.kind == "power":
            moduli.append(float(cost.curvature(float(xm))))
        else:
            raise ValueError(
                "theoretical constants need a positive strong_convexity_modulus "
                "for every custom cost model"
            )
    return min(moduli)


def theoretical_constants(instance: GameInstance) -> TheoreticalConstants:
    """Evaluate the approximation-guarantee constants for this instance."""
    p = instance.params
    ledger = bounds_ledger(instance)
    beta_sc = _strong_convexity(instance, ledger)
    n, mu = instance.n, p.mu
    ese_lip = b_bound(0.0, 1.0 / beta_sc, 0.5, 1.0, 2.0 - p.gamma, ledger, mu, n)
    a_const = 4.0 * b_bound(
        1.0, (5.0 + p.alpha) * 2.0 ** (6.0 - p.gamma), 0.5, 3.0, 3.0 - p.gamma, ledger, mu, n
    ) * (1.0 + ese_lip)
    dev_lip = b_bound(1.0, 5.0 * 2.0 ** (5.0 - p.gamma), 0.0, 2.0, 3.0 - p.gamma, ledger, mu, n)
    b_const = n * (1.0 + dev_lip * float(np.max(ledger.x_max)))
    return TheoreticalConstants(
        A=a_const,
        B=b_const,
        ese_lipschitz=ese_lip,
        deviation_lipschitz=dev_lip,
        strong_convexity=beta_sc,
        ledger=ledger,
    )


# ---------------------------------------------------------------------------
# fixed-rho refinements for power costs


def _common_power_exponent(instance: GameInstance) -> float:
    if any(c.kind != "power" for c in instance.costs):
        raise ValueError("power-cost refinements require power cost models")
    thetas = {c.theta for c in instance.costs}
    if len(thetas) != 1:
        raise ValueError("power-cost refinements require a common exponent")
    return float(next(iter(thetas)))


def closed_form_rho(instance: GameInstance) -> Optional[float]:
    """n-free allocation parameter (alpha*gamma + gamma - theta) / (alpha*theta).

    Defined when (alpha + 1) * gamma > theta; None otherwise. The returned
    value always lies in (0, 1).
    """
    theta = _common_power_exponent(instance)
    p = instance.params
    if (p.alpha + 1.0) * p.gamma <= theta:
        return None
    return float((p.alpha * p.gamma + p.gamma - theta) / (p.alpha * theta))


@dataclass(frozen=True)
class GuaranteeReport:
    """Fixed-rho revenue vs. the scanned optimum, against the predicted factor."""

    rho_fixed: float
    fse_ok: bool
    revenue_fixed: float
    opt_rho: Optional[float]
    opt_revenue: Optional[float]
    ratio: Optional[float]
    required_factor: float
    holds: bool

    def to_dict(self) -> dict:
        return {
            "rho_fixed": self.rho_fixed,
            "fse_ok": self.fse_ok,
            "revenue_fixed": self.revenue_fixed,
            "opt_rho": self.opt_rho,
            "opt_revenue": self.opt_revenue,
            "ratio": self.ratio,
            "required_factor": self.required_factor,
            "holds": self.holds,
        }


def verify_approx_guarantee(
    instance: GameInstance,
    rho_fixed: Optional[float] = None,
    config: OptimizerConfig = OptimizerConfig(),
    epsilon: float = 1e-4,
) -> GuaranteeReport:
    """Measure how the closed-form rho compares with the scanned optimum."""
    theta = _common_power_exponent(instance)
    p = instance.params
    if rho_fixed is None:
        rho_fixed = closed_form_rho(instance)
        if rho_fixed is None:
            raise ValueError("closed-form rho undefined: (alpha+1)*gamma <= theta")
    required = (2.0 * p.alpha + 2.0) ** (-p.gamma / (theta - p.gamma))

    ese = solve_ese(instance, rho_fixed, RuleKind.PROPORTIONAL)
    report = check_fse(
        instance, ese.x_star, rho_fixed, epsilon=epsilon, grid_size=config.deviation_grid_size
    )
    revenue = platform_revenue(
        instance,
        Profile(ese.x_star, np.ones(instance.n)),
        AllocationRule(RuleKind.PROPORTIONAL, rho_fixed),
    )
    scan = optimize_rho(instance, config)
    ratio = revenue / scan.objective_value if scan.feasible and scan.objective_value else None
    holds = bool(report.is_fse and ratio is not None and ratio >= required)
    return GuaranteeReport(
        rho_fixed=float(rho_fixed),
        fse_ok=report.is_fse,
        revenue_fixed=revenue,
        opt_rho=scan.rho_hat,
        opt_revenue=scan.objective_value,
        ratio=ratio,
        required_factor=float(required),
        holds=holds,
    )
