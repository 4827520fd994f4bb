"""Full-sharing stability: the deviation checker and the minimal stable rho scan."""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from .best_response import DEFAULT_GRID_SIZE, DeviationResult, deviation_gain
from .equilibrium import EseResult, SolverError, solve_ese, x_max_vector
from .model import GameInstance, RuleKind


@dataclass(frozen=True)
class FseReport:
    """Verdict on whether a full-sharing profile is stable at tolerance epsilon."""

    is_fse: bool
    epsilon: float
    per_creator_gain: np.ndarray
    worst_creator: int
    worst_deviation: DeviationResult

    def __post_init__(self):
        g = np.asarray(self.per_creator_gain, dtype=float).copy()
        g.flags.writeable = False
        object.__setattr__(self, "per_creator_gain", g)

    @property
    def max_gain(self) -> float:
        return float(self.per_creator_gain.max())

    def to_dict(self) -> dict:
        return {
            "is_fse": self.is_fse,
            "epsilon": self.epsilon,
            "per_creator_gain": [float(g) for g in self.per_creator_gain],
            "worst_creator": self.worst_creator,
            "worst_deviation": self.worst_deviation.to_dict(),
        }


@dataclass(frozen=True)
class RhoScanPoint:
    """One grid point of a minimal-stable-rho scan."""

    rho: float
    is_fse: bool
    max_gain: float
    ese_total_quality: float
    solver_converged: bool


@dataclass(frozen=True)
class MinStableRhoResult:
    """Smallest stable grid rho (None if no grid point is stable) plus the full scan."""

    rho: Optional[float]
    trace: tuple

    def to_dict(self) -> dict:
        def clean(v: float) -> Optional[float]:
            return None if np.isnan(v) else float(v)

        return {
            "min_stable_rho": self.rho,
            "trace": [
                {
                    "rho": p.rho,
                    "is_fse": p.is_fse,
                    "max_gain": clean(p.max_gain),
                    "ese_total_quality": clean(p.ese_total_quality),
                    "solver_converged": p.solver_converged,
                }
                for p in self.trace
            ],
        }


def min_stable_trace_csv(result: MinStableRhoResult) -> str:
    """One CSV row per scanned grid point."""
    lines = ["rho,is_fse,max_gain,ese_total_quality"]
    for p in result.trace:
        lines.append(
            f"{p.rho!r},{int(p.is_fse)},{p.max_gain!r},{p.ese_total_quality!r}"
        )
    return "\n".join(lines) + "\n"


def check_fse(
    instance: GameInstance,
    x: np.ndarray,
    rho: float,
    epsilon: float = 1e-4,
    rule_kind: RuleKind = RuleKind.PROPORTIONAL,
    grid_size: int = DEFAULT_GRID_SIZE,
) -> FseReport:
    """Decide whether (x, full sharing) is an epsilon-FSE under the given rule.

    Both deviation branches (keep sharing / withhold) are searched for every
    creator, so candidate profiles carrying solver error are handled
    conservatively.
    """
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0):
        raise ValueError("the candidate profile must be strictly positive")
    gains = np.empty(instance.n)
    deviations: List[DeviationResult] = []
    for i in range(instance.n):
        dev = deviation_gain(instance, x, rho, i, rule_kind=rule_kind, grid_size=grid_size)
        gains[i] = dev.gain
        deviations.append(dev)
    worst = int(np.argmax(gains))
    return FseReport(
        is_fse=bool(gains[worst] <= epsilon),
        epsilon=epsilon,
        per_creator_gain=gains,
        worst_creator=worst,
        worst_deviation=deviations[worst],
    )


def check_fse_sufficient_condition(
    instance: GameInstance, rho: float, ese: EseResult
) -> bool:
    """One-directional test: rho above every creator's worst-case threshold.

    True guarantees the equilibrium profile is the unique FSE; False is
    inconclusive.
    """
    x_max = x_max_vector(instance)
    x = ese.x_star
    total = x.sum()
    alpha = instance.params.alpha
    thresholds = x_max / (x_max + (1.0 + alpha) * (total - x))
    return bool(rho > float(thresholds.max()))


def rho_grid(size: int) -> np.ndarray:
    """Inclusive, equally spaced grid on [0, 1]; rho = 1 is always a point."""
    if size < 2:
        raise ValueError("rho grid needs at least 2 points")
    return np.linspace(0.0, 1.0, size)


def _scan_point(
    instance: GameInstance,
    rho: float,
    epsilon: float,
    rule_kind: RuleKind,
    grid_size: int,
) -> RhoScanPoint:
    try:
        ese = solve_ese(instance, rho, rule_kind)
    except (SolverError, ValueError):  # pragma: no cover - defensive
        return RhoScanPoint(rho, False, float("nan"), float("nan"), False)
    if not ese.converged or np.any(ese.x_star <= 0):
        return RhoScanPoint(rho, False, float("nan"), ese.total_quality, False)
    report = check_fse(instance, ese.x_star, rho, epsilon, rule_kind, grid_size)
    return RhoScanPoint(rho, report.is_fse, report.max_gain, ese.total_quality, True)


def _scan_point_job(args) -> RhoScanPoint:
    return _scan_point(*args)


def min_stable_rho(
    instance: GameInstance,
    rho_grid_size: int = 100,
    epsilon: float = 1e-4,
    rule_kind: RuleKind = RuleKind.PROPORTIONAL,
    refine: bool = False,
    refine_tol: float = 1e-4,
    grid_size: int = DEFAULT_GRID_SIZE,
    workers: int = 1,
) -> MinStableRhoResult:
    """Scan an equally spaced rho grid and return the smallest stable point.

    Every grid point is solved and checked (the scan trace is part of the
    result); with ``refine`` the boundary between the last unstable and first
    stable grid points is bisected down to ``refine_tol``. Each grid point is
    a pure computation, so ``workers`` may fan them out across processes
    (power-cost instances only; custom cost callables do not pickle).
    """
    jobs = [
        (instance, float(r), epsilon, rule_kind, grid_size) for r in rho_grid(rho_grid_size)
    ]
    if workers > 1:
        import multiprocessing

        with multiprocessing.Pool(workers) as pool:
            trace = pool.map(_scan_point_job, jobs)
    else:
        trace = [_scan_point_job(job) for job in jobs]
    stable = [p for p in trace if p.is_fse]
    if not stable:
        return MinStableRhoResult(None, tuple(trace))
    first = min(stable, key=lambda p: p.rho)
    value = first.rho
    if refine and value > 0.0:
        unstable_below = [p.rho for p in trace if p.rho < value]
        lo = max(unstable_below) if unstable_below else 0.0
        hi = value
        while hi - lo > refine_tol:
            mid = 0.5 * (lo + hi)
            if _scan_point(instance, mid, epsilon, rule_kind, grid_size).is_fse:
                hi = mid
            else:
                lo = mid
        value = hi
    return MinStableRhoResult(value, tuple(trace))
