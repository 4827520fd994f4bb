"""Sweep engine: seeded instance sampling, rho scans over parameter grids,
bootstrap confidence intervals, and CSV persistence.

A sweep varies one ecosystem parameter over a value list, solves
``instances_per_point`` random instances per value, and records the minimal
stable rho, the platform-optimal rho with its equilibrium outcomes, and the
quality-vs-rho curve on the feasible range.
"""

from __future__ import annotations

import dataclasses
import datetime
import io
import multiprocessing
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .equilibrium import SolverError
from .model import (
    AllocationRule,
    CostModel,
    GameInstance,
    ModelParams,
    Profile,
    RuleKind,
    TrafficMode,
    creator_utility,
)
from .optimizer import Objective, OptimizerConfig, optimize_rho
from .stability import check_fse, min_stable_rho

CSV_SCHEMA = 1

VARIABLE_PARAMS = ("n", "alpha", "mu", "theta", "gamma", "beta_ai", "none")

RAW_COLUMNS = (
    "varied_param",
    "varied_value",
    "instance_seed",
    "converged",
    "min_stable_rho",
    "optimal_rho",
    "platform_revenue_at_opt",
    "mean_creator_utility_at_opt",
    "total_quality_at_opt",
)

SUMMARY_METRICS = (
    "min_stable_rho",
    "optimal_rho",
    "platform_revenue_at_opt",
    "mean_creator_utility_at_opt",
    "total_quality_at_opt",
)

CURVE_RAW_COLUMNS = ("varied_value", "instance_seed", "rho", "total_quality", "feasible")

CURVE_SUMMARY_COLUMNS = (
    "varied_value",
    "rho",
    "feasible_count",
    "total_quality_mean",
    "total_quality_ci_low",
    "total_quality_ci_high",
)


@dataclass(frozen=True)
class SweepSpec:
    """Base configuration plus the single parameter varied across the sweep."""

    n: int = 20
    gamma: float = 0.8
    mu: float = 100.0
    theta: float = 1.5
    alpha: float = 0.5
    a_low: float = 1.0
    a_high: float = 10.0
    beta_ai: float = 1.0
    prior_data: float = 0.0
    traffic_mode: str = "human-only"
    vary: str = "n"
    values: tuple = (5, 10, 20)
    instances_per_point: int = 150
    rho_grid: int = 100
    epsilon: float = 1e-4
    seed: int = 0

    def __post_init__(self):
        if self.vary not in VARIABLE_PARAMS:
            raise ValueError(f"vary must be one of {VARIABLE_PARAMS}, got {self.vary!r}")
        if self.instances_per_point < 1:
            raise ValueError("instances_per_point must be at least 1")
        if self.rho_grid < 2:
            raise ValueError("rho_grid must be at least 2")
        values = tuple(self.values) if self.vary != "none" else (None,)
        object.__setattr__(self, "values", values)

    def at_value(self, value) -> "SweepSpec":
        if self.vary == "none" or value is None:
            return self
        return dataclasses.replace(self, **{self.vary: value})

    def to_dict(self) -> dict:
        doc = dataclasses.asdict(self)
        doc["values"] = list(self.values)
        return doc


def sample_instance(spec: SweepSpec, seed: int) -> GameInstance:
    """Draw one instance: cost coefficients i.i.d. uniform on [a_low, a_high].

    Uses a counter-based generator keyed by ``seed``, so draws are
    deterministic and independent across seeds.
    """
    rng = np.random.Generator(np.random.Philox(key=int(seed)))
    a = rng.uniform(spec.a_low, spec.a_high, int(spec.n))
    params = ModelParams(
        mu=spec.mu,
        gamma=spec.gamma,
        alpha=spec.alpha,
        data_returns_exponent=spec.beta_ai,
        prior_data=spec.prior_data,
        traffic_mode=TrafficMode(spec.traffic_mode),
    )
    return GameInstance.power_costs(a, spec.theta, params)


def instance_seed(spec: SweepSpec, value_idx: int, instance_idx: int) -> int:
    """Stable per-(point, instance) seed derived from the sweep seed."""
    ss = np.random.SeedSequence(entropy=int(spec.seed), spawn_key=(value_idx, instance_idx))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


@dataclass(frozen=True)
class SweepRecord:
    """Per-instance sweep outcomes; optimum fields are None when no rho is stable."""

    varied_value: Optional[float]
    instance_seed: int
    converged: bool
    min_stable_rho: Optional[float]
    optimal_rho: Optional[float]
    platform_revenue_at_opt: Optional[float]
    mean_creator_utility_at_opt: Optional[float]
    total_quality_at_opt: Optional[float]
    quality_curve: tuple  # (rho, total_quality, feasible) triples


def _run_one(args: Tuple[SweepSpec, Optional[float], int, int]) -> SweepRecord:
    spec, value, value_idx, idx = args
    seed = instance_seed(spec, value_idx, idx)
    point_spec = spec.at_value(value)
    inst = sample_instance(point_spec, seed)
    try:
        scan = min_stable_rho(inst, point_spec.rho_grid, point_spec.epsilon)
        opt = optimize_rho(
            inst,
            OptimizerConfig(
                delta=1.0 / point_spec.rho_grid,
                eta=point_spec.epsilon / 4.0,
                objective=Objective.PLATFORM_REVENUE,
            ),
        )
    except (SolverError, np.linalg.LinAlgError):
        return SweepRecord(value, seed, False, None, None, None, None, None, ())
    curve = tuple(
        (p.rho, p.ese_total_quality, p.is_fse) for p in scan.trace if p.solver_converged
    )
    converged = all(p.solver_converged for p in scan.trace)
    if opt.feasible:
        x_hat = opt.ese_at_rho_hat.x_star
        profile = Profile(x_hat, np.ones(inst.n))
        rule = AllocationRule(RuleKind.PROPORTIONAL, opt.rho_hat)
        mean_utility = float(
            np.mean([creator_utility(inst, profile, rule, i) for i in range(inst.n)])
        )
        return SweepRecord(
            value,
            seed,
            converged,
            scan.rho,
            opt.rho_hat,
            opt.objective_value,
            mean_utility,
            float(x_hat.sum()),
            curve,
        )
    return SweepRecord(value, seed, converged, scan.rho, None, None, None, None, curve)


def run_sweep(spec: SweepSpec, workers: int = 1) -> List[SweepRecord]:
    """Solve every (varied value, instance) cell; deterministic in (spec, seed)."""
    jobs = [
        (spec, value, vi, ii)
        for vi, value in enumerate(spec.values)
        for ii in range(spec.instances_per_point)
    ]
    if workers > 1:
        with multiprocessing.Pool(workers) as pool:
            records = pool.map(_run_one, jobs)
    else:
        records = [_run_one(job) for job in jobs]
    return records


# ---------------------------------------------------------------------------
# aggregation and CSV persistence


def bootstrap_ci(
    values: Sequence[float], rng: np.random.Generator, resamples: int = 1000
) -> Tuple[float, float]:
    """Percentile 95% CI of the mean under resampling with replacement."""
    arr = np.asarray(values, dtype=float)
    if arr.size == 0:
        return float("nan"), float("nan")
    idx = rng.integers(0, arr.size, size=(resamples, arr.size))
    means = arr[idx].mean(axis=1)
    return float(np.percentile(means, 2.5)), float(np.percentile(means, 97.5))


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, float) and np.isnan(value):
        return ""
    return repr(value) if isinstance(value, float) else str(value)


def _header(kind: str, spec: SweepSpec, timestamp: str) -> List[str]:
    return [
        f"# schema={CSV_SCHEMA}",
        f"# kind={kind}",
        f"# generated={timestamp}",
        f"# seed={spec.seed} vary={spec.vary} instances_per_point={spec.instances_per_point}",
    ]


def _value_key(value) -> float:
    return float("nan") if value is None else float(value)


def render_raw_csv(spec: SweepSpec, records: Sequence[SweepRecord], timestamp: str) -> str:
    out = io.StringIO()
    for line in _header("raw", spec, timestamp):
        out.write(line + "\n")
    out.write(",".join(RAW_COLUMNS) + "\n")
    for r in records:
        out.write(
            ",".join(
                [
                    spec.vary,
                    _fmt(_value_key(r.varied_value)),
                    str(r.instance_seed),
                    _fmt(r.converged),
                    _fmt(r.min_stable_rho),
                    _fmt(r.optimal_rho),
                    _fmt(r.platform_revenue_at_opt),
                    _fmt(r.mean_creator_utility_at_opt),
                    _fmt(r.total_quality_at_opt),
                ]
            )
            + "\n"
        )
    return out.getvalue()


def render_summary_csv(spec: SweepSpec, records: Sequence[SweepRecord], timestamp: str) -> str:
    out = io.StringIO()
    for line in _header("summary", spec, timestamp):
        out.write(line + "\n")
    columns = ["varied_param", "varied_value", "count", "converged_count"]
    for metric in SUMMARY_METRICS:
        columns += [f"{metric}_mean", f"{metric}_ci_low", f"{metric}_ci_high"]
    out.write(",".join(columns) + "\n")
    rng = np.random.Generator(np.random.Philox(key=int(spec.seed) ^ 0xB00757AA))
    for value in spec.values:
        group = [r for r in records if r.varied_value == value]
        used = [r for r in group if r.converged]
        row = [
            spec.vary,
            _fmt(_value_key(value)),
            str(len(group)),
            str(len(used)),
        ]
        for metric in SUMMARY_METRICS:
            vals = [getattr(r, metric) for r in used if getattr(r, metric) is not None]
            if vals:
                lo, hi = bootstrap_ci(vals, rng)
                row += [_fmt(float(np.mean(vals))), _fmt(lo), _fmt(hi)]
            else:
                row += ["", "", ""]
        out.write(",".join(row) + "\n")
    return out.getvalue()


def render_curve_raw_csv(spec: SweepSpec, records: Sequence[SweepRecord], timestamp: str) -> str:
    out = io.StringIO()
    for line in _header("quality-curve-raw", spec, timestamp):
        out.write(line + "\n")
    out.write(",".join(CURVE_RAW_COLUMNS) + "\n")
    for r in records:
        for rho, quality, feasible in r.quality_curve:
            out.write(
                ",".join(
                    [
                        _fmt(_value_key(r.varied_value)),
                        str(r.instance_seed),
                        _fmt(float(rho)),
                        _fmt(float(quality)),
                        _fmt(bool(feasible)),
                    ]
                )
                + "\n"
            )
    return out.getvalue()


def render_curve_summary_csv(
    spec: SweepSpec, records: Sequence[SweepRecord], timestamp: str
) -> str:
    """Mean feasible-range quality per (value, rho); rows keep the rho grid order."""
    out = io.StringIO()
    for line in _header("quality-curve-summary", spec, timestamp):
        out.write(line + "\n")
    out.write(",".join(CURVE_SUMMARY_COLUMNS) + "\n")
    rng = np.random.Generator(np.random.Philox(key=int(spec.seed) ^ 0xC0FFEE11))
    for value in spec.values:
        group = [r for r in records if r.varied_value == value and r.converged]
        by_rho: dict = {}
        for r in group:
            for rho, quality, feasible in r.quality_curve:
                if feasible:
                    by_rho.setdefault(round(float(rho), 12), []).append(float(quality))
        for rho in sorted(by_rho):
            vals = by_rho[rho]
            lo, hi = bootstrap_ci(vals, rng)
            out.write(
                ",".join(
                    [
                        _fmt(_value_key(value)),
                        _fmt(float(rho)),
                        str(len(vals)),
                        _fmt(float(np.mean(vals))),
                        _fmt(lo),
                        _fmt(hi),
                    ]
                )
                + "\n"
            )
    return out.getvalue()


def write_sweep_csvs(
    spec: SweepSpec,
    records: Sequence[SweepRecord],
    out_dir,
    timestamp: Optional[str] = None,
) -> dict:
    """Write raw/summary/curve CSVs; every byte except the timestamp header is
    determined by (spec, records)."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    ts = timestamp or datetime.datetime.now(datetime.timezone.utc).isoformat()
    files = {
        "raw": out / "raw.csv",
        "summary": out / "summary.csv",
        "quality_curve_raw": out / "quality_curve_raw.csv",
        "quality_curve_summary": out / "quality_curve_summary.csv",
    }
    files["raw"].write_text(render_raw_csv(spec, records, ts))
    files["summary"].write_text(render_summary_csv(spec, records, ts))
    files["quality_curve_raw"].write_text(render_curve_raw_csv(spec, records, ts))
    files["quality_curve_summary"].write_text(render_curve_summary_csv(spec, records, ts))
    return {k: str(v) for k, v in files.items()}


# ---------------------------------------------------------------------------
# counterexamples for the alternative allocation rules


def run_counterexamples(tol: float = 1e-6) -> dict:
    """Reproduce the instability constructions for the WTA and BTES rules.

    Checks the two-creator equal-shares instance (equilibrium (37.5, 9.375),
    withholding pays), that the proportional rule stabilizes the same
    instance at rho = 1, and that under winner-takes-all both distinct
    qualities (withholding) and exact ties (tiny overshoot) break stability.
    """
    from .equilibrium import solve_ese_btes, solve_ese_foc
    from .best_response import best_quality_given_sharing

    checks = {}

    params = ModelParams(mu=10.0, gamma=1.0, alpha=1.0)
    inst = GameInstance(
        2, (CostModel.power(0.1, 2.0), CostModel.power(0.4, 2.0)), params
    )
    ese = solve_ese_btes(inst, 1.0)
    x = ese.x_star
    rule = AllocationRule(RuleKind.BTES, 1.0)
    u1 = creator_utility(inst, Profile(x, np.ones(2)), rule, 0)
    u1_dev = creator_utility(inst, Profile(x, np.array([0.0, 1.0])), rule, 0)
    btes_report = check_fse(inst, x, 1.0, epsilon=1e-4, rule_kind=RuleKind.BTES)
    checks["btes"] = {
        "x_star": [float(v) for v in x],
        "x_star_ok": bool(np.allclose(x, [37.5, 9.375], atol=tol)),
        "u1": float(u1),
        "u1_ok": bool(abs(u1 - 164.0625) <= tol),
        "u1_dev": float(u1_dev),
        "u1_dev_ok": bool(abs(u1_dev - 171.875) <= tol),
        "fse_fails": bool(not btes_report.is_fse),
        "max_gain": btes_report.max_gain,
    }

    prop_ese = solve_ese_foc(inst, 1.0)
    prop_report = check_fse(inst, prop_ese.x_star, 1.0, epsilon=1e-4)
    checks["proportional_contrast"] = {
        "is_fse": bool(prop_report.is_fse),
        "max_gain": prop_report.max_gain,
    }

    # WTA, distinct qualities: a non-winner gains by withholding
    params3 = ModelParams(mu=50.0, gamma=0.8, alpha=1.0)
    inst3 = GameInstance.power_costs([1.0, 2.0, 4.0], 1.5, params3)
    x3 = solve_ese_foc(inst3, 1.0).x_star
    wta = AllocationRule(RuleKind.WTA, 1.0)
    loser = int(np.argmin(x3))
    ref = creator_utility(inst3, Profile(x3, np.ones(3)), wta, loser)
    dev = best_quality_given_sharing(
        inst3, np.delete(x3, loser), np.ones(2), loser, 0.0, 1.0, RuleKind.WTA,
        reference_utility=ref,
    )
    checks["wta_distinct"] = {
        "x": [float(v) for v in x3],
        "loser": loser,
        "gain": dev.gain,
        "gain_positive": bool(dev.gain > 0.0),
    }

    # WTA, equal qualities: overshooting the tie grabs the whole pot
    inst_eq = GameInstance.power_costs([2.0, 2.0, 2.0], 1.5, params3)
    x_eq = solve_ese_foc(inst_eq, 1.0).x_star
    u_tie = creator_utility(inst_eq, Profile(x_eq, np.ones(3)), wta, 0)
    x_pert = x_eq.copy()
    x_pert[0] += 1e-6
    u_pert = creator_utility(inst_eq, Profile(x_pert, np.ones(3)), wta, 0)
    checks["wta_tie"] = {
        "gain": float(u_pert - u_tie),
        "gain_positive": bool(u_pert > u_tie),
    }

    checks["ok"] = bool(
        checks["btes"]["x_star_ok"]
        and checks["btes"]["u1_ok"]
        and checks["btes"]["u1_dev_ok"]
        and checks["btes"]["fse_fails"]
        and checks["proportional_contrast"]["is_fse"]
        and checks["wta_distinct"]["gain_positive"]
        and checks["wta_tie"]["gain_positive"]
    )
    return checks
