"""HTTP facade over the solver library.

Request/response schemas are pydantic models mirroring the JSON wire format
of the CLI; the handlers are plain functions so the CLI can invoke them
in-process, and the FastAPI routes are thin wrappers that translate library
errors into HTTP status codes. Run with ``uvicorn genai_share.service:app``
or ``genai-share serve``.
"""

from __future__ import annotations

from typing import List, Literal, Optional

import numpy as np
from fastapi import FastAPI, HTTPException
from pydantic import BaseModel, Field

from . import experiments
from .equilibrium import (
    SolverError,
    solve_ese,
    solve_ese_dynamics_beta,
    solve_ese_foc,
    solve_ese_mamd,
)
from .model import GameInstance, RuleKind
from .optimizer import (
    Objective,
    OptimizerConfig,
    optimize_rho,
    scan_trace_csv,
    theoretical_constants,
)
from .stability import check_fse, min_stable_rho, min_stable_trace_csv


class CostModelIn(BaseModel):
    kind: Literal["power"] = "power"
    a: float = Field(gt=0)
    theta: float = Field(gt=1.0, le=2.0)
    strong_convexity_modulus: float = Field(default=0.0, ge=0.0)


class ParamsIn(BaseModel):
    mu: float = Field(gt=0)
    gamma: float = Field(ge=0.0, le=1.0)
    alpha: float = Field(gt=0)
    beta_ai: float = Field(default=1.0, gt=0.0, le=1.0)
    x0: float = Field(default=0.0, ge=0.0)
    traffic_mode: Literal["human-only", "human-plus-ai"] = "human-only"


class InstanceIn(BaseModel):
    n: int = Field(ge=2)
    params: ParamsIn
    costs: List[CostModelIn]

    def build(self) -> GameInstance:
        return GameInstance.from_dict(self.model_dump())

    @staticmethod
    def from_instance(instance: GameInstance) -> "InstanceIn":
        return InstanceIn.model_validate(instance.to_dict())


class DeviationOut(BaseModel):
    best_x: float
    best_s: float
    gain: float
    evaluations: int


class EseOut(BaseModel):
    x_star: List[float]
    residual: float
    method: str
    iterations: int
    converged: bool
    total_quality: float


class FseOut(BaseModel):
    is_fse: bool
    epsilon: float
    per_creator_gain: List[float]
    worst_creator: int
    worst_deviation: DeviationOut


RuleName = Literal["proportional", "wta", "btes"]


class SolveEseRequest(BaseModel):
    instance: InstanceIn
    rho: float = Field(ge=0.0, le=1.0)
    rule: Literal["proportional", "btes"] = "proportional"
    method: Literal["auto", "foc", "mamd", "dynamics"] = "auto"
    tol: float = 1e-10
    mamd_steps: int = 100_000
    damping: float = 0.5


class CheckFseRequest(BaseModel):
    instance: InstanceIn
    rho: float = Field(ge=0.0, le=1.0)
    epsilon: float = 1e-4
    rule: RuleName = "proportional"
    x: Optional[List[float]] = None  # candidate profile; solved when omitted


class CheckFseResponse(BaseModel):
    report: FseOut
    ese: Optional[EseOut] = None


class OptimizeRequest(BaseModel):
    instance: InstanceIn
    delta: float = 0.01
    eta: float = 2.5e-5
    objective: Literal[
        "platform-revenue", "total-quality", "creator-welfare", "regularized"
    ] = "platform-revenue"
    lam: float = Field(default=0.0, ge=0.0, le=1.0)
    workers: int = Field(default=1, ge=1)


class ScanRecordOut(BaseModel):
    rho: float
    feasible: bool
    objective: Optional[float]
    total_quality: Optional[float]
    max_deviation_gain: Optional[float]


class OptimizeResponse(BaseModel):
    feasible: bool
    rho_hat: Optional[float]
    objective_value: Optional[float]
    ese_at_rho_hat: Optional[EseOut]
    fse_report: Optional[FseOut]
    scan_trace: List[ScanRecordOut]
    scan_trace_csv: str


class MinStableRhoRequest(BaseModel):
    instance: InstanceIn
    rho_grid: int = Field(default=100, ge=2)
    epsilon: float = 1e-4
    rule: Literal["proportional", "btes"] = "proportional"
    refine: bool = False
    workers: int = Field(default=1, ge=1)


class RhoScanPointOut(BaseModel):
    rho: float
    is_fse: bool
    max_gain: Optional[float]
    ese_total_quality: Optional[float]
    solver_converged: bool


class MinStableRhoResponse(BaseModel):
    min_stable_rho: Optional[float]
    trace: List[RhoScanPointOut]
    trace_csv: str


class ConstantsRequest(BaseModel):
    instance: InstanceIn


class ConstantsResponse(BaseModel):
    A: float
    B: float
    ese_lipschitz: float
    deviation_lipschitz: float
    strong_convexity: float
    ledger: dict


class SweepRequest(BaseModel):
    n: int = 20
    gamma: float = 0.8
    mu: float = 100.0
    theta: float = 1.5
    alpha: float = 0.5
    a_low: float = 1.0
    a_high: float = 10.0
    beta_ai: float = 1.0
    x0: float = 0.0
    traffic_mode: Literal["human-only", "human-plus-ai"] = "human-only"
    vary: Literal["n", "alpha", "mu", "theta", "gamma", "beta_ai", "none"] = "n"
    values: List[float] = [5, 10, 20]
    instances_per_point: int = Field(default=30, ge=1)
    rho_grid: int = Field(default=100, ge=2)
    epsilon: float = 1e-4
    seed: int = 0
    workers: int = Field(default=1, ge=1)

    def build(self) -> experiments.SweepSpec:
        return experiments.SweepSpec(
            n=self.n,
            gamma=self.gamma,
            mu=self.mu,
            theta=self.theta,
            alpha=self.alpha,
            a_low=self.a_low,
            a_high=self.a_high,
            beta_ai=self.beta_ai,
            prior_data=self.x0,
            traffic_mode=self.traffic_mode,
            vary=self.vary,
            values=tuple(self.values),
            instances_per_point=self.instances_per_point,
            rho_grid=self.rho_grid,
            epsilon=self.epsilon,
            seed=self.seed,
        )


class SweepRecordOut(BaseModel):
    varied_value: Optional[float]
    instance_seed: int
    converged: bool
    min_stable_rho: Optional[float]
    optimal_rho: Optional[float]
    platform_revenue_at_opt: Optional[float]
    mean_creator_utility_at_opt: Optional[float]
    total_quality_at_opt: Optional[float]


class SweepResponse(BaseModel):
    records: List[SweepRecordOut]
    csv: dict  # file stem -> rendered CSV text


# ---------------------------------------------------------------------------
# handlers (shared by the HTTP routes and the CLI's in-process mode)


def handle_solve_ese(req: SolveEseRequest) -> EseOut:
    instance = req.instance.build()
    rule = RuleKind(req.rule)
    if req.method == "auto":
        result = solve_ese(instance, req.rho, rule, tol=req.tol)
    elif req.method == "foc":
        if rule is RuleKind.BTES:
            from .equilibrium import solve_ese_btes

            result = solve_ese_btes(instance, req.rho, tol=req.tol)
        else:
            result = solve_ese_foc(instance, req.rho, tol=req.tol)
    elif req.method == "mamd":
        if rule is not RuleKind.PROPORTIONAL:
            raise ValueError("mirror descent only supports the proportional rule")
        result = solve_ese_mamd(instance, req.rho, steps=req.mamd_steps)
    else:
        if rule is not RuleKind.PROPORTIONAL:
            raise ValueError("best-response dynamics only support the proportional rule")
        result = solve_ese_dynamics_beta(instance, req.rho, damping=req.damping)
    return EseOut(total_quality=result.total_quality, **result.to_dict())


def handle_check_fse(req: CheckFseRequest) -> CheckFseResponse:
    instance = req.instance.build()
    rule = RuleKind(req.rule)
    ese_out = None
    if req.x is None:
        solve_rule = rule if rule is not RuleKind.WTA else RuleKind.PROPORTIONAL
        ese = solve_ese(instance, req.rho, solve_rule)
        x = ese.x_star
        ese_out = EseOut(total_quality=ese.total_quality, **ese.to_dict())
    else:
        x = np.asarray(req.x, dtype=float)
    report = check_fse(instance, x, req.rho, epsilon=req.epsilon, rule_kind=rule)
    return CheckFseResponse(report=FseOut.model_validate(report.to_dict()), ese=ese_out)


def handle_optimize(req: OptimizeRequest) -> OptimizeResponse:
    instance = req.instance.build()
    config = OptimizerConfig(
        delta=req.delta, eta=req.eta, objective=Objective(req.objective), lam=req.lam
    )
    result = optimize_rho(instance, config, workers=req.workers)
    doc = result.to_dict()
    return OptimizeResponse(
        feasible=result.feasible,
        rho_hat=result.rho_hat,
        objective_value=result.objective_value,
        ese_at_rho_hat=(
            EseOut(total_quality=result.ese_at_rho_hat.total_quality, **doc["ese_at_rho_hat"])
            if result.ese_at_rho_hat
            else None
        ),
        fse_report=FseOut.model_validate(doc["fse_report"]) if result.fse_report else None,
        scan_trace=[ScanRecordOut.model_validate(r) for r in doc["scan_trace"]],
        scan_trace_csv=scan_trace_csv(result),
    )


def handle_min_stable_rho(req: MinStableRhoRequest) -> MinStableRhoResponse:
    instance = req.instance.build()
    result = min_stable_rho(
        instance,
        rho_grid_size=req.rho_grid,
        epsilon=req.epsilon,
        rule_kind=RuleKind(req.rule),
        refine=req.refine,
        workers=req.workers,
    )
    doc = result.to_dict()
    return MinStableRhoResponse(
        min_stable_rho=result.rho,
        trace=[RhoScanPointOut.model_validate(t) for t in doc["trace"]],
        trace_csv=min_stable_trace_csv(result),
    )


def handle_constants(req: ConstantsRequest) -> ConstantsResponse:
    consts = theoretical_constants(req.instance.build())
    return ConstantsResponse.model_validate(consts.to_dict())


def handle_sweep(req: SweepRequest) -> SweepResponse:
    import datetime

    spec = req.build()
    records = experiments.run_sweep(spec, workers=req.workers)
    ts = datetime.datetime.now(datetime.timezone.utc).isoformat()
    csv = {
        "raw": experiments.render_raw_csv(spec, records, ts),
        "summary": experiments.render_summary_csv(spec, records, ts),
        "quality_curve_raw": experiments.render_curve_raw_csv(spec, records, ts),
        "quality_curve_summary": experiments.render_curve_summary_csv(spec, records, ts),
    }
    out_records = [
        SweepRecordOut(
            varied_value=None if r.varied_value is None else float(r.varied_value),
            instance_seed=r.instance_seed,
            converged=r.converged,
            min_stable_rho=r.min_stable_rho,
            optimal_rho=r.optimal_rho,
            platform_revenue_at_opt=r.platform_revenue_at_opt,
            mean_creator_utility_at_opt=r.mean_creator_utility_at_opt,
            total_quality_at_opt=r.total_quality_at_opt,
        )
        for r in records
    ]
    return SweepResponse(records=out_records, csv=csv)


def handle_counterexamples() -> dict:
    return experiments.run_counterexamples()


# ---------------------------------------------------------------------------
# FastAPI app

app = FastAPI(
    title="genai-share",
    description="Equilibrium solvers for creator/platform revenue-sharing games",
)


def _wrap(handler, *args):
    try:
        return handler(*args)
    except ValueError as exc:
        raise HTTPException(status_code=422, detail=str(exc))
    except SolverError as exc:
        raise HTTPException(status_code=500, detail=str(exc))


@app.get("/health")
def health() -> dict:
    return {"status": "ok"}


@app.post("/solve-ese", response_model=EseOut)
def solve_ese_route(req: SolveEseRequest):
    return _wrap(handle_solve_ese, req)


@app.post("/check-fse", response_model=CheckFseResponse)
def check_fse_route(req: CheckFseRequest):
    return _wrap(handle_check_fse, req)


@app.post("/optimize-rho", response_model=OptimizeResponse)
def optimize_route(req: OptimizeRequest):
    return _wrap(handle_optimize, req)


@app.post("/min-stable-rho", response_model=MinStableRhoResponse)
def min_stable_route(req: MinStableRhoRequest):
    return _wrap(handle_min_stable_rho, req)


@app.post("/constants", response_model=ConstantsResponse)
def constants_route(req: ConstantsRequest):
    return _wrap(handle_constants, req)


@app.post("/sweep", response_model=SweepResponse)
def sweep_route(req: SweepRequest):
    return _wrap(handle_sweep, req)


@app.post("/counterexamples")
def counterexamples_route():
    return _wrap(handle_counterexamples)
