"""Command-line client for the solver service.

Each subcommand marshals its arguments into the service request models and
either invokes the handler in-process (default) or POSTs it to a running
server (``--server http://host:port``). Single solves print JSON; scans and
sweeps additionally write CSV files under ``--out``.

Exit codes: 0 on success, 2 when the requested outcome is infeasible (no
stable rho, or an unstable profile for ``check-fse``), 1 on solver failure.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path
from typing import Optional

import click
import httpx

from . import service
from .equilibrium import SolverError
from .experiments import SweepSpec, sample_instance


def _load_instance(config: Optional[str], seed: int, n: int) -> service.InstanceIn:
    """Instance from a JSON config file, or a seeded default-configuration draw."""
    if config:
        doc = json.loads(Path(config).read_text())
        return service.InstanceIn.model_validate(doc)
    inst = sample_instance(SweepSpec(n=n), seed)
    return service.InstanceIn.from_instance(inst)


def _call(server: Optional[str], path: str, request, handler) -> dict:
    if server:
        response = httpx.post(
            server.rstrip("/") + path,
            json=request.model_dump(mode="json"),
            timeout=None,
        )
        if response.status_code >= 500:
            click.echo(f"server error: {response.text}", err=True)
            sys.exit(1)
        response.raise_for_status()
        return response.json()
    try:
        result = handler(request)
    except SolverError as exc:
        click.echo(f"solver failure: {exc}", err=True)
        sys.exit(1)
    return result.model_dump(mode="json") if hasattr(result, "model_dump") else result


def _emit(doc: dict, out: Optional[str], name: str) -> None:
    text = json.dumps(doc, indent=2, default=str)
    if out:
        path = Path(out)
        path.mkdir(parents=True, exist_ok=True)
        (path / name).write_text(text + "\n")
    click.echo(text)


def instance_options(f):
    f = click.option("--config", type=click.Path(exists=True), default=None,
                     help="GameInstance JSON file; omit to sample a default-config instance.")(f)
    f = click.option("--seed", type=int, default=0, show_default=True,
                     help="Seed for the sampled instance when --config is omitted.")(f)
    f = click.option("--n", type=int, default=20, show_default=True,
                     help="Creator count for the sampled instance.")(f)
    f = click.option("--server", default=None, help="Base URL of a running service.")(f)
    f = click.option("--out", default=None, help="Directory for JSON/CSV outputs.")(f)
    return f


@click.group()
def main():
    """Solvers for the creator/platform revenue-sharing game."""


@main.command("solve-ese")
@instance_options
@click.option("--rho", type=float, required=True)
@click.option("--rule", type=click.Choice(["proportional", "btes"]), default="proportional")
@click.option("--method", type=click.Choice(["auto", "foc", "mamd", "dynamics"]), default="auto")
@click.option("--tol", type=float, default=1e-10, show_default=True)
def solve_ese_cmd(config, seed, n, server, out, rho, rule, method, tol):
    """Compute the enforced-sharing equilibrium at a fixed rho."""
    req = service.SolveEseRequest(
        instance=_load_instance(config, seed, n), rho=rho, rule=rule, method=method, tol=tol
    )
    doc = _call(server, "/solve-ese", req, service.handle_solve_ese)
    _emit(doc, out, "ese.json")
    if not doc["converged"]:
        sys.exit(1)


@main.command("check-fse")
@instance_options
@click.option("--rho", type=float, required=True)
@click.option("--rule", type=click.Choice(["proportional", "wta", "btes"]), default="proportional")
@click.option("--epsilon", type=float, default=1e-4, show_default=True)
@click.option("--x", "x_json", default=None,
              help="Candidate quality vector as a JSON list; omit to solve the ESE first.")
def check_fse_cmd(config, seed, n, server, out, rho, rule, epsilon, x_json):
    """Check whether full sharing is stable at rho; exit 2 when it is not."""
    req = service.CheckFseRequest(
        instance=_load_instance(config, seed, n),
        rho=rho,
        rule=rule,
        epsilon=epsilon,
        x=json.loads(x_json) if x_json else None,
    )
    doc = _call(server, "/check-fse", req, service.handle_check_fse)
    _emit(doc, out, "fse_report.json")
    if not doc["report"]["is_fse"]:
        sys.exit(2)


@main.command("optimize-rho")
@instance_options
@click.option("--workers", type=int, default=1, show_default=True)
@click.option("--delta", type=float, default=0.01, show_default=True)
@click.option("--eta", type=float, default=2.5e-5, show_default=True)
@click.option("--objective",
              type=click.Choice(["platform-revenue", "total-quality", "creator-welfare", "regularized"]),
              default="platform-revenue", show_default=True)
@click.option("--lam", type=float, default=0.0, show_default=True,
              help="Quality weight of the regularized objective.")
def optimize_cmd(config, seed, n, server, out, workers, delta, eta, objective, lam):
    """Grid-search the allocation parameter; exit 2 when no rho is stable."""
    req = service.OptimizeRequest(
        instance=_load_instance(config, seed, n), delta=delta, eta=eta,
        objective=objective, lam=lam, workers=workers,
    )
    doc = _call(server, "/optimize-rho", req, service.handle_optimize)
    trace_csv = doc.pop("scan_trace_csv")
    if out:
        path = Path(out)
        path.mkdir(parents=True, exist_ok=True)
        (path / "scan_trace.csv").write_text(trace_csv)
    _emit(doc, out, "optimizer_result.json")
    if not doc["feasible"]:
        sys.exit(2)


@main.command("min-stable-rho")
@instance_options
@click.option("--workers", type=int, default=1, show_default=True)
@click.option("--rho-grid", type=int, default=100, show_default=True)
@click.option("--epsilon", type=float, default=1e-4, show_default=True)
@click.option("--rule", type=click.Choice(["proportional", "btes"]), default="proportional")
@click.option("--refine", is_flag=True, help="Bisect the stability boundary to 1e-4 in rho.")
def min_stable_cmd(config, seed, n, server, out, workers, rho_grid, epsilon, rule, refine):
    """Smallest grid rho whose equilibrium is stable; exit 2 when none is."""
    req = service.MinStableRhoRequest(
        instance=_load_instance(config, seed, n), rho_grid=rho_grid,
        epsilon=epsilon, rule=rule, refine=refine, workers=workers,
    )
    doc = _call(server, "/min-stable-rho", req, service.handle_min_stable_rho)
    trace_csv = doc.pop("trace_csv")
    if out:
        path = Path(out)
        path.mkdir(parents=True, exist_ok=True)
        (path / "min_stable_rho_trace.csv").write_text(trace_csv)
    _emit(doc, out, "min_stable_rho.json")
    if doc["min_stable_rho"] is None:
        sys.exit(2)


@main.command("sweep")
@click.option("--vary", type=click.Choice(["n", "alpha", "mu", "theta", "gamma", "beta_ai", "none"]),
              default="n", show_default=True)
@click.option("--values", default="5,10,20", show_default=True,
              help="Comma-separated values for the varied parameter.")
@click.option("--instances", type=int, default=30, show_default=True,
              help="Instances per sweep point (desk scale).")
@click.option("--full", is_flag=True, help="Use the full 150 instances per point.")
@click.option("--rho-grid", type=int, default=100, show_default=True)
@click.option("--epsilon", type=float, default=1e-4, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--workers", type=int, default=1, show_default=True)
@click.option("--n", type=int, default=20, show_default=True)
@click.option("--mu", type=float, default=100.0, show_default=True)
@click.option("--gamma", type=float, default=0.8, show_default=True)
@click.option("--alpha", type=float, default=0.5, show_default=True)
@click.option("--theta", type=float, default=1.5, show_default=True)
@click.option("--beta-ai", type=float, default=1.0, show_default=True)
@click.option("--server", default=None)
@click.option("--out", required=True, help="Directory for the sweep CSV files.")
def sweep_cmd(vary, values, instances, full, rho_grid, epsilon, seed, workers,
              n, mu, gamma, alpha, theta, beta_ai, server, out):
    """Run a parameter sweep and write raw/summary/curve CSVs."""
    value_list = [float(v) for v in values.split(",") if v] if vary != "none" else []
    if vary == "n":
        value_list = [int(v) for v in value_list]
    req = service.SweepRequest(
        n=n, mu=mu, gamma=gamma, alpha=alpha, theta=theta, beta_ai=beta_ai,
        vary=vary, values=value_list or [0], instances_per_point=150 if full else instances,
        rho_grid=rho_grid, epsilon=epsilon, seed=seed, workers=workers,
    )
    doc = _call(server, "/sweep", req, service.handle_sweep)
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    for stem, text in doc["csv"].items():
        (path / f"{stem}.csv").write_text(text)
    click.echo(json.dumps({"records": len(doc["records"]), "out": str(path)}, indent=2))


@main.command("counterexamples")
@click.option("--server", default=None)
@click.option("--out", default=None)
def counterexamples_cmd(server, out):
    """Reproduce the WTA/BTES instability constructions; exit 1 on mismatch."""
    if server:
        response = httpx.post(server.rstrip("/") + "/counterexamples", timeout=None)
        response.raise_for_status()
        doc = response.json()
    else:
        doc = service.handle_counterexamples()
    _emit(doc, out, "counterexamples.json")
    if not doc["ok"]:
        sys.exit(1)


@main.command("constants")
@instance_options
def constants_cmd(config, seed, n, server, out):
    """Theoretical grid/tolerance constants for this instance (diagnostics)."""
    req = service.ConstantsRequest(instance=_load_instance(config, seed, n))
    doc = _call(server, "/constants", req, service.handle_constants)
    _emit(doc, out, "constants.json")


@main.command("serve")
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8000, show_default=True)
def serve_cmd(host, port):
    """Run the HTTP service."""
    import uvicorn

    uvicorn.run("genai_share.service:app", host=host, port=port)


if __name__ == "__main__":
    main()
