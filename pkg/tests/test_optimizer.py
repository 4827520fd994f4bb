"""Platform optimization: grid scan, objectives, constants, fixed-rho guarantee."""

import numpy as np
import pytest

from genai_share import (
    GameInstance,
    ModelParams,
    Objective,
    OptimizerConfig,
    check_fse,
    closed_form_rho,
    evaluate_objective,
    optimize_rho,
    theoretical_constants,
    verify_approx_guarantee,
)
from genai_share.equilibrium import bounds_ledger
from genai_share.model import CostModel
from genai_share.optimizer import b_bound, scan_grid, scan_trace_csv
from conftest import default_instance, philox


class TestObjectives:
    def test_regularized_degenerate_weights(self):
        inst = default_instance(301, n=5)
        x = philox(302).uniform(1.0, 10.0, 5)
        revenue = evaluate_objective(inst, x, 0.4, OptimizerConfig(objective=Objective.PLATFORM_REVENUE))
        quality = evaluate_objective(inst, x, 0.4, OptimizerConfig(objective=Objective.TOTAL_QUALITY))
        reg0 = evaluate_objective(inst, x, 0.4, OptimizerConfig(objective=Objective.REGULARIZED, lam=0.0))
        reg1 = evaluate_objective(inst, x, 0.4, OptimizerConfig(objective=Objective.REGULARIZED, lam=1.0))
        assert reg0 == pytest.approx(revenue, rel=1e-12)
        assert reg1 == pytest.approx(quality, rel=1e-12)
        assert quality == pytest.approx(x.sum())

    def test_creator_welfare_identity_at_rho_one(self):
        inst = default_instance(303, n=6)
        x = philox(304).uniform(1.0, 10.0, 6)
        welfare = evaluate_objective(inst, x, 1.0, OptimizerConfig(objective=Objective.CREATOR_WELFARE))
        p = inst.params
        expected = p.mu * x.sum() ** p.gamma - sum(
            c.cost(xi) for c, xi in zip(inst.costs, x)
        )
        assert welfare == pytest.approx(expected, rel=1e-12)


class TestOptimizeRho:
    def test_never_infeasible_for_proportional_linear(self):
        inst = default_instance(311, n=8)
        result = optimize_rho(inst, OptimizerConfig(delta=0.05))
        assert result.feasible
        assert result.fse_report.is_fse
        assert result.scan_trace[-1].rho == 1.0
        assert result.scan_trace[-1].feasible

    def test_total_quality_prefers_rho_one(self):
        inst = GameInstance.power_costs([2.0] * 10, 1.5, ModelParams(mu=100, gamma=0.8, alpha=0.5))
        result = optimize_rho(inst, OptimizerConfig(delta=0.05, objective=Objective.TOTAL_QUALITY))
        assert result.feasible
        assert result.rho_hat == 1.0

    def test_trace_matches_independent_checker(self):
        inst = default_instance(312, n=6)
        config = OptimizerConfig(delta=0.2)
        result = optimize_rho(inst, config)
        from genai_share.equilibrium import solve_ese_foc

        for record in result.scan_trace:
            ese = solve_ese_foc(inst, record.rho)
            report = check_fse(inst, ese.x_star, record.rho, epsilon=config.eta)
            assert report.is_fse == record.feasible

    def test_objective_value_consistent_with_reevaluation(self):
        inst = default_instance(313, n=6)
        config = OptimizerConfig(delta=0.1)
        result = optimize_rho(inst, config)
        re_eval = evaluate_objective(inst, result.ese_at_rho_hat.x_star, result.rho_hat, config)
        assert result.objective_value == pytest.approx(re_eval, abs=1e-12)

    def test_grid_definition(self):
        grid = scan_grid(0.25)
        assert grid == pytest.approx([0.25, 0.5, 0.75, 1.0])
        assert scan_grid(0.3)[-1] == 1.0

    def test_refining_delta_never_loses_much(self):
        inst = default_instance(314, n=8)
        values = {}
        for delta in (0.02, 0.01, 0.005):
            values[delta] = optimize_rho(inst, OptimizerConfig(delta=delta)).objective_value
        trace = optimize_rho(inst, OptimizerConfig(delta=0.02)).scan_trace
        feas = [(r.rho, r.objective) for r in trace if r.feasible]
        slopes = [
            abs(b[1] - a[1]) / (b[0] - a[0]) for a, b in zip(feas, feas[1:]) if b[0] > a[0]
        ]
        slope = max(slopes) if slopes else 0.0
        assert values[0.01] >= values[0.02] - 0.02 * slope - 1e-9
        assert values[0.005] >= values[0.01] - 0.01 * slope - 1e-9

    def test_trace_csv_header(self):
        inst = default_instance(315, n=4)
        result = optimize_rho(inst, OptimizerConfig(delta=0.5))
        lines = scan_trace_csv(result).strip().split("\n")
        assert lines[0] == "rho,feasible,objective,total_quality,max_deviation_gain"
        assert len(lines) == 3

    def test_worker_pool_matches_sequential(self):
        inst = default_instance(316, n=5)
        config = OptimizerConfig(delta=0.2)
        sequential = optimize_rho(inst, config)
        parallel = optimize_rho(inst, config, workers=2)
        assert sequential.rho_hat == parallel.rho_hat
        assert sequential.objective_value == parallel.objective_value
        assert sequential.scan_trace == parallel.scan_trace

    @pytest.mark.slow
    def test_optimal_rho_weakly_increasing_in_alpha(self):
        # averaged trend over seeds; tolerance of one grid step
        alphas = (2.0, 5.0, 10.0)
        delta = 0.02
        means = []
        for alpha in alphas:
            opts = []
            for seed in range(30):
                inst = default_instance(4000 + seed, n=20, alpha=alpha)
                opts.append(optimize_rho(inst, OptimizerConfig(delta=delta)).rho_hat)
            means.append(np.mean(opts))
        assert means[1] >= means[0] - delta
        assert means[2] >= means[1] - delta


class TestTheoreticalConstants:
    def test_ledger_identities(self):
        inst = default_instance(321, n=5)
        ledger = bounds_ledger(inst)
        mu, n = inst.params.mu, inst.n
        assert b_bound(0, 3.0, 0, 0, 0, ledger, mu, n) == pytest.approx(mu * 3.0)
        # doubling Y_LB strictly shrinks any bound with t > 0
        import dataclasses

        doubled = dataclasses.replace(ledger, Y_LB=2 * ledger.Y_LB)
        for t in (0.5, 1.0, 2.2):
            assert b_bound(1, 2.0, 0.5, 1.0, t, doubled, mu, n) < b_bound(
                1, 2.0, 0.5, 1.0, t, ledger, mu, n
            )

    def test_power_cost_scaling(self):
        # A = O(n^2), B = O(n): check log-log slopes within +-0.3
        ns = [10, 20, 40, 80]
        a_vals, b_vals = [], []
        for n in ns:
            vals_a, vals_b = [], []
            for seed in range(10):
                consts = theoretical_constants(default_instance(330 + seed, n=n))
                vals_a.append(consts.A)
                vals_b.append(consts.B)
            a_vals.append(np.mean(np.log(vals_a)))
            b_vals.append(np.mean(np.log(vals_b)))
        slope_a = np.polyfit(np.log(ns), a_vals, 1)[0]
        slope_b = np.polyfit(np.log(ns), b_vals, 1)[0]
        assert slope_a <= 2.0 + 0.3
        assert slope_b == pytest.approx(1.0, abs=0.3)

    def test_custom_cost_requires_modulus(self):
        quad = CostModel.custom(
            lambda x: x**2, lambda x: 2.0 * x, lambda x: 2.0 + 0.0 * x
        )
        inst = GameInstance(2, (quad, quad), ModelParams(mu=10, gamma=0.5, alpha=1))
        with pytest.raises(ValueError):
            theoretical_constants(inst)
        quad_marked = CostModel.custom(
            lambda x: x**2, lambda x: 2.0 * x, lambda x: 2.0 + 0.0 * x,
            strong_convexity_modulus=2.0,
        )
        inst2 = GameInstance(2, (quad_marked, quad_marked), ModelParams(mu=10, gamma=0.5, alpha=1))
        consts = theoretical_constants(inst2)
        assert consts.strong_convexity == pytest.approx(2.0)
        assert consts.A > 0 and consts.B > 0


class TestClosedFormRho:
    def test_worked_example(self):
        inst = GameInstance.power_costs([1.0, 1.0], 1.2, ModelParams(mu=10, gamma=0.9, alpha=1.0))
        assert closed_form_rho(inst) == pytest.approx(0.5)

    def test_absent_when_hypothesis_fails(self):
        inst = GameInstance.power_costs([1.0, 1.0], 1.5, ModelParams(mu=10, gamma=0.8, alpha=0.5))
        assert closed_form_rho(inst) is None

    def test_always_interior_when_defined(self):
        rng = philox(341)
        found = 0
        for _ in range(200):
            alpha = float(rng.uniform(0.1, 5.0))
            gamma = float(rng.uniform(0.05, 1.0))
            theta = float(rng.uniform(1.05, 2.0))
            inst = GameInstance.power_costs(
                [1.0, 1.0], theta, ModelParams(mu=10, gamma=gamma, alpha=alpha)
            )
            rho = closed_form_rho(inst)
            if rho is not None:
                found += 1
                assert 0.0 < rho < 1.0
        assert found > 0


class TestGuarantee:
    def test_required_factor_value(self):
        inst = GameInstance.power_costs(
            [1.0] * 4, 1.2, ModelParams(mu=50, gamma=0.9, alpha=1.0)
        )
        report = verify_approx_guarantee(inst, config=OptimizerConfig(delta=0.1))
        assert report.required_factor == pytest.approx(4.0 ** -3.0)
        assert report.rho_fixed == pytest.approx(0.5)
        assert report.ratio is not None and report.ratio <= 1.0 + 1e-9
