"""Enforced-sharing equilibrium solvers and per-creator quality bounds.

The unique equilibrium of the enforced-sharing game (everyone shares, only
qualities move) is pinned down by first-order conditions. The primary path
solves them with a damped Newton iteration; multi-agent mirror descent and
damped best-response dynamics are kept for cross-validation and for the
diminishing-returns extension.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .model import CostModel, GameInstance, RuleKind
from .numerics import root_with_expanding_bracket

#: floor applied to gamma in the quality lower bound, which degenerates at gamma = 0
GAMMA_FLOOR = 1e-6


@dataclass(frozen=True)
class EseResult:
    """Solver output: equilibrium qualities plus convergence diagnostics.

    ``residual`` is the max absolute first-order-condition residual, except for
    best-response dynamics where it is the last sweep's max coordinate change.
    """

    x_star: np.ndarray
    residual: float
    method: str
    iterations: int
    converged: bool

    def __post_init__(self):
        x = np.asarray(self.x_star, dtype=float).copy()
        x.flags.writeable = False
        object.__setattr__(self, "x_star", x)

    @property
    def total_quality(self) -> float:
        return float(self.x_star.sum())

    def to_dict(self) -> dict:
        return {
            "x_star": [float(v) for v in self.x_star],
            "residual": self.residual,
            "method": self.method,
            "iterations": self.iterations,
            "converged": self.converged,
        }


@dataclass(frozen=True)
class BoundsLedger:
    """Per-creator quality bounds and the aggregate constants built from them."""

    x_max: np.ndarray
    x_min: np.ndarray
    X_LB: float
    X_UB: float
    Y_LB: float
    Y_UB: float
    M_cprime: float

    def to_dict(self) -> dict:
        return {
            "x_max": [float(v) for v in self.x_max],
            "x_min": [float(v) for v in self.x_min],
            "X_LB": self.X_LB,
            "X_UB": self.X_UB,
            "Y_LB": self.Y_LB,
            "Y_UB": self.Y_UB,
            "M_cprime": self.M_cprime,
        }


class SolverError(RuntimeError):
    """Raised when an equilibrium solver fails to converge."""


# ---------------------------------------------------------------------------
# quality bounds


def compute_x_max(
    cost: CostModel, mu: float, gamma: float, force_numeric: bool = False
) -> float:
    """Rational quality bound: the positive root of c(z) = mu * z**gamma.

    Spending beyond it cannot pay off for any sharing decision. Power costs
    use the closed form (mu/a)**(1/(theta-gamma)); otherwise the root is
    bracketed by doubling and solved to 1e-12 * hi absolute.
    """
    if cost.kind == "power" and not force_numeric:
        if cost.theta <= gamma:
            raise ValueError("power cost exponent must exceed gamma")
        return float((mu / cost.a) ** (1.0 / (cost.theta - gamma)))

    def g(z: float) -> float:
        return float(cost.cost(z)) - mu * z**gamma

    return root_with_expanding_bracket(g, hi=1.0)


def x_max_vector(instance: GameInstance) -> np.ndarray:
    mu = instance.params.effective_mu
    gamma = instance.params.gamma
    return np.array([compute_x_max(c, mu, gamma) for c in instance.costs])


def compute_x_min(instance: GameInstance, i: int, x_ub: Optional[float] = None) -> float:
    """Lower bound on creator i's equilibrium quality, valid for any rho.

    Inverts the marginal cost at the smallest possible marginal revenue. The
    formula degenerates at gamma = 0, where gamma is floored at 1e-6.
    """
    p = instance.params
    if x_ub is None:
        x_ub = float(x_max_vector(instance).sum())
    gamma = max(p.gamma, GAMMA_FLOOR)
    target = p.effective_mu / (1.0 + p.alpha) * x_ub ** (p.gamma - 1.0) * gamma
    return float(instance.costs[i].marginal_inverse(target))


def x_min_vector(instance: GameInstance) -> np.ndarray:
    x_ub = float(x_max_vector(instance).sum())
    return np.array([compute_x_min(instance, i, x_ub=x_ub) for i in range(instance.n)])


def bounds_ledger(instance: GameInstance) -> BoundsLedger:
    x_max = x_max_vector(instance)
    x_min = x_min_vector(instance)
    global_max = float(x_max.max())
    m_cprime = max(float(c.marginal(global_max)) for c in instance.costs)
    return BoundsLedger(
        x_max=x_max,
        x_min=x_min,
        X_LB=float(x_min.sum()),
        X_UB=float(x_max.sum()),
        Y_LB=float(x_min.sum() - x_min.max()),
        Y_UB=float(x_max.sum() - x_max.min()),
        M_cprime=m_cprime,
    )


# ---------------------------------------------------------------------------
# cost vectorization helpers


def _all_power(instance: GameInstance) -> bool:
    return all(c.kind == "power" for c in instance.costs)


def _marginal_fn(instance: GameInstance) -> Callable[[np.ndarray], np.ndarray]:
    """Vectorized marginal cost; power instances avoid per-creator Python calls."""
    if _all_power(instance):
        ath = np.array([c.a * c.theta for c in instance.costs])
        expo = np.array([c.theta - 1.0 for c in instance.costs])
        return lambda x: ath * x**expo
    costs = instance.costs
    return lambda x: np.array([c.marginal(xi) for c, xi in zip(costs, x)])


def _marginal_vec(instance: GameInstance, x: np.ndarray) -> np.ndarray:
    return _marginal_fn(instance)(x)


def _curvature_vec(instance: GameInstance, x: np.ndarray) -> np.ndarray:
    if _all_power(instance):
        coef = np.array([c.a * c.theta * (c.theta - 1.0) for c in instance.costs])
        expo = np.array([c.theta - 2.0 for c in instance.costs])
        return coef * x**expo
    return np.array([c.curvature(xi) for c, xi in zip(instance.costs, x)])


def _marginal_inverse_vec(instance: GameInstance, y: np.ndarray) -> np.ndarray:
    if _all_power(instance):
        ath = np.array([c.a * c.theta for c in instance.costs])
        expo = np.array([1.0 / (c.theta - 1.0) for c in instance.costs])
        return (np.maximum(y, 0.0) / ath) ** expo
    return np.array([c.marginal_inverse(float(yi)) for c, yi in zip(instance.costs, y)])


# ---------------------------------------------------------------------------
# first-order-condition solvers


def _proportional_foc(instance: GameInstance, rho: float):
    """Residual and Jacobian of the full-sharing FOC system (linear AI quality)."""
    p = instance.params
    k = p.effective_mu * (1.0 + p.alpha * rho) / (1.0 + p.alpha)
    x0 = p.prior_data

    def residual(x: np.ndarray) -> np.ndarray:
        total = x0 + x.sum()
        return k * total ** (p.gamma - 2.0) * ((p.gamma - 1.0) * x + total) - _marginal_vec(
            instance, x
        )

    def jacobian(x: np.ndarray) -> np.ndarray:
        total = x0 + x.sum()
        c = k * (p.gamma - 1.0) * total ** (p.gamma - 3.0)
        w = total + (p.gamma - 2.0) * x
        jac = c * (np.outer(w, np.ones_like(x)) + total * np.eye(x.size))
        jac -= np.diag(_curvature_vec(instance, x))
        return jac

    def marginal_revenue(x: np.ndarray) -> np.ndarray:
        total = x0 + x.sum()
        return k * total ** (p.gamma - 2.0) * ((p.gamma - 1.0) * x + total)

    return residual, jacobian, marginal_revenue


def _btes_foc(instance: GameInstance, rho: float):
    """FOC of the equal-shares rule at full sharing: everyone splits rho/n."""
    p = instance.params
    m = p.effective_mu / (1.0 + p.alpha)
    pool = m * p.alpha * rho * p.gamma / instance.n
    x0 = p.prior_data

    def residual(x: np.ndarray) -> np.ndarray:
        total = x0 + x.sum()
        direct = m * total ** (p.gamma - 2.0) * ((p.gamma - 1.0) * x + total)
        return direct + pool * total ** (p.gamma - 1.0) - _marginal_vec(instance, x)

    def jacobian(x: np.ndarray) -> np.ndarray:
        total = x0 + x.sum()
        c = m * (p.gamma - 1.0) * total ** (p.gamma - 3.0)
        w = total + (p.gamma - 2.0) * x
        jac = c * (np.outer(w, np.ones_like(x)) + total * np.eye(x.size))
        jac += pool * (p.gamma - 1.0) * total ** (p.gamma - 2.0)
        jac -= np.diag(_curvature_vec(instance, x))
        return jac

    def marginal_revenue(x: np.ndarray) -> np.ndarray:
        total = x0 + x.sum()
        direct = m * total ** (p.gamma - 2.0) * ((p.gamma - 1.0) * x + total)
        return direct + pool * total ** (p.gamma - 1.0)

    return residual, jacobian, marginal_revenue


def _newton_solve(
    instance: GameInstance,
    residual: Callable,
    jacobian: Callable,
    marginal_revenue: Callable,
    tol: float,
    max_iter: int,
    method: str,
) -> EseResult:
    """Damped Newton with a fixed-point fallback, started from x_max / 2."""
    x = x_max_vector(instance) / 2.0
    fallback_used = False
    iterations = 0
    for _ in range(max_iter):
        r = residual(x)
        rnorm = float(np.max(np.abs(r)))
        if rnorm <= tol:
            return EseResult(x, rnorm, method, iterations, True)
        try:
            step = np.linalg.solve(jacobian(x), -r)
        except np.linalg.LinAlgError:
            step, *_ = np.linalg.lstsq(jacobian(x), -r, rcond=None)
        t = 1.0
        accepted = False
        while t > 1e-14:
            x_new = x + t * step
            if np.all(x_new > 0.0):
                r_new = float(np.max(np.abs(residual(x_new))))
                if r_new < rnorm:
                    x = x_new
                    accepted = True
                    break
            t /= 2.0
        iterations += 1
        if not accepted:
            if fallback_used:
                break
            # fixed-point pass: invert marginal cost at the current revenue gradient
            fallback_used = True
            for _ in range(500):
                target = np.maximum(marginal_revenue(x), 0.0)
                x_next = 0.5 * (x + _marginal_inverse_vec(instance, target))
                x_next = np.maximum(x_next, 1e-300)
                iterations += 1
                if np.max(np.abs(x_next - x)) <= 1e-14 * np.max(x_next):
                    x = x_next
                    break
                x = x_next
    r = float(np.max(np.abs(residual(x))))
    return EseResult(x, r, method, iterations, r <= tol)


def solve_ese_foc(
    instance: GameInstance, rho: float, tol: float = 1e-10, max_iter: int = 10_000
) -> EseResult:
    """Unique enforced-sharing equilibrium under the proportional rule (beta = 1)."""
    if instance.params.data_returns_exponent != 1.0:
        raise ValueError(
            "the FOC path requires data_returns_exponent = 1; use solve_ese_dynamics_beta"
        )
    residual, jacobian, mrev = _proportional_foc(instance, rho)
    return _newton_solve(instance, residual, jacobian, mrev, tol, max_iter, "foc-root")


def solve_ese_btes(
    instance: GameInstance, rho: float, tol: float = 1e-10, max_iter: int = 10_000
) -> EseResult:
    """Full-sharing equilibrium under the binary-threshold-equal-shares rule."""
    if instance.params.data_returns_exponent != 1.0:
        raise ValueError("the BTES FOC path requires data_returns_exponent = 1")
    residual, jacobian, mrev = _btes_foc(instance, rho)
    return _newton_solve(instance, residual, jacobian, mrev, tol, max_iter, "foc-root")


# ---------------------------------------------------------------------------
# multi-agent mirror descent


def solve_ese_mamd(
    instance: GameInstance,
    rho: float,
    steps: int = 100_000,
    eta0: Optional[float] = None,
    tau_half: Optional[float] = None,
    tol: float = 1e-6,
    max_restarts: int = 5,
    check_every: int = 2000,
) -> EseResult:
    """Projected-gradient (mirror descent) iteration on the full-sharing game.

    Each creator ascends their own utility gradient; iterates are projected
    onto the non-negative orthant. The default step schedule ties the initial
    rate to inverse cost curvature at the quality bounds and decays
    harmonically; a collapse to the zero vector restarts with a halved rate.
    The loop ends early once the residual falls two orders below ``tol``.
    """
    if instance.params.data_returns_exponent != 1.0:
        raise ValueError("mirror descent requires data_returns_exponent = 1")
    p = instance.params
    k = p.effective_mu * (1.0 + p.alpha * rho) / (1.0 + p.alpha)
    x_max = x_max_vector(instance)
    if eta0 is None:
        curv = max(float(c.curvature(xm)) for c, xm in zip(instance.costs, x_max))
        eta0 = 1.0 / (2.0 * curv)
    if tau_half is None:
        tau_half = steps / 2.0

    x0 = p.prior_data
    marginal = _marginal_fn(instance)
    gm2 = p.gamma - 2.0
    gm1 = p.gamma - 1.0
    iterations = 0
    for restart in range(max_restarts + 1):
        eta_base = eta0 / 2.0**restart
        x = x_max / 2.0
        collapsed = False
        for t in range(steps):
            total = x0 + x.sum()
            if total <= 0.0:
                collapsed = True
                break
            v = k * total**gm2 * (gm1 * x + total) - marginal(x)
            x = np.maximum(0.0, x + eta_base / (1.0 + t / tau_half) * v)
            iterations += 1
            if not np.any(x):
                collapsed = True
                break
            if (t + 1) % check_every == 0 and np.all(x > 0.0):
                if float(np.max(np.abs(v))) <= 0.01 * tol:
                    break
        if not collapsed:
            break
    else:
        raise SolverError("mirror descent collapsed to the zero profile in every restart")

    total = x0 + x.sum()
    residual = float(np.max(np.abs(k * total**gm2 * (gm1 * x + total) - marginal(x))))
    return EseResult(x, residual, "mamd", iterations, residual <= tol)


def mamd_gradient(instance: GameInstance, rho: float, x: np.ndarray) -> np.ndarray:
    """The per-creator utility gradient used by the mirror-descent iteration."""
    p = instance.params
    k = p.effective_mu * (1.0 + p.alpha * rho) / (1.0 + p.alpha)
    x = np.asarray(x, dtype=float)
    total = p.prior_data + x.sum()
    return k * total ** (p.gamma - 2.0) * ((p.gamma - 1.0) * x + total) - _marginal_vec(
        instance, x
    )


# ---------------------------------------------------------------------------
# best-response dynamics (diminishing-returns extension)


def _own_quality_derivative(
    instance: GameInstance, i: int, rho: float, others_content: float
):
    """d/dx of creator i's utility at enforced full sharing, any beta.

    Used to polish grid/golden best responses: near the maximizer the utility
    is flat to float precision, so a section search alone localizes x no
    better than ~sqrt(eps); a sign-change bisection on the derivative does.
    """
    p = instance.params
    mu, gamma, alpha, beta = p.mu, p.gamma, p.alpha, p.data_returns_exponent
    b = p.prior_data + others_content
    plus_ai = p.traffic_mode.value == "human-plus-ai"
    cost = instance.costs[i]

    def du(x: float) -> float:
        pool = b + x
        q_fac = rho * alpha * pool ** (beta - 1.0)
        g = x * (1.0 + q_fac)
        g1 = 1.0 + q_fac + rho * alpha * (beta - 1.0) * x * pool ** (beta - 2.0)
        denom = b + x + alpha * pool**beta
        d1 = 1.0 + alpha * beta * pool ** (beta - 1.0)
        if plus_ai:
            rev = mu * (g1 * denom ** (gamma - 1.0) + g * (gamma - 1.0) * denom ** (gamma - 2.0) * d1)
        else:
            total = b + x
            rev = mu * (
                gamma * total ** (gamma - 1.0) * g / denom
                + total**gamma * (g1 * denom - g * d1) / denom**2
            )
        return rev - float(cost.marginal(x))

    return du


def _polish_best_response(du, lo: float, hi: float, fallback: float) -> float:
    """Bisect du on [lo, hi]; keep the section-search result if no sign change."""
    if not (lo > 0.0 and hi > lo):
        return fallback
    dlo, dhi = du(lo), du(hi)
    if not (dlo > 0.0 >= dhi):
        return fallback
    for _ in range(100):
        mid = 0.5 * (lo + hi)
        if du(mid) > 0.0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-15 * hi:
            break
    return 0.5 * (lo + hi)


def solve_ese_dynamics_beta(
    instance: GameInstance,
    rho: float,
    damping: float = 0.5,
    tol: float = 1e-8,
    max_sweeps: int = 10_000,
    grid_size: int = 4096,
) -> EseResult:
    """Damped sequential best-response dynamics at enforced full sharing.

    Valid for any data-returns exponent; for exponents below 1 the game is
    non-concave, so the result is an approximate equilibrium that may depend
    on the (fixed) initialization and update order.
    """
    from .best_response import best_quality_given_sharing

    if not 0.0 < damping <= 1.0:
        raise ValueError(f"damping must lie in (0, 1], got {damping}")
    x_max = x_max_vector(instance)
    x = x_max / 2.0
    s_others = np.ones(instance.n - 1)
    sweeps = 0
    delta = np.inf
    for _ in range(max_sweeps):
        delta = 0.0
        for i in range(instance.n):
            others = float(x.sum() - x[i])
            best = best_quality_given_sharing(
                instance,
                np.delete(x, i),
                s_others,
                i,
                1.0,
                rho,
                RuleKind.PROPORTIONAL,
                x_max_i=float(x_max[i]),
                grid_size=grid_size,
            )
            du = _own_quality_derivative(instance, i, rho, others)
            cell = float(x_max[i]) / (grid_size - 1)
            bx = _polish_best_response(
                du,
                max(best.best_x - cell, 1e-300),
                min(best.best_x + cell, float(x_max[i])),
                best.best_x,
            )
            x_new = (1.0 - damping) * x[i] + damping * bx
            delta = max(delta, abs(x_new - x[i]))
            x[i] = x_new
        sweeps += 1
        if delta < tol:
            return EseResult(x, delta, "best-response-dynamics", sweeps, True)
    return EseResult(x, float(delta), "best-response-dynamics", sweeps, False)


# ---------------------------------------------------------------------------
# closed form and dispatch


def homogeneous_closed_form(instance: GameInstance, rho: float) -> float:
    """Per-creator equilibrium quality when all creators share one power cost.

    Solves the symmetric FOC analytically:
    x**(theta-gamma) = mu_eff*(1+alpha*rho)*(n-1+gamma)*n**(gamma-2) / ((1+alpha)*a*theta).
    """
    costs = instance.costs
    if any(c.kind != "power" for c in costs):
        raise ValueError("closed form requires power costs")
    a, theta = costs[0].a, costs[0].theta
    if any(c.a != a or c.theta != theta for c in costs):
        raise ValueError("closed form requires a homogeneous instance")
    if instance.params.data_returns_exponent != 1.0:
        raise ValueError("closed form requires data_returns_exponent = 1")
    p = instance.params
    n = instance.n
    numer = p.effective_mu * (1.0 + p.alpha * rho) * (n - 1.0 + p.gamma) * n ** (p.gamma - 2.0)
    return float((numer / ((1.0 + p.alpha) * a * theta)) ** (1.0 / (theta - p.gamma)))


def solve_ese(
    instance: GameInstance,
    rho: float,
    rule_kind: RuleKind = RuleKind.PROPORTIONAL,
    tol: float = 1e-10,
) -> EseResult:
    """Route to the right solver for the rule and AI-quality model."""
    if rule_kind is RuleKind.BTES:
        return solve_ese_btes(instance, rho, tol=tol)
    if rule_kind is not RuleKind.PROPORTIONAL:
        raise ValueError(f"no enforced-sharing solver for rule {rule_kind}")
    if instance.params.data_returns_exponent == 1.0:
        return solve_ese_foc(instance, rho, tol=tol)
    return solve_ese_dynamics_beta(instance, rho)
