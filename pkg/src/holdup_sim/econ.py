"""Closed-form economics of the two-division transfer pricing game.

A supplying division manufactures an intermediate product and a buying
division refines and sells it.  Before the trading quantity is negotiated,
both divisions can sink specific investments that raise the value of
internal trade but whose cost they bear alone (the hold-up problem).
This module provides the cost/revenue primitives, realized division
profits under a linear surplus sharing rule, and the first-best and
second-best equilibrium benchmarks used as oracles by the simulator.
"""

from __future__ import annotations

from dataclasses import dataclass

__all__ = [
    "EconParams",
    "Realization",
    "EquilibriumSolution",
    "seller_cost",
    "buyer_revenue",
    "efficient_quantity",
    "contribution_margin",
    "division_profits",
    "hq_profit",
    "first_best",
    "gamma_second_best",
    "second_best",
    "second_best_at_gamma",
]


@dataclass(frozen=True)
class EconParams:
    """Market and cost primitives of one scenario.

    ``b`` is the slope of the buyer's inverse demand function,
    ``lambda_s``/``lambda_b`` the divisions' marginal investment-cost
    parameters, the ``theta`` moments describe the stochastic state
    variables (raw-material price for the seller, demand intercept for
    the buyer), and ``gamma_share`` is the seller's share of the
    negotiated contribution margin.
    """

    b: float = 12.0
    lambda_s: float = 0.5
    lambda_b: float = 0.5
    mean_theta_s: float = 60.0
    mean_theta_b: float = 100.0
    sd_theta_s: float = 0.0
    sd_theta_b: float = 0.0
    gamma_share: float = 0.5

    def __post_init__(self) -> None:
        if self.b <= 0 or self.lambda_s <= 0 or self.lambda_b <= 0:
            raise ValueError("b, lambda_s and lambda_b must be positive")
        if not 0.0 <= self.gamma_share <= 1.0:
            raise ValueError("gamma_share must lie in [0, 1]")
        if self.sd_theta_s < 0 or self.sd_theta_b < 0:
            raise ValueError("standard deviations must be non-negative")
        # Finite, positive closed-form solutions need both conditions.
        if self.b * self.lambda_s <= 1.0 or self.b * self.lambda_b <= 1.0:
            raise ValueError("need b*lambda_j > 1 for both divisions")
        if self.b * self.lambda_s * self.lambda_b - self.lambda_s - self.lambda_b <= 0:
            raise ValueError("need b*lambda_s*lambda_b > lambda_s + lambda_b")

    @property
    def mean_delta(self) -> float:
        """Expected demand-cost wedge E[theta_b - theta_s]."""
        return self.mean_theta_b - self.mean_theta_s

    @property
    def var_delta(self) -> float:
        """Variance of theta_b - theta_s; the draws are independent."""
        return self.sd_theta_s**2 + self.sd_theta_b**2


@dataclass(frozen=True)
class Realization:
    """One drawn pair of state variables plus the chosen investments."""

    theta_s: float
    theta_b: float
    inv_s: float
    inv_b: float

    def __post_init__(self) -> None:
        if self.inv_s < 0 or self.inv_b < 0:
            raise ValueError("investments must be non-negative")


@dataclass(frozen=True)
class EquilibriumSolution:
    """Expected investments, quantity and profits at an equilibrium point."""

    inv_s: float
    inv_b: float
    quantity: float
    profit_s: float
    profit_b: float
    profit_hq: float
    gamma_used: float


def seller_cost(q: float, theta_s: float, inv_s: float) -> float:
    """Cost of manufacturing ``q`` units: ``(theta_s - inv_s) * q``.

    A negative unit cost is permitted; it models investment pushing the
    effective unit cost below the raw-material price.
    """
    return (theta_s - inv_s) * q


def buyer_revenue(q: float, theta_b: float, inv_b: float, b: float) -> float:
    """Net revenue from refining and selling ``q`` units on the outlet market."""
    return (theta_b - 0.5 * b * q + inv_b) * q


def efficient_quantity(
    theta_s: float, theta_b: float, inv_s: float, inv_b: float, b: float
) -> float:
    """Ex-post efficient trade quantity, floored at zero.

    The unconstrained optimum is ``(theta_b - theta_s + inv_s + inv_b) / b``;
    negative trade is economically meaningless, so the result is clamped.
    """
    return max(0.0, (theta_b - theta_s + inv_s + inv_b) / b)


def contribution_margin(realization: Realization, econ: EconParams) -> float:
    """Joint margin (buyer revenue minus seller cost) at the efficient quantity."""
    r = realization
    q = efficient_quantity(r.theta_s, r.theta_b, r.inv_s, r.inv_b, econ.b)
    return buyer_revenue(q, r.theta_b, r.inv_b, econ.b) - seller_cost(q, r.theta_s, r.inv_s)


def _investment_cost(lam: float, inv: float) -> float:
    return 0.5 * lam * inv * inv


def division_profits(realization: Realization, econ: EconParams) -> tuple[float, float]:
    """Realized (seller, buyer) profits: margin shares net of investment cost."""
    m = contribution_margin(realization, econ)
    profit_s = econ.gamma_share * m - _investment_cost(econ.lambda_s, realization.inv_s)
    profit_b = (1.0 - econ.gamma_share) * m - _investment_cost(econ.lambda_b, realization.inv_b)
    return profit_s, profit_b


def hq_profit(realization: Realization, econ: EconParams) -> float:
    """Headquarters' profit; by construction the exact sum of division profits."""
    profit_s, profit_b = division_profits(realization, econ)
    return profit_s + profit_b


def _expected_solution(econ: EconParams, gamma: float, inv_s: float, inv_b: float) -> EquilibriumSolution:
    # At the efficient quantity the margin collapses to b*q^2/2, so its
    # expectation is b*E[q]^2/2 plus Var[theta_b - theta_s]/(2b).
    quantity = (econ.mean_delta + inv_s + inv_b) / econ.b
    margin = 0.5 * econ.b * quantity**2 + econ.var_delta / (2.0 * econ.b)
    profit_s = gamma * margin - _investment_cost(econ.lambda_s, inv_s)
    profit_b = (1.0 - gamma) * margin - _investment_cost(econ.lambda_b, inv_b)
    return EquilibriumSolution(
        inv_s=inv_s,
        inv_b=inv_b,
        quantity=quantity,
        profit_s=profit_s,
        profit_b=profit_b,
        profit_hq=profit_s + profit_b,
        gamma_used=gamma,
    )


def first_best(econ: EconParams) -> EquilibriumSolution:
    """Investments and quantity a fully informed planner would pick.

    Solves I_j = E[q]/lambda_j jointly with E[q] = (E[delta] + I_S + I_B)/b.
    Division profits are evaluated at the scenario's ``gamma_share``.
    """
    denom = econ.b * econ.lambda_s * econ.lambda_b - econ.lambda_s - econ.lambda_b
    quantity = econ.lambda_s * econ.lambda_b * econ.mean_delta / denom
    return _expected_solution(
        econ, econ.gamma_share, quantity / econ.lambda_s, quantity / econ.lambda_b
    )


def gamma_second_best(econ: EconParams) -> float:
    """Margin share that maximizes expected headquarters profit.

    The division with the lower marginal investment cost receives the
    larger share; equal costs give one half.
    """
    denom = econ.b * (econ.lambda_s + econ.lambda_b) - 2.0
    if denom <= 0:
        raise ValueError("b*(lambda_s + lambda_b) must exceed 2")
    return (econ.b * econ.lambda_b - 1.0) / denom


def second_best(econ: EconParams) -> EquilibriumSolution:
    """Subgame-perfect outcome when each division maximizes its own profit.

    Uses the profit-maximizing margin share from :func:`gamma_second_best`.
    Both divisions underinvest relative to the first best.
    """
    gamma = gamma_second_best(econ)
    lam_sum = econ.lambda_s + econ.lambda_b
    inv_s = econ.lambda_b * econ.mean_delta / ((econ.b * econ.lambda_s - 1.0) * lam_sum)
    inv_b = econ.lambda_s * econ.mean_delta / ((econ.b * econ.lambda_b - 1.0) * lam_sum)
    return _expected_solution(econ, gamma, inv_s, inv_b)


def second_best_at_gamma(econ: EconParams, gamma: float) -> EquilibriumSolution:
    """Division best-response equilibrium for an arbitrary margin share.

    Solves the linear fixed point
    ``I_S = gamma*(E[delta] + I_S + I_B)/(b*lambda_s)``,
    ``I_B = (1-gamma)*(E[delta] + I_S + I_B)/(b*lambda_b)`` exactly.
    """
    if not 0.0 <= gamma <= 1.0:
        raise ValueError("gamma must lie in [0, 1]")
    share_b = 1.0 - gamma
    a11 = econ.b * econ.lambda_s - gamma
    a12 = -gamma
    a21 = -share_b
    a22 = econ.b * econ.lambda_b - share_b
    det = a11 * a22 - a12 * a21
    if abs(det) < 1e-12:
        raise ValueError("best-response system is singular for these parameters")
    rhs_s = gamma * econ.mean_delta
    rhs_b = share_b * econ.mean_delta
    inv_s = (rhs_s * a22 - a12 * rhs_b) / det
    inv_b = (a11 * rhs_b - a21 * rhs_s) / det
    return _expected_solution(econ, gamma, inv_s, inv_b)
