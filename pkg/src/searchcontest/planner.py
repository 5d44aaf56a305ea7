"""Welfare-optimal search thresholds and the prize that implements them.

A planner instructing all N players to stop at threshold b trades off the
expected best accepted value against total expected sampling cost
N c / (1 - F(b)). Interior optima satisfy a first-order condition in
quantile space; the prize W* = N c / (1 - F(b*)) makes the competitive
threshold coincide with the planner's. Competitive contests with any other
prize oversearch or undersearch relative to b*.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.integrate import IntegrationWarning, quad
from scipy.optimize import brentq

from .distributions import Distribution
from .equilibrium import solve_symmetric, ContestParams
from .errors import DivergentObjectiveError, InvalidParameterError

_QUAD_TOL = 1e-11
_GRID = 256

OVERSEARCH = "oversearch"
EFFICIENT = "efficient"
UNDERSEARCH = "undersearch"


@dataclass(frozen=True)
class PlannerSolution:
    threshold: float
    welfare: float
    efficient_prize: float
    acceptance_prob: float
    interior: bool
    foc_residual: float


@dataclass(frozen=True)
class PrizeClassification:
    kind: str  # one of OVERSEARCH / EFFICIENT / UNDERSEARCH
    competitive_threshold: float
    planner_threshold: float
    threshold_gap: float  # competitive minus planner


@dataclass(frozen=True)
class HazardOrderReport:
    dominance_holds: bool
    first_violation_x: float | None
    w_star_first: float
    w_star_second: float
    ordering_consistent: bool | None  # None when dominance fails


def _quad(fn, lo: float, hi: float) -> float:
    # roundoff warnings are expected next to integrable tail singularities
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", IntegrationWarning)
        val, _ = quad(fn, lo, hi, epsabs=_QUAD_TOL, epsrel=_QUAD_TOL, limit=200)
    return val


def _inverse_density(v: float, d: Distribution) -> float:
    """1/f(quantile(v)), hard zero once v is inside float resolution of 1.

    Quantile-space integrands lose the tail when q + u*(1-q) rounds to 1;
    truncating there discards mass far below the quadrature tolerance for
    any distribution with a finite mean."""
    if v >= 1.0:
        return 0.0
    x = float(d.quantile(v))
    if not math.isfinite(x):
        return 0.0
    f = float(d.density(x))
    if not math.isfinite(f) or f <= 0.0:
        return 0.0
    return 1.0 / f


def _check_args(n_players: int, cost: float) -> None:
    if int(n_players) != n_players or n_players < 1:
        raise InvalidParameterError(f"n_players must be an integer >= 1, got {n_players}")
    if cost <= 0:
        raise InvalidParameterError(f"cost must be positive, got {cost}")


def _check_tail(d: Distribution) -> None:
    # fat tails make E[max of accepted values] infinite
    if d.name == "pareto" and d.params[0] <= 1.0:
        raise DivergentObjectiveError(
            f"expected value diverges for pareto with shape {d.params[0]} <= 1"
        )


def _expected_max(q: float, n_players: int, d: Distribution) -> float:
    """E[max of n values drawn above quantile q], written against the quantile
    function so unbounded supports need no truncation."""
    b = d.support_lower if q == 0.0 else float(d.quantile(q))

    def integrand(u: float) -> float:
        return (1.0 - u**n_players) * (1.0 - q) * _inverse_density(q + u * (1.0 - q), d)

    val = _quad(integrand, 0.0, 1.0)
    if not math.isfinite(val):
        raise DivergentObjectiveError("expected best value did not converge")
    return b + val


def planner_welfare(threshold: float, n_players: int, cost: float, d: Distribution) -> float:
    """Expected best accepted value minus total expected sampling cost when all
    n_players stop at threshold."""
    _check_args(n_players, cost)
    _check_tail(d)
    q = float(d.cdf(threshold))
    if q >= 1.0 - 1e-12:
        raise InvalidParameterError("threshold leaves no acceptance mass")
    return _expected_max(q, n_players, d) - n_players * cost / (1.0 - q)


def _foc_residual(q: float, n_players: int, cost: float, d: Distribution) -> float:
    """Zero at interior welfare optima: marginal value of raising the threshold
    minus marginal sampling cost, scaled by (1-q)^2 to stay bounded."""

    def integrand(u: float) -> float:
        return u ** (n_players - 1) * (1.0 - u) * _inverse_density(q + u * (1.0 - q), d)

    return (1.0 - q) ** 2 * _quad(integrand, 0.0, 1.0) - cost


def solve_planner(n_players: int, cost: float, d: Distribution) -> PlannerSolution:
    """Globally optimal common threshold: all first-order roots on a quantile
    grid are compared by welfare, along with the no-selectivity corner q=0."""
    _check_args(n_players, cost)
    _check_tail(d)
    n = n_players
    qs = np.linspace(0.0, 1.0 - 1e-9, _GRID)
    vals = np.array([_foc_residual(q, n, cost, d) for q in qs])
    roots = [0.0]  # corner candidate: accept everything
    for i in range(_GRID - 1):
        a, b = vals[i], vals[i + 1]
        if a == 0.0:
            roots.append(float(qs[i]))
        elif a * b < 0.0:
            roots.append(float(brentq(_foc_residual, qs[i], qs[i + 1],
                                      args=(n, cost, d), xtol=1e-13)))
    best_q, best_w = None, -math.inf
    for q in roots:
        w = _expected_max(q, n, d) - n * cost / (1.0 - q)
        if w > best_w:
            best_q, best_w = q, w
    interior = best_q > 0.0
    threshold = d.support_lower if best_q == 0.0 else float(d.quantile(best_q))
    return PlannerSolution(
        threshold=threshold,
        welfare=best_w,
        efficient_prize=n * cost / (1.0 - best_q),
        acceptance_prob=1.0 - best_q,
        interior=interior,
        foc_residual=_foc_residual(best_q, n, cost, d),
    )


def classify_prize(
    prize: float, n_players: int, cost: float, d: Distribution, tol: float = 1e-9
) -> PrizeClassification:
    """Compare the competitive threshold induced by a prize with the planner's."""
    params = ContestParams(n_players=n_players, cost=cost, prize=prize)
    competitive = solve_symmetric(params, d).threshold
    sol = solve_planner(n_players, cost, d)
    gap = competitive - sol.threshold
    scale = max(1.0, abs(sol.threshold))
    if abs(gap) <= tol * scale:
        kind = EFFICIENT
    elif gap > 0:
        kind = OVERSEARCH
    else:
        kind = UNDERSEARCH
    return PrizeClassification(
        kind=kind,
        competitive_threshold=competitive,
        planner_threshold=sol.threshold,
        threshold_gap=gap,
    )


def efficient_prize_integral(n_players: int, cost: float, d: Distribution) -> float:
    """Efficient prize via the hazard-rate representation
    N * integral of u^{N-1} / hazard(x(u)) du above the optimal quantile.
    Independent of the acceptance-probability formula, so the two routes
    cross-check each other."""
    sol = solve_planner(n_players, cost, d)
    q = 1.0 - sol.acceptance_prob
    n = n_players

    def integrand(u: float) -> float:
        v = q + u * (1.0 - q)
        if v >= 1.0:
            return 0.0
        x = float(d.quantile(v))
        h = float(d.hazard(x)) if math.isfinite(x) else math.inf
        if not math.isfinite(h) or h <= 0.0:
            return 0.0
        return n * u ** (n - 1) / h

    val = _quad(integrand, 0.0, 1.0)
    if not math.isfinite(val):
        raise DivergentObjectiveError("hazard-form prize integral did not converge")
    return val


def hazard_order_check(
    first: Distribution, second: Distribution, n_players: int, cost: float,
    grid: int = 1000,
) -> HazardOrderReport:
    """If the first distribution hazard-rate dominates the second everywhere on
    the shared support, its efficient prize should be no larger."""
    lo = max(first.support_lower, second.support_lower)
    his = []
    for d in (first, second):
        his.append(d.support_upper if math.isfinite(d.support_upper) else float(d.quantile(0.995)))
    hi = min(his)
    if hi <= lo:
        raise InvalidParameterError("supports do not overlap")
    xs = np.linspace(lo, hi, grid, endpoint=False)
    h1 = np.asarray(first.hazard(xs), dtype=float)
    h2 = np.asarray(second.hazard(xs), dtype=float)
    bad = np.nonzero(h1 < h2 - 1e-12)[0]
    dominance = bad.size == 0
    first_violation = None if dominance else float(xs[bad[0]])
    w1 = solve_planner(n_players, cost, first).efficient_prize
    w2 = solve_planner(n_players, cost, second).efficient_prize
    consistent = (w1 <= w2 + 1e-9 * max(1.0, abs(w2))) if dominance else None
    return HazardOrderReport(
        dominance_holds=dominance,
        first_violation_x=first_violation,
        w_star_first=w1,
        w_star_second=w2,
        ordering_consistent=consistent,
    )
