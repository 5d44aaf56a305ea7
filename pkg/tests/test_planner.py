"""Welfare optimum, efficient prize, prize classification, hazard ordering."""
import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from searchcontest import (
    ContestParams,
    DivergentObjectiveError,
    EFFICIENT,
    InvalidParameterError,
    OVERSEARCH,
    UNDERSEARCH,
    classify_prize,
    efficient_prize_integral,
    hazard_order_check,
    make_pareto,
    planner_welfare,
    solve_planner,
    solve_symmetric,
)

# interior of 0..1: integral of (1-t^2)^(n-1) dt drives the pareto(2,1) optimum
_PARETO_FACTOR = {2: 2.0 / 3.0, 3: 8.0 / 15.0, 5: 128.0 / 315.0}


def _uniform_oracle(n, c):
    s = c * n * (n + 1)
    return (1.0 - math.sqrt(s), math.sqrt(n * c / (n + 1))) if s < 1.0 else None


def test_welfare_uniform_values(uniform):
    # nearly free draws: welfare approaches the plain mean
    assert planner_welfare(0.0, 1, 1e-9, uniform) == pytest.approx(0.5, abs=1e-6)
    assert planner_welfare(0.0, 2, 0.1, uniform) == pytest.approx(2.0 / 3.0 - 0.2, abs=1e-9)
    expected = (0.5 + 0.5 * 2.0 / 3.0) - 2 * 0.1 / 0.5
    assert planner_welfare(0.5, 2, 0.1, uniform) == pytest.approx(expected, abs=1e-9)


def test_welfare_rejects_degenerate_threshold(uniform):
    with pytest.raises(InvalidParameterError):
        planner_welfare(1.0, 2, 0.1, uniform)


def test_args_validation(uniform):
    with pytest.raises(InvalidParameterError):
        solve_planner(0, 0.1, uniform)
    with pytest.raises(InvalidParameterError):
        solve_planner(2, -0.1, uniform)


@pytest.mark.parametrize("n", [2, 3, 5])
@pytest.mark.parametrize("cost", [0.01, 0.05, 0.1])
def test_uniform_closed_form_grid(n, cost, uniform):
    sol = solve_planner(n, cost, uniform)
    oracle = _uniform_oracle(n, cost)
    if oracle is None:
        assert not sol.interior
        assert sol.threshold == uniform.support_lower
        assert sol.acceptance_prob == 1.0
        assert sol.efficient_prize == pytest.approx(n * cost, rel=1e-12)
        return
    b_star, w_star = oracle
    assert sol.interior
    assert sol.threshold == pytest.approx(b_star, rel=1e-8, abs=1e-10)
    assert sol.efficient_prize == pytest.approx(w_star, rel=1e-8)
    assert abs(sol.foc_residual) < 1e-9


@pytest.mark.parametrize("n", [2, 3, 5])
@pytest.mark.parametrize("cost", [0.01, 0.05, 0.1])
def test_exponential_closed_form_grid(n, cost, exponential):
    sol = solve_planner(n, cost, exponential)
    assert sol.interior
    assert sol.threshold == pytest.approx(math.log(1.0 / (n * cost)), rel=1e-8)
    # memoryless draws make every prize level self-financing at the optimum
    assert sol.efficient_prize == pytest.approx(1.0, rel=1e-8)


@pytest.mark.parametrize("n", [2, 3, 5])
@pytest.mark.parametrize("cost", [0.01, 0.05, 0.1])
def test_pareto_closed_form_grid(n, cost, pareto):
    sol = solve_planner(n, cost, pareto)
    factor = _PARETO_FACTOR[n]
    assert sol.interior
    assert sol.threshold == pytest.approx(factor / cost, rel=1e-8)
    assert sol.efficient_prize == pytest.approx(n * factor**2 / cost, rel=1e-8)


def test_reference_triple(uniform, pareto):
    sol = solve_planner(2, 0.1, uniform)
    assert sol.threshold == pytest.approx(1.0 - math.sqrt(0.6), rel=1e-8)
    assert sol.efficient_prize == pytest.approx(math.sqrt(0.2 / 3.0), rel=1e-8)
    assert sol.efficient_prize == pytest.approx(0.2582, abs=5e-5)
    psol = solve_planner(2, 0.1, pareto)
    assert psol.threshold == pytest.approx(2.0 / 0.3, rel=1e-8)
    assert psol.efficient_prize == pytest.approx(8.0 / 0.9, rel=1e-8)


def test_welfare_is_stationary_at_optimum(uniform, exponential):
    for n, cost, d in ((2, 0.1, uniform), (3, 0.05, exponential)):
        sol = solve_planner(n, cost, d)
        h = 1e-5
        up = planner_welfare(sol.threshold + h, n, cost, d)
        dn = planner_welfare(sol.threshold - h, n, cost, d)
        assert abs(up - dn) / (2 * h) < 1e-6
        assert planner_welfare(sol.threshold, n, cost, d) == pytest.approx(
            sol.welfare, rel=1e-9
        )


def test_optimum_beats_nearby_thresholds(uniform):
    sol = solve_planner(2, 0.1, uniform)
    for b in (sol.threshold - 0.1, sol.threshold + 0.1, 0.01, 0.6):
        assert planner_welfare(b, 2, 0.1, uniform) <= sol.welfare + 1e-12


def test_fat_tail_rejected():
    heavy = make_pareto(1.0, 1.0)
    with pytest.raises(DivergentObjectiveError):
        solve_planner(2, 0.1, heavy)
    with pytest.raises(DivergentObjectiveError):
        planner_welfare(2.0, 2, 0.1, heavy)


def test_efficiency_bridge(trio):
    # competitive contest at the efficient prize reproduces the planner threshold
    for d in trio:
        sol = solve_planner(2, 0.1, d)
        eq = solve_symmetric(
            ContestParams(n_players=2, cost=0.1, prize=sol.efficient_prize), d
        )
        assert abs(eq.threshold - sol.threshold) < 1e-9 * max(1.0, abs(sol.threshold))


def test_classify_three_ways(uniform, pareto):
    assert classify_prize(1.0, 2, 0.1, uniform).kind == OVERSEARCH
    w_star = solve_planner(2, 0.1, uniform).efficient_prize
    eff = classify_prize(w_star, 2, 0.1, uniform)
    assert eff.kind == EFFICIENT
    assert abs(eff.threshold_gap) < 1e-9
    under = classify_prize(1.0, 2, 0.1, pareto)
    assert under.kind == UNDERSEARCH
    assert under.threshold_gap < 0


def test_classification_gap_sign_matches_kind(uniform):
    over = classify_prize(1.0, 2, 0.1, uniform)
    assert over.threshold_gap > 0
    assert over.competitive_threshold > over.planner_threshold


def test_integral_route_matches_direct_prize(trio):
    for d in trio:
        sol = solve_planner(2, 0.1, d)
        w_int = efficient_prize_integral(2, 0.1, d)
        assert w_int == pytest.approx(sol.efficient_prize, rel=1e-6)


def test_integral_route_constant_hazard_is_exact(exponential):
    assert efficient_prize_integral(2, 0.1, exponential) == pytest.approx(1.0, rel=1e-9)


def test_hazard_dominance_uniform_vs_exponential(uniform, exponential):
    report = hazard_order_check(uniform, exponential, 2, 0.1)
    assert report.dominance_holds
    assert report.ordering_consistent
    assert report.w_star_first == pytest.approx(math.sqrt(0.2 / 3.0), rel=1e-6)
    assert report.w_star_second == pytest.approx(1.0, rel=1e-6)


def test_hazard_report_when_dominance_fails(exponential, pareto):
    # near its lower support the heavy tail is locally steep: 2/x > 1 for x < 2
    report = hazard_order_check(exponential, pareto, 2, 0.1)
    assert not report.dominance_holds
    assert report.first_violation_x is not None
    assert report.first_violation_x < 2.0
    assert report.ordering_consistent is None
    # the prize ordering still holds numerically even without the guarantee
    assert report.w_star_first < report.w_star_second


def test_hazard_check_reflexive(exponential):
    report = hazard_order_check(exponential, exponential, 2, 0.1)
    assert report.dominance_holds
    assert report.ordering_consistent
    assert report.w_star_first == report.w_star_second


def test_hazard_check_disjoint_supports(uniform):
    shifted = make_pareto(2.0, 5.0)
    with pytest.raises(InvalidParameterError):
        hazard_order_check(uniform, shifted, 2, 0.1)


@settings(max_examples=20, deadline=None)
@given(
    n=st.integers(min_value=1, max_value=5),
    cost=st.floats(min_value=0.005, max_value=0.2),
)
def test_solution_identities_uniform(n, cost, uniform):
    sol = solve_planner(n, cost, uniform)
    assert sol.efficient_prize == pytest.approx(
        n * cost / sol.acceptance_prob, rel=1e-12
    )
    assert 0.0 < sol.acceptance_prob <= 1.0
    assert sol.interior == (sol.acceptance_prob < 1.0)
    if sol.interior:
        assert abs(sol.foc_residual) < 1e-9
    oracle = _uniform_oracle(n, cost)
    if oracle is not None:
        assert sol.threshold == pytest.approx(oracle[0], rel=1e-7, abs=1e-9)
