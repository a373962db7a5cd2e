import dataclasses

import numpy as np
import pytest

from ces_market.formulations import (
    CMES,
    MissingIesInputError,
    build_ces_program,
    build_market_program,
    schedule_residuals,
    solve_baseline,
    solve_ces,
    solve_cmes,
    solve_ies,
)
from ces_market.instance import (
    BuildingProfile,
    GridTariff,
    Scenario,
    StorageTech,
    TimeGrid,
    build_instance,
)
from ces_market.milp import SolveParams, SolveStatus

from conftest import shift_instance, two_bc_instance
from oracle_market import ces_oracle, cmes_oracle

PHYS_TOL = 1e-6


def assert_physics(outcome, inst):
    res = schedule_residuals(
        outcome.schedule, inst, outcome.e_capacity, outcome.p_capacity
    )
    worst = max(res.values())
    assert worst <= PHYS_TOL, res


class TestBuildProgram:
    def test_variable_census_smallest(self):
        inst = shift_instance()
        ies = solve_ies(inst)
        model = build_ces_program(inst, ies.j_ind)
        # per cell 5 continuous + 4 binaries, plus (r, s) per building, plus E, P
        assert model.n_variables == 1 * 1 * 2 * 9 + 2 * 1 + 2

    def test_variable_census_two_bc(self, two_bc):
        ies = solve_ies(two_bc)
        model = build_ces_program(two_bc, ies.j_ind)
        assert model.n_variables == 2 * 1 * 4 * 9 + 2 * 2 + 2

    def test_missing_standalone_costs(self, two_bc):
        with pytest.raises(MissingIesInputError):
            build_market_program(two_bc, None, incentive=True)
        with pytest.raises(MissingIesInputError):
            build_market_program(two_bc, np.array([1.0]), incentive=True)


class TestCes:
    def test_two_bc_fixture_matches_oracle(self, two_bc):
        ies = solve_ies(two_bc)
        outcome = solve_ces(two_bc, j_ind=ies.j_ind)
        profit_oracle, s_oracle = ces_oracle(two_bc, ies.j_ind)
        assert outcome.eso_profit == pytest.approx(profit_oracle, abs=1e-9)
        assert tuple(outcome.accepted.astype(int)) == s_oracle
        assert outcome.r_star == pytest.approx([10.0, 10.0], abs=1e-9)
        assert outcome.q_star == pytest.approx([0.015, 0.015], abs=1e-12)
        assert outcome.e_capacity == pytest.approx(10.0, abs=1e-9)
        assert outcome.p_capacity == pytest.approx(10.0, abs=1e-9)
        assert outcome.payments == pytest.approx([1.5, 1.5], abs=1e-9)
        assert outcome.bills == pytest.approx([0.0, 0.0], abs=1e-9)
        assert_physics(outcome, two_bc)

    def test_expensive_capital_rejects_everyone(self):
        inst = two_bc_instance()
        tech = dataclasses.replace(inst.tech, c_e=0.2, c_p=0.2)
        inst = dataclasses.replace(inst, tech=tech)
        ies = solve_ies(inst)
        outcome = solve_ces(inst, j_ind=ies.j_ind)
        assert not outcome.accepted.any()
        assert outcome.eso_profit == pytest.approx(0.0, abs=1e-9)
        profit_oracle, s_oracle = ces_oracle(inst, ies.j_ind)
        assert profit_oracle == pytest.approx(0.0, abs=1e-9)

    def test_single_bc_is_rejected(self, single_bc):
        outcome = solve_ces(single_bc)
        assert not outcome.accepted.any()
        assert outcome.r_star == pytest.approx([0.0])
        assert np.isnan(outcome.q_star[0])
        assert outcome.payments[0] == 0.0
        # the building falls back to its own storage plan
        assert outcome.bills[0] == pytest.approx(outcome.j_ind[0])

    def test_no_surplus_instance_solves_to_zero(self):
        inst = build_instance(
            TimeGrid(3, 1.0),
            GridTariff(0.3, 0.0, 1000.0),
            StorageTech(eta_ch=0.9, eta_dis=0.9, p_ch_max=500, p_dis_max=500,
                        c_e=0.05, c_p=0.1),
            [BuildingProfile("b1", [Scenario(1.0, [5, 5, 5], [1, 1, 1])]),
             BuildingProfile("b2", [Scenario(1.0, [9, 0, 2], [0, 0, 1])])],
        )
        assert inst.r_max == pytest.approx([0.0, 0.0])
        outcome = solve_ces(inst)
        assert outcome.solution.objective == pytest.approx(0.0, abs=1e-9)
        assert outcome.e_capacity == pytest.approx(0.0, abs=1e-9)

    def test_implicit_standalone_solves(self, two_bc):
        outcome = solve_ces(two_bc)  # j_ind omitted on purpose
        assert outcome.j_ind == pytest.approx([2.0, 2.0], abs=1e-9)
        assert outcome.eso_profit == pytest.approx(1.0, abs=1e-9)

    def test_limit_returns_uncertified_incumbent(self, two_bc):
        params = SolveParams(node_limit=1)
        outcome = solve_ces(two_bc, params)
        if outcome.solution.status is SolveStatus.LIMIT:
            assert not outcome.certified
        else:
            assert outcome.certified

    def test_relaxed_exclusivity_same_objective(self, two_bc):
        ies = solve_ies(two_bc)
        strict = solve_ces(two_bc, j_ind=ies.j_ind)
        relaxed = solve_ces(two_bc, j_ind=ies.j_ind, relax_exclusivity=True)
        assert relaxed.eso_profit == pytest.approx(strict.eso_profit, abs=1e-8)


class TestCmes:
    def test_two_bc_fixture(self, two_bc):
        outcome = solve_cmes(two_bc)
        assert outcome.social_cost == pytest.approx(2.0, abs=1e-9)
        assert outcome.social_cost == pytest.approx(cmes_oracle(two_bc), abs=1e-9)
        assert outcome.e_capacity == pytest.approx(10.0, abs=1e-9)
        assert outcome.p_capacity == pytest.approx(10.0, abs=1e-9)
        assert_physics(outcome, two_bc)

    def test_no_surplus_cost_is_baseline(self):
        inst = build_instance(
            TimeGrid(2, 1.0),
            GridTariff(0.3, 0.0, 1000.0),
            StorageTech(eta_ch=0.9, eta_dis=0.9, p_ch_max=500, p_dis_max=500,
                        c_e=0.05, c_p=0.1),
            [BuildingProfile("b", [Scenario(1.0, [5, 5], [1, 1])])],
        )
        outcome = solve_cmes(inst)
        assert outcome.social_cost == pytest.approx(inst.baseline_bills.sum(), abs=1e-9)
        assert outcome.e_capacity == pytest.approx(0.0, abs=1e-9)

    def test_ordering_against_ces_and_ies(self, two_bc):
        ies = solve_ies(two_bc)
        ces = solve_ces(two_bc, j_ind=ies.j_ind)
        cmes = solve_cmes(two_bc)
        cap = two_bc.tech.c_e * ces.e_capacity + two_bc.tech.c_p * ces.p_capacity
        sc_ces = float(ces.bills.sum() + cap)
        assert cmes.social_cost <= sc_ces + 2e-6
        assert sc_ces <= float(ies.j_ind.sum()) + 2e-6


class TestBaseline:
    def test_costs_are_baseline_bills(self, two_bc):
        outcome = solve_baseline(two_bc)
        assert outcome.social_cost == pytest.approx(6.0)
        assert outcome.per_bc_cost == pytest.approx([3.0, 3.0])
        assert outcome.schedule.p_ch.max() == 0.0
