import dataclasses

import numpy as np
import pytest

from ces_market.formulations import (
    ies_outcome,
    solve_baseline,
    solve_ces,
    solve_cmes,
    solve_ies,
    ves_equilibrium,
)
from ces_market.metrics import (
    AccountingError,
    consumer_incentive,
    rsc,
    social_cost,
    utilization_stats,
)

from conftest import single_bc_instance, two_bc_instance


@pytest.fixture(scope="module")
def solved():
    inst = two_bc_instance()
    ies = solve_ies(inst)
    return {
        "inst": inst,
        "ies": ies,
        "baseline": solve_baseline(inst),
        "ces": solve_ces(inst, j_ind=ies.j_ind),
        "cmes": solve_cmes(inst),
        "ves": ves_equilibrium(inst, np.arange(0.05, 0.31, 0.01)),
    }


class TestSocialCost:
    def test_fixture_rows(self, solved):
        inst = solved["inst"]
        assert social_cost(solved["baseline"], inst).social_cost == pytest.approx(6.0)
        assert social_cost(ies_outcome(solved["ies"], inst), inst).social_cost == pytest.approx(4.0, abs=1e-8)
        assert social_cost(solved["ces"], inst).social_cost == pytest.approx(2.0, abs=1e-8)
        assert social_cost(solved["cmes"], inst).social_cost == pytest.approx(2.0, abs=1e-8)

    def test_ces_components(self, solved):
        row = social_cost(solved["ces"], solved["inst"])
        assert row.social_cost == pytest.approx(row.bills + row.capital, abs=1e-12)
        assert row.eso_profit == pytest.approx(row.payments - row.capital, abs=1e-9)

    def test_reconciliation_failure_raises(self, solved):
        broken = dataclasses.replace(solved["ces"])
        broken.eso_profit = broken.eso_profit + 1.0
        with pytest.raises(AccountingError):
            social_cost(broken, solved["inst"])

    def test_accounting_identity_ces_and_ves(self, solved):
        inst = solved["inst"]
        for tag in ("ces", "ves"):
            outcome = solved[tag]
            row = social_cost(outcome, inst)
            ci = consumer_incentive(outcome, inst)
            residual = abs(
                ci.sum() + row.eso_profit + row.social_cost - inst.baseline_bills.sum()
            )
            assert residual <= 1e-6


class TestRsc:
    def test_anchors(self):
        assert rsc(5.0, 5.0, 9.0) == 0.0
        assert rsc(9.0, 5.0, 9.0) == 1.0

    def test_published_table_arithmetic(self):
        # five-consumer column of the published social-welfare table
        sc = {"woes": 10.73, "ies": 10.65, "ves": 10.70, "ces": 10.02, "cmes": 9.90}
        value = rsc(sc["ces"], sc["cmes"], sc["woes"])
        assert value == pytest.approx(0.1446, abs=5e-4)

    def test_degenerate_denominator(self):
        with pytest.raises(ValueError):
            rsc(1.0, 2.0, 2.0)

    def test_ordering_mirrors_social_cost(self, solved):
        inst = solved["inst"]
        woes = social_cost(solved["baseline"], inst).social_cost
        cmes = social_cost(solved["cmes"], inst).social_cost
        ces = social_cost(solved["ces"], inst).social_cost
        ies = social_cost(ies_outcome(solved["ies"], inst), inst).social_cost
        assert 0.0 <= rsc(ces, cmes, woes) <= rsc(ies, cmes, woes) <= 1.0 + 1e-9


class TestConsumerIncentive:
    def test_market_beats_standalone_on_fixture(self, solved):
        inst = solved["inst"]
        ci_ces = consumer_incentive(solved["ces"], inst)
        ci_ies = consumer_incentive(ies_outcome(solved["ies"], inst), inst)
        assert ci_ces == pytest.approx([1.5, 1.5], abs=1e-8)
        assert ci_ies == pytest.approx([1.0, 1.0], abs=1e-8)
        assert (ci_ces >= ci_ies - 1e-9).all()

    def test_rejected_building_without_storage_value(self):
        # no surplus anywhere: standalone storage is worthless, so the
        # rejected building keeps exactly its baseline cost
        from ces_market.instance import (
            BuildingProfile, GridTariff, Scenario, StorageTech, TimeGrid,
            build_instance,
        )

        inst = build_instance(
            TimeGrid(2, 1.0),
            GridTariff(0.3, 0.0, 1000.0),
            StorageTech(eta_ch=0.9, eta_dis=0.9, p_ch_max=500, p_dis_max=500,
                        c_e=0.15, c_p=0.05),
            [BuildingProfile("b", [Scenario(1.0, [5, 5], [1, 1])])],
        )
        outcome = solve_ces(inst)
        assert not outcome.accepted.any()
        assert consumer_incentive(outcome, inst) == pytest.approx([0.0], abs=1e-9)

    def test_rejected_building_falls_back_to_standalone(self):
        inst = single_bc_instance()
        outcome = solve_ces(inst)
        assert not outcome.accepted.any()
        # standalone storage saves this building 1.0 against the baseline
        assert consumer_incentive(outcome, inst) == pytest.approx([1.0], abs=1e-8)


class TestUtilization:
    def test_fixture_trace(self, solved):
        inst = solved["inst"]
        ces = solved["ces"]
        stats = utilization_stats(ces.schedule, ces.e_capacity, ces.p_capacity, inst.time)
        assert not stats.empty
        # full energy utilization right after each charge period
        assert stats.energy_pct[0, 0] == pytest.approx(100.0, abs=1e-6)
        assert stats.energy_pct[0, 2] == pytest.approx(100.0, abs=1e-6)
        assert stats.peak_energy_pct == pytest.approx(100.0, abs=1e-6)
        assert stats.peak_power_pct == pytest.approx(100.0, abs=1e-6)
        assert stats.energy_pct.max() <= 100.0 + 1e-6
        assert stats.power_pct.max() <= 100.0 + 1e-6
        assert stats.soc_traces.shape == ces.schedule.e.shape

    def test_empty_when_no_storage(self, solved):
        inst = solved["inst"]
        base = solved["baseline"]
        stats = utilization_stats(base.schedule, 0.0, 0.0, inst.time)
        assert stats.empty
