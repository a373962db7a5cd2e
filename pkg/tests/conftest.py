from pathlib import Path

import pytest

from ces_market.instance import (
    BuildingProfile,
    GridTariff,
    Scenario,
    StorageTech,
    TimeGrid,
    build_instance,
)

DATA_DIR = Path(__file__).parent / "data"


def two_bc_instance():
    """Complementary pair: BC1 shifts 10 kWh from period 0 to 1, BC2 from
    period 2 to 3, so shared storage of 10 kWh / 10 kW serves both. Derived
    optimum: r* = (10, 10), E = P = 10, operator profit 1.0."""
    return build_instance(
        TimeGrid(4, 1.0),
        GridTariff(0.3, 0.0, 1000.0),
        StorageTech(eta_ch=1.0, eta_dis=1.0, p_ch_max=1000.0, p_dis_max=1000.0,
                    c_e=0.15, c_p=0.05),
        [
            BuildingProfile("BC1", [Scenario(1.0, [0, 10, 0, 0], [10, 0, 0, 0])]),
            BuildingProfile("BC2", [Scenario(1.0, [0, 0, 0, 10], [0, 0, 10, 0])]),
        ],
        name="two_bc",
    )


def single_bc_instance():
    """Same pattern as BC1 alone: no diversity, so serving it cannot be
    profitable at these capital prices and the operator rejects."""
    return build_instance(
        TimeGrid(4, 1.0),
        GridTariff(0.3, 0.0, 1000.0),
        StorageTech(eta_ch=1.0, eta_dis=1.0, p_ch_max=1000.0, p_dis_max=1000.0,
                    c_e=0.15, c_p=0.05),
        [BuildingProfile("BC1", [Scenario(1.0, [0, 10, 0, 0], [10, 0, 0, 0])])],
        name="single_bc",
    )


def shift_instance(eta: float = 1.0, surplus: float = 10.0):
    """One building, two periods: `surplus` kW extra renewable in period 0,
    the same demand in period 1. The capital-cost curve is analytic."""
    return build_instance(
        TimeGrid(2, 1.0),
        GridTariff(0.3, 0.0, 1000.0),
        StorageTech(eta_ch=eta, eta_dis=eta, p_ch_max=1000.0, p_dis_max=1000.0,
                    c_e=0.15, c_p=0.05),
        [BuildingProfile("BC1", [Scenario(1.0, [0, surplus], [surplus, 0])])],
        name="shift",
    )


@pytest.fixture
def two_bc():
    return two_bc_instance()


@pytest.fixture
def single_bc():
    return single_bc_instance()


@pytest.fixture
def two_bc_path():
    return DATA_DIR / "two_bc.json"
