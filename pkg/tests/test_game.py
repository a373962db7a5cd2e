import dataclasses

import numpy as np
import pytest

from ces_market.game import (
    AT_LOWER,
    AT_UPPER,
    INTERIOR,
    UndefinedPriceError,
    equilibrium_price,
    follower_best_response,
    verify_equilibrium,
)
from ces_market.instance import GridTariff

TARIFF = GridTariff(0.3, 0.0, 1000.0)


class TestBestResponse:
    def test_hits_upper_bound(self):
        br = follower_best_response(0.015, TARIFF, 0.0, 10.0)
        assert br.r == pytest.approx(10.0)
        assert br.segment == AT_UPPER

    def test_interior(self):
        br = follower_best_response(0.03, TARIFF, 0.0, 10.0)
        assert br.r == pytest.approx(5.0)
        assert br.segment == INTERIOR

    def test_hits_lower_bound(self):
        # with a positive floor a large enough price pins the request there
        br = follower_best_response(1.0, TARIFF, 2.0, 10.0)
        assert br.r == pytest.approx(2.0)
        assert br.segment == AT_LOWER

    def test_zero_floor_keeps_interior_for_any_finite_price(self):
        br = follower_best_response(1e9, TARIFF, 0.0, 10.0)
        assert br.segment == INTERIOR
        assert br.r > 0

    def test_nonpositive_price_rejected(self):
        with pytest.raises(ValueError):
            follower_best_response(0.0, TARIFF, 0.0, 10.0)

    def test_monotone_nonincreasing_in_price(self):
        qs = np.geomspace(1e-4, 1.0, 60)
        rs = [follower_best_response(q, TARIFF, 0.0, 50.0).r for q in qs]
        assert all(a >= b - 1e-12 for a, b in zip(rs, rs[1:]))

    def test_scale_covariance_of_interior_response(self):
        q = 0.05
        base = follower_best_response(q, TARIFF, 0.0, 1e9).r
        for k in (0.5, 2.0, 3.7):
            scaled_tariff = GridTariff(TARIFF.buy * k, 0.0, 1000.0)
            scaled = follower_best_response(q, scaled_tariff, 0.0, 1e9).r
            assert scaled == pytest.approx(k * base)


class TestEquilibriumPrice:
    # published request/price pairs scale as spread / (2 r)
    @pytest.mark.parametrize("r_star,expected", [
        (50.81, 2.95e-3),
        (114.88, 1.31e-3),
    ])
    def test_matches_published_pairs(self, r_star, expected):
        assert equilibrium_price(r_star, TARIFF) == pytest.approx(expected, rel=0.01)

    def test_formula(self):
        assert equilibrium_price(10.0, TARIFF) == pytest.approx(0.015)

    def test_payment_identity(self):
        r = 37.5
        q = equilibrium_price(r, TARIFF)
        assert q * r * r == pytest.approx(TARIFF.spread / 2 * r, rel=1e-12)

    def test_zero_request_is_undefined(self):
        with pytest.raises(UndefinedPriceError):
            equilibrium_price(0.0, TARIFF)

    def test_round_trip_with_best_response(self):
        for q in (0.002, 0.01, 0.08):
            br = follower_best_response(q, TARIFF, 0.0, 1e9)
            assert br.segment == INTERIOR
            assert equilibrium_price(br.r, TARIFF) == pytest.approx(q, rel=1e-12)


class TestVerifyEquilibrium:
    def test_passes_on_solved_fixture(self, two_bc):
        from ces_market.formulations import solve_ces

        outcome = solve_ces(two_bc)
        report = verify_equilibrium(outcome, two_bc)
        assert report.passed
        assert {c.name for c in report.checks} == {
            "best_response", "participation", "eso_profit_nonnegative"
        }

    def test_perturbed_price_fails_best_response(self, two_bc):
        from ces_market.formulations import solve_ces

        outcome = solve_ces(two_bc)
        outcome.q_star[0] *= 1.1
        report = verify_equilibrium(outcome, two_bc)
        failures = report.failures()
        assert failures and failures[0].name == "best_response"
        assert failures[0].building == "BC1"

    def test_empty_acceptance_is_vacuously_fine(self, single_bc):
        from ces_market.formulations import solve_ces

        outcome = solve_ces(single_bc)
        assert not outcome.accepted.any()
        report = verify_equilibrium(outcome, single_bc)
        assert report.passed
        assert outcome.eso_profit == pytest.approx(0.0, abs=1e-9)

    def test_report_serializes(self, two_bc):
        from ces_market.formulations import solve_ces

        report = verify_equilibrium(solve_ces(two_bc), two_bc)
        data = report.to_dict()
        assert data["passed"] is True
        assert isinstance(data["checks"], list)
