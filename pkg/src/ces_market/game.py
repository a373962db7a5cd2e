"""Leader-follower machinery: consumer best response to a quadratic service
price, the equilibrium price extracted from an optimal request, and an
independent post-solve equilibrium verification.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .instance import GridTariff, Instance

__all__ = [
    "AT_LOWER",
    "INTERIOR",
    "AT_UPPER",
    "BestResponse",
    "EquilibriumCheck",
    "EquilibriumReport",
    "UndefinedPriceError",
    "follower_best_response",
    "equilibrium_price",
    "verify_equilibrium",
]

AT_LOWER = "at_lower"
INTERIOR = "interior"
AT_UPPER = "at_upper"

DEFAULT_TOL = 1e-5


class UndefinedPriceError(ValueError):
    """The price formula has no value at a zero request; callers should
    reclassify such a consumer as rejected."""


@dataclass(frozen=True)
class BestResponse:
    """Optimal request and the active segment of the piecewise response.

    The unconstrained optimum ``spread / (2q)`` is clamped into
    ``[r_min, r_max]``; the segment label records which case applied
    (with ``r_min = 0`` the lower segment needs an infinite price and is
    unreachable).
    """

    r: float
    segment: str


def follower_best_response(
    q: float, tariff: GridTariff, r_min: float, r_max: float
) -> BestResponse:
    """Cost-minimizing request of one consumer facing price coefficient `q`.

    The consumer trades the bill reduction ``spread * r`` against the
    quadratic service payment ``q * r**2``; the optimum is the clamped
    stationary point.
    """
    if q <= 0:
        raise ValueError(f"price coefficient must be > 0, got {q}")
    if r_min > r_max:
        raise ValueError(f"r_min {r_min} exceeds r_max {r_max}")
    raw = tariff.spread / (2.0 * q)
    if raw >= r_max:
        return BestResponse(r_max, AT_UPPER)
    if raw <= r_min:
        return BestResponse(r_min, AT_LOWER)
    return BestResponse(raw, INTERIOR)


def equilibrium_price(r_star: float, tariff: GridTariff) -> float:
    """Price coefficient that makes `r_star` the consumer's best response:
    ``spread / (2 r*)``. The payment identity
    ``q* r*^2 == (spread / 2) r*`` holds by construction."""
    if r_star <= 0:
        raise UndefinedPriceError(
            f"equilibrium price is undefined at r* = {r_star}; reclassify as rejected"
        )
    return tariff.spread / (2.0 * r_star)


@dataclass(frozen=True)
class EquilibriumCheck:
    building: str
    name: str
    passed: bool
    magnitude: float

    def to_dict(self) -> dict:
        return {
            "building": self.building,
            "check": self.name,
            "passed": self.passed,
            "magnitude": self.magnitude,
        }


@dataclass
class EquilibriumReport:
    """Outcome of the independent equilibrium verification."""

    tol: float
    checks: list[EquilibriumCheck] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def failures(self) -> list[EquilibriumCheck]:
        return [c for c in self.checks if not c.passed]

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "tol": self.tol,
            "checks": [c.to_dict() for c in self.checks],
        }


def verify_equilibrium(outcome, inst: Instance, tol: float = DEFAULT_TOL) -> EquilibriumReport:
    """Re-check a solved market outcome with fresh arithmetic.

    Per accepted consumer: (a) its request equals the best response to its
    price, (b) participation is rational (payment plus recomputed bill does
    not exceed its standalone-storage cost), and per solve: (c) operator
    profit is non-negative. Rejected consumers must carry zero request and
    payment. The outcome only needs the CES result fields (`r_star`,
    `q_star`, `accepted`, `payments`, `bills`, `j_ind`, `eso_profit`).
    """
    report = EquilibriumReport(tol=tol)
    names = inst.building_names()
    for i in range(inst.n_buildings):
        name = names[i]
        if outcome.accepted[i]:
            br = follower_best_response(
                outcome.q_star[i], inst.tariff, inst.r_min[i], inst.r_max[i]
            )
            dev = abs(outcome.r_star[i] - br.r)
            report.checks.append(
                EquilibriumCheck(name, "best_response", dev <= tol, dev)
            )
            slack = outcome.payments[i] + outcome.bills[i] - outcome.j_ind[i]
            report.checks.append(
                EquilibriumCheck(name, "participation", slack <= tol, max(0.0, slack))
            )
        else:
            resid = abs(outcome.r_star[i]) + abs(outcome.payments[i])
            report.checks.append(
                EquilibriumCheck(name, "rejected_zeroed", resid <= tol, resid)
            )
    report.checks.append(
        EquilibriumCheck("*", "eso_profit_nonnegative", outcome.eso_profit >= -tol,
                         max(0.0, -outcome.eso_profit))
    )
    return report
