"""Profitability of a double spend that gives up once ``A`` blocks behind.

The attacker premines one block, broadcasts the payment of value ``v``, and
races the honest chain. After ``z`` confirmations the attack succeeds as soon
as the private chain is longer than the official one; it is abandoned when
the deficit reaches ``A``. Revenue counts ``v`` plus the rewards of every
block in the private chain, and is expressed in coin units.
"""

from __future__ import annotations

import math
import numbers
from dataclasses import dataclass

from .doublespend import double_spend_probability
from .errors import DomainError
from .mining_model import NetworkParams
from .specfun import log_beta, reg_inc_beta
from .strategies import geometric_bracket, honest_revenue_ratio

__all__ = [
    "DoubleSpendPlan",
    "a_nakamoto_success_probability",
    "a_nakamoto_expected_revenue",
    "a_nakamoto_expected_duration",
    "a_nakamoto_revenue_ratio",
    "break_even_value",
    "minimal_profitable_double_spend",
]


def _is_count(x):
    return isinstance(x, numbers.Integral) and not isinstance(x, bool)


@dataclass(frozen=True)
class DoubleSpendPlan:
    z: int
    A: int
    v: float
    params: NetworkParams

    def __post_init__(self):
        if not (_is_count(self.z) and self.z >= 1):
            raise DomainError(f"z must be a positive integer, got {self.z!r}")
        if not (_is_count(self.A) and self.A >= self.z):
            raise DomainError(f"A must be an integer with A >= z, got A={self.A!r}, z={self.z}")
        if not (math.isfinite(self.v) and self.v >= 0):
            raise DomainError(f"v must be finite and nonnegative, got {self.v!r}")
        object.__setattr__(self, "z", int(self.z))
        object.__setattr__(self, "A", int(self.A))


def _pieces(plan):
    params = plan.params
    params.require_attacker_minority()
    p, q = params.p, params.q
    z, A = plan.z, plan.A
    lam = q / p
    one_minus_lam = (p - q) / p
    lam_a = lam ** A
    bracket_a = geometric_bracket(A, lam)
    big_p = double_spend_probability(z, params)
    i_dual = reg_inc_beta((p - q) ** 2, 0.5, float(z))
    # p^(z-1) q^z / B(z, z)
    head = math.exp((z - 1) * math.log(p) + z * math.log(q) - log_beta(z, z))
    return p, q, z, A, lam, one_minus_lam, lam_a, bracket_a, big_p, i_dual, head


def a_nakamoto_success_probability(plan: DoubleSpendPlan) -> float:
    """P_A(z) = (P(z) - lam^A) / (1 - lam^A), clamped to [0, 1]."""
    plan.params.require_attacker_minority()
    lam_a = plan.params.lam ** plan.A
    value = (double_spend_probability(plan.z, plan.params) - lam_a) / (1.0 - lam_a)
    return min(1.0, max(0.0, value))


def _revenue_over_b(plan, v_over_b):
    p, q, z, A, lam, oml, lam_a, br, big_p, i_dual, head = _pieces(plan)
    terms = (
        q * z / (2.0 * p) * big_p,
        -A * lam_a / (p * oml ** 3 * br * br) * i_dual,
        (2.0 - lam + lam * lam_a) / (oml * oml * br) * head,
        a_nakamoto_success_probability(plan) * (v_over_b + 1.0),
    )
    return math.fsum(terms)


def a_nakamoto_expected_revenue(plan: DoubleSpendPlan) -> float:
    """Expected revenue of one attack attempt, in coin units."""
    b = plan.params.b
    return b * _revenue_over_b(plan, plan.v / b)


def a_nakamoto_expected_duration(plan: DoubleSpendPlan) -> float:
    """Expected duration of one attack attempt, premining included, in seconds."""
    p, q, z, A, lam, oml, lam_a, br, big_p, i_dual, head = _pieces(plan)
    terms = (
        z / (2.0 * p) * big_p,
        A / (p * oml * oml * br) * i_dual,
        -head / (p * oml),
        1.0 / q,
    )
    return plan.params.tau0 * math.fsum(terms)


def a_nakamoto_revenue_ratio(plan: DoubleSpendPlan) -> float:
    """Revenue per second of the repeated attack."""
    return a_nakamoto_expected_revenue(plan) / a_nakamoto_expected_duration(plan)


def break_even_value(plan: DoubleSpendPlan) -> float:
    """Amount v* at which the attack earns exactly as much per second as honest mining.

    The ``v`` of ``plan`` is ignored. May be negative when the attack pays
    even with nothing to double spend.
    """
    params = plan.params
    zero = DoubleSpendPlan(plan.z, plan.A, 0.0, params)
    target = honest_revenue_ratio(params) * a_nakamoto_expected_duration(zero)
    slope = a_nakamoto_success_probability(zero)
    if slope <= 0.0:
        raise DomainError("attack never succeeds for this plan; no break-even amount")
    return (target - a_nakamoto_expected_revenue(zero)) / slope


def minimal_profitable_double_spend(z: int, params: NetworkParams) -> float:
    """Small-q limit v0 = b q^(-z) / (2 binom(2z-1, z)) of the break-even amount."""
    if not (_is_count(z) and z >= 1):
        raise DomainError(f"z must be a positive integer, got {z!r}")
    params.require_attacker_minority()
    z = int(z)
    return params.b * params.q ** (-z) / (2 * math.comb(2 * z - 1, z))
