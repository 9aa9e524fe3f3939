"""Success probability of a double spend after ``z`` confirmations."""

from __future__ import annotations

import math
import numbers
from dataclasses import dataclass
from typing import Optional

from .errors import DomainError
from .mining_model import NetworkParams
from .specfun import log_reg_inc_gamma_upper, reg_inc_beta, reg_inc_gamma_lower

__all__ = [
    "ConfirmationQuery",
    "nakamoto_catchup_probability",
    "double_spend_probability",
    "double_spend_asymptotic",
    "double_spend_probability_conditional",
    "kappa_from_duration",
    "confirmations_for_risk",
]

_MAX_CONFIRMATIONS = 10**7


@dataclass(frozen=True)
class ConfirmationQuery:
    """``kappa`` is the honest mining time of the ``z`` blocks divided by its mean ``z tau0 / p``."""

    z: int
    params: NetworkParams
    kappa: Optional[float] = None

    def __post_init__(self):
        _check_z(self.z)
        if self.kappa is not None and not (math.isfinite(self.kappa) and self.kappa > 0):
            raise DomainError(f"kappa must be finite and positive, got {self.kappa!r}")


def _check_z(z):
    if isinstance(z, bool) or not isinstance(z, numbers.Integral) or z < 1:
        raise DomainError(f"z must be a positive integer, got {z!r}")


def nakamoto_catchup_probability(n: int, params: NetworkParams) -> float:
    """Probability (q/p)^n that the attacker ever makes up a deficit of ``n`` blocks."""
    if isinstance(n, bool) or not isinstance(n, numbers.Integral) or n < 0:
        raise DomainError(f"n must be a nonnegative integer, got {n!r}")
    if not (0.0 < params.q <= 0.5):
        raise DomainError(f"catch-up probability needs 0 < q <= 1/2, got q={params.q!r}")
    if params.q == 0.5:
        return 1.0
    return params.lam ** int(n)


def double_spend_probability(z: int, params: NetworkParams) -> float:
    """P(z) = I_{4pq}(z, 1/2)."""
    _check_z(z)
    params.require_attacker_minority()
    return reg_inc_beta(params.s, float(z), 0.5)


def double_spend_asymptotic(z: int, params: NetworkParams) -> float:
    """Leading-order behaviour s^z / sqrt(pi (1 - s) z) of P(z)."""
    _check_z(z)
    params.require_attacker_minority()
    s = params.s
    one_minus_s = (params.p - params.q) ** 2
    return math.exp(z * math.log(s) - 0.5 * math.log(math.pi * one_minus_s * z))


def double_spend_probability_conditional(query: ConfirmationQuery) -> float:
    """P(z, kappa): the double-spend probability given the observed confirmation time.

    With x = kappa z, P = P(z, lam x) + lam^z e^{x (1 - lam)} Q(z, x), where P(s, .)
    and Q(s, .) are the lower and upper regularized incomplete gamma functions.
    """
    if query.kappa is None:
        raise DomainError("conditional probability needs kappa")
    params = query.params
    params.require_attacker_minority()
    z = int(query.z)
    lam = params.lam
    x = query.kappa * z
    first = reg_inc_gamma_lower(float(z), lam * x)
    log_second = z * math.log(lam) + x * (1.0 - lam) + log_reg_inc_gamma_upper(float(z), x)
    value = first + math.exp(log_second)
    return min(1.0, max(0.0, value))


def kappa_from_duration(duration: float, z: int, params: NetworkParams) -> float:
    """Normalize an observed confirmation time by its expectation ``z tau0 / p``."""
    _check_z(z)
    if not (math.isfinite(duration) and duration >= 0):
        raise DomainError("duration must be finite and nonnegative")
    return duration * params.p / (z * params.tau0)


def confirmations_for_risk(max_risk: float, params: NetworkParams) -> int:
    """Least z >= 1 with P(z) <= max_risk."""
    if not (0.0 < max_risk < 1.0):
        raise DomainError(f"max_risk must lie in (0, 1), got {max_risk!r}")
    params.require_attacker_minority()
    # P(z) is decreasing: bracket by doubling, then bisect
    if double_spend_probability(1, params) <= max_risk:
        return 1
    lo, hi = 1, 2
    while double_spend_probability(hi, params) > max_risk:
        lo, hi = hi, hi * 2
        if hi > _MAX_CONFIRMATIONS:
            raise DomainError("risk target needs an unreasonable number of confirmations")
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if double_spend_probability(mid, params) <= max_risk:
            hi = mid
        else:
            lo = mid
    return hi
