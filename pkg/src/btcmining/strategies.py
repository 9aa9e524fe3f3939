"""Long-run profitability of honest and block-withholding strategies.

Ratios are expressed relative to honest mining, ``Gamma / Gamma_H``, and
assume the difficulty has already adjusted to the strategy (one official
block per ``tau0`` on average).
"""

from __future__ import annotations

import math
import numbers
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Sequence

from .errors import DomainError
from .mining_model import NetworkParams

__all__ = [
    "StrategyKind",
    "StrategySpec",
    "ProfitabilityResult",
    "HONEST",
    "SELFISH",
    "LEAD_STUBBORN",
    "EQUAL_FORK_STUBBORN",
    "a_trailing",
    "honest_revenue_ratio",
    "selfish_apparent_hashrate",
    "stubborn_f",
    "geometric_bracket",
    "trailing_polynomial",
    "strategy_revenue_ratio",
    "dominance_grid",
]


class StrategyKind(str, Enum):
    HONEST = "Honest"
    SELFISH = "SelfishMining"
    LEAD_STUBBORN = "LeadStubborn"
    EQUAL_FORK_STUBBORN = "EqualForkStubborn"
    A_TRAILING = "ATrailing"


@dataclass(frozen=True)
class StrategySpec:
    kind: StrategyKind
    A: Optional[int] = None

    def __post_init__(self):
        object.__setattr__(self, "kind", StrategyKind(self.kind))
        if self.kind is StrategyKind.A_TRAILING:
            if isinstance(self.A, bool) or not isinstance(self.A, numbers.Integral) or self.A < 1:
                raise DomainError(f"ATrailing needs an integer threshold A >= 1, got {self.A!r}")
            object.__setattr__(self, "A", int(self.A))
        elif self.A is not None:
            raise DomainError(f"threshold A is only meaningful for ATrailing, not {self.kind.value}")

    def label(self) -> str:
        if self.kind is StrategyKind.A_TRAILING:
            return f"ATrailing({self.A})"
        return self.kind.value


HONEST = StrategySpec(StrategyKind.HONEST)
SELFISH = StrategySpec(StrategyKind.SELFISH)
LEAD_STUBBORN = StrategySpec(StrategyKind.LEAD_STUBBORN)
EQUAL_FORK_STUBBORN = StrategySpec(StrategyKind.EQUAL_FORK_STUBBORN)


def a_trailing(A: int) -> StrategySpec:
    return StrategySpec(StrategyKind.A_TRAILING, A)


@dataclass(frozen=True)
class ProfitabilityResult:
    revenue_ratio_over_honest: float
    apparent_hashrate: Optional[float] = None

    @property
    def is_profitable(self) -> bool:
        return self.revenue_ratio_over_honest > 1.0


def honest_revenue_ratio(params: NetworkParams) -> float:
    """Revenue per second q b / tau0 of a miner following the protocol."""
    return params.q * params.b / params.tau0


def _sqrt_d(params):
    # sqrt(1 - 4 (1 - gamma) p q), written to stay accurate near gamma = 0
    p, q, g = params.p, params.q, params.gamma
    return math.sqrt((p - q) ** 2 + 4.0 * g * p * q)


def selfish_apparent_hashrate(params: NetworkParams) -> float:
    """Long-run share of official blocks mined by a selfish miner."""
    params.require_attacker_minority()
    p, q, g = params.p, params.q, params.gamma
    num = ((1 + p * q) * (p - q) + p * q) * q - (1 - g) * p * p * q * (p - q)
    return num / (p * p * q + p - q)


def stubborn_f(params: NetworkParams) -> float:
    """f(gamma, p, q) = (1-gamma)/gamma (1 - (1 - sqrt(D)) / 2q), D = 1 - 4(1-gamma)pq.

    Rationalized to 2 (1-gamma) p / (sqrt(D) + p - q), which is finite at gamma = 0.
    """
    params.require_attacker_minority()
    p, q, g = params.p, params.q, params.gamma
    return 2.0 * (1.0 - g) * p / (_sqrt_d(params) + p - q)


def geometric_bracket(n: int, lam: float) -> float:
    """[n] = (1 - lam^n) / (1 - lam) = 1 + lam + ... + lam^(n-1)."""
    if n < 0:
        raise DomainError("n must be nonnegative")
    if lam == 1.0:
        return float(n)
    if abs(1.0 - lam) < 0.5 and lam > 0:
        return -math.expm1(n * math.log(lam)) / (1.0 - lam)
    return (1.0 - lam ** n) / (1.0 - lam)


def trailing_polynomial(A: int, lam: float) -> float:
    """P_A(lam) = (1 - A lam^(A-1) + A lam^(A+1) - lam^(2A)) / (1 - lam)^3.

    The numerator has a triple root at lam = 1. Near it the equivalent sum
    sum_{j=1}^{A-1} lam^(A-1-j) [j] [j+1] is used instead.
    """
    if A < 1:
        raise DomainError("A must be at least 1")
    if abs(1.0 - lam) < 0.1:
        total = 0.0
        bj = 1.0  # [j]
        for j in range(1, A):
            bj1 = bj + lam ** j  # [j+1]
            total = total * lam + bj * bj1
            bj = bj1
        return total
    num = 1.0 - A * lam ** (A - 1) + A * lam ** (A + 1) - lam ** (2 * A)
    return num / (1.0 - lam) ** 3


def _ratio_selfish(params):
    return selfish_apparent_hashrate(params) / params.q


def _ratio_lead_stubborn(params):
    p, q = params.p, params.q
    den = p + p * q - q
    return ((p + p * q - q * q) - p * (p - q) * stubborn_f(params)) / den


def _ratio_equal_fork(params):
    # closed form of the equal-fork cycle; see notes for the derivation
    p, q, g = params.p, params.q, params.gamma
    r = _sqrt_d(params) + p - q
    return 4.0 * g * p / (r * r)


def _ratio_trailing(params, A):
    p, q, g = params.p, params.q, params.gamma
    lam = q / p
    d = p + p * q - q * q
    b_am1 = geometric_bracket(A - 1, lam)
    b_ap1 = geometric_bracket(A + 1, lam)
    pa = trailing_polynomial(A, lam)
    inner = (b_am1 + pa / (p * b_ap1)) * lam * lam - 2.0 / (_sqrt_d(params) + p - q)
    num = 1.0 + (1.0 - g) * p * (p - q) / (d * b_ap1) * inner
    den = (p + p * q - q) / d + (1.0 - g) * p * q / d * ((A + lam) / b_ap1 - 1.0)
    return num / den


def strategy_revenue_ratio(spec: StrategySpec, params: NetworkParams) -> ProfitabilityResult:
    """Gamma_strategy / Gamma_H after the difficulty has adjusted."""
    params.require_attacker_minority()
    kind = spec.kind
    if kind is StrategyKind.HONEST:
        return ProfitabilityResult(1.0, params.q)
    if kind is StrategyKind.SELFISH:
        q_app = selfish_apparent_hashrate(params)
        return ProfitabilityResult(q_app / params.q, q_app)
    if kind is StrategyKind.LEAD_STUBBORN:
        return ProfitabilityResult(_ratio_lead_stubborn(params))
    if kind is StrategyKind.EQUAL_FORK_STUBBORN:
        return ProfitabilityResult(_ratio_equal_fork(params))
    return ProfitabilityResult(_ratio_trailing(params, spec.A))


def _check_sorted(name, values):
    if not values:
        raise DomainError(f"{name} must be non-empty")
    if any(b < a for a, b in zip(values, values[1:])):
        raise DomainError(f"{name} must be sorted")


def dominance_grid(
    q_grid: Sequence[float],
    gamma_grid: Sequence[float],
    A_values: Sequence[int],
    tau0: float = 600.0,
    b: float = 12.5,
) -> list[list[tuple[StrategySpec, float]]]:
    """Best strategy and its ratio for each (q, gamma) cell, rows indexed by q.

    Candidates are compared in the order Honest, SM, LSM, EFSM, then ATrailing
    for each A in ``A_values``; a later candidate wins only if strictly better.
    """
    _check_sorted("q_grid", list(q_grid))
    _check_sorted("gamma_grid", list(gamma_grid))
    candidates = [HONEST, SELFISH, LEAD_STUBBORN, EQUAL_FORK_STUBBORN]
    candidates += [a_trailing(A) for A in A_values]
    grid = []
    for q in q_grid:
        row = []
        for g in gamma_grid:
            params = NetworkParams(q=q, gamma=g, tau0=tau0, b=b)
            best, best_ratio = None, -math.inf
            for spec in candidates:
                ratio = strategy_revenue_ratio(spec, params).revenue_ratio_over_honest
                if ratio > best_ratio:
                    best, best_ratio = spec, ratio
            row.append((best, best_ratio))
        grid.append(row)
    return grid
