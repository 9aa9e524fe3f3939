"""Block discovery model and Catalan combinatorics.

Block arrivals of a miner with rate ``alpha`` form a Poisson process, so
inter-block times are exponential and the number of blocks found in a time
window is Poisson. While the honest network finds ``n`` blocks the attacker
finds a negative binomial number of blocks.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import DomainError
from .specfun import log_gamma

__all__ = [
    "NetworkParams",
    "DiscreteDistribution",
    "interblock_time_density",
    "blocks_mined_pmf",
    "attacker_blocks_pmf",
    "catalan_number",
    "log_catalan",
    "catalan_generating_value",
    "catalan_distribution",
    "poisson_distribution",
    "negative_binomial_distribution",
]


@dataclass(frozen=True)
class NetworkParams:
    """Attacker share ``q``, connectivity ``gamma``, target time ``tau0`` (s), reward ``b``.

    ``q = 0`` is accepted so that a simulation can run without an attacker;
    analytic operations check their own, narrower, domain.
    """

    q: float
    gamma: float = 0.0
    tau0: float = 600.0
    b: float = 12.5

    def __post_init__(self):
        if not (math.isfinite(self.q) and 0.0 <= self.q < 1.0):
            raise DomainError(f"q must lie in [0, 1), got {self.q!r}")
        if not (math.isfinite(self.gamma) and 0.0 <= self.gamma <= 1.0):
            raise DomainError(f"gamma must lie in [0, 1], got {self.gamma!r}")
        if not (math.isfinite(self.tau0) and self.tau0 > 0):
            raise DomainError(f"tau0 must be positive, got {self.tau0!r}")
        if not (math.isfinite(self.b) and self.b > 0):
            raise DomainError(f"b must be positive, got {self.b!r}")

    @property
    def p(self) -> float:
        return 1.0 - self.q

    @property
    def alpha(self) -> float:
        """Honest block rate per second."""
        return self.p / self.tau0

    @property
    def alpha_prime(self) -> float:
        """Attacker block rate per second."""
        return self.q / self.tau0

    @property
    def lam(self) -> float:
        return self.q / self.p

    @property
    def s(self) -> float:
        return 4.0 * self.p * self.q

    def require_attacker_minority(self):
        """Raise unless 0 < q < 1/2, the domain of the closed-form results."""
        if not (0.0 < self.q < 0.5):
            raise DomainError(f"this result needs 0 < q < 1/2, got q={self.q!r}")


@dataclass(frozen=True)
class DiscreteDistribution:
    """A distribution on the nonnegative integers with a rigorous tail bound.

    ``tail_bound(n)`` must bound the mass strictly above ``n``.
    """

    pmf: Callable[[int], float]
    tail_bound: Callable[[int], float]
    name: str = ""
    _table: list = field(default_factory=list, repr=False, compare=False)

    def support_bound(self, eps: float) -> int:
        """Smallest n whose tail bound beyond n is below ``eps``."""
        if not eps > 0:
            raise DomainError("eps must be positive")
        if self.tail_bound(0) < eps:
            return 0
        lo, hi = 0, 1
        while self.tail_bound(hi) >= eps:
            lo, hi = hi, hi * 2
            if hi > 1 << 40:
                raise DomainError("tail decays too slowly to truncate")
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if self.tail_bound(mid) < eps:
                hi = mid
            else:
                lo = mid
        return hi

    def truncated_pmf(self, eps: float = 1e-12) -> np.ndarray:
        n = self.support_bound(eps)
        return np.array([self.pmf(k) for k in range(n + 1)])

    def cdf(self, k: int) -> float:
        if k < 0:
            return 0.0
        return min(1.0, math.fsum(self.pmf(j) for j in range(k + 1)))

    def mean(self, eps: float = 1e-12) -> float:
        table = self.truncated_pmf(eps)
        return float(np.dot(np.arange(len(table)), table))

    def sample(self, rng: np.random.Generator, size: int, eps: float = 1e-12) -> np.ndarray:
        """Inverse-CDF sampling on the table truncated at ``support_bound(eps)``."""
        if not self._table:
            self._table.extend(np.cumsum(self.truncated_pmf(eps)).tolist())
        cum = self._table
        u = rng.random(size) * cum[-1]
        return np.array([bisect.bisect_right(cum, x) for x in u], dtype=np.int64)


def interblock_time_density(t: float, rate: float) -> float:
    """Exponential density ``rate * exp(-rate * t)``."""
    if not (math.isfinite(rate) and rate > 0):
        raise DomainError("rate must be positive")
    if not t >= 0:
        raise DomainError("t must be nonnegative")
    if math.isinf(t):
        return 0.0
    return rate * math.exp(-rate * t)


def _log_poisson(n, mean):
    if mean == 0.0:
        return 0.0 if n == 0 else -math.inf
    return n * math.log(mean) - mean - math.lgamma(n + 1)


def blocks_mined_pmf(n: int, t: float, rate: float) -> float:
    """Probability that a miner of the given rate finds exactly ``n`` blocks in time ``t``."""
    if n < 0:
        raise DomainError("n must be nonnegative")
    if not (math.isfinite(t) and t >= 0):
        raise DomainError("t must be finite and nonnegative")
    if not (math.isfinite(rate) and rate > 0):
        raise DomainError("rate must be positive")
    return math.exp(_log_poisson(n, rate * t))


def _log_binom(n, k):
    return math.lgamma(n + 1) - math.lgamma(k + 1) - math.lgamma(n - k + 1)


def attacker_blocks_pmf(k: int, n: int, params: NetworkParams) -> float:
    """P[attacker finds k blocks while the honest network finds n] = p^n q^k C(k+n-1, k)."""
    if k < 0:
        raise DomainError("k must be nonnegative")
    if n < 1:
        raise DomainError("n must be a positive integer")
    q, p = params.q, params.p
    if q == 0.0:
        return 1.0 if k == 0 else 0.0
    return math.exp(n * math.log(p) + k * math.log(q) + _log_binom(k + n - 1, k))


def catalan_number(n: int) -> int:
    """C_n = (2n)! / (n! (n+1)!), exact."""
    if n < 0:
        raise DomainError("n must be nonnegative")
    c = 1
    for m in range(n):
        c = c * 2 * (2 * m + 1) // (m + 2)
    return c


def log_catalan(n: int) -> float:
    if n < 0:
        raise DomainError("n must be nonnegative")
    return log_gamma(2 * n + 1) - log_gamma(n + 1) - log_gamma(n + 2)


def catalan_generating_value(x: float) -> float:
    """C(x) = sum C_n x^n = (1 - sqrt(1 - 4x)) / (2x) on [0, 1/4]."""
    if not (0.0 <= x <= 0.25):
        raise DomainError(f"x must lie in [0, 1/4], got {x!r}")
    if x == 0.0:
        return 1.0
    # rationalized form avoids cancellation for small x
    return 2.0 / (1.0 + math.sqrt(1.0 - 4.0 * x))


def _catalan_tail(s, start):
    # sum_{n >= start} C_n x^n <= sum 4^n x^n = s^start / (1 - s), s = 4x
    return s ** start / (1.0 - s)


def catalan_distribution(kind: str, params: NetworkParams) -> DiscreteDistribution:
    """Catalan distributions of the first, second or third type.

    first:  P[n] = C_n p (pq)^n
    second: P[0] = p, P[n] = C_{n-1} (pq)^n
    third:  P[0] = p, P[1] = pq + pq^2, P[n] = p q^2 C_{n-1} (pq)^(n-1)
    """
    params.require_attacker_minority()
    p, q = params.p, params.q
    x = p * q
    lx = math.log(x)
    s = 4.0 * x

    if kind == "first":
        def pmf(n):
            if n < 0:
                return 0.0
            return p * math.exp(log_catalan(n) + n * lx)

        def tail(n):
            return p * _catalan_tail(s, n + 1)
    elif kind == "second":
        def pmf(n):
            if n < 0:
                return 0.0
            if n == 0:
                return p
            return math.exp(log_catalan(n - 1) + n * lx)

        def tail(n):
            return x * _catalan_tail(s, n)
    elif kind == "third":
        def pmf(n):
            if n < 0:
                return 0.0
            if n == 0:
                return p
            if n == 1:
                return x + x * q
            return p * q * q * math.exp(log_catalan(n - 1) + (n - 1) * lx)

        def tail(n):
            if n == 0:
                return 1.0 - p
            return p * q * q * _catalan_tail(s, n)
    else:
        raise DomainError(f"unknown Catalan distribution kind {kind!r}")
    return DiscreteDistribution(pmf=pmf, tail_bound=tail, name=f"catalan-{kind}")


def poisson_distribution(mean: float) -> DiscreteDistribution:
    if not (math.isfinite(mean) and mean >= 0):
        raise DomainError("mean must be finite and nonnegative")

    def tail(n):
        # beyond n > mean the pmf ratio is at most mean/(n+2)
        k = n + 1
        head = math.exp(_log_poisson(k, mean))
        r = mean / (k + 1)
        return head / (1.0 - r) if r < 1.0 else 1.0

    return DiscreteDistribution(
        pmf=lambda n: math.exp(_log_poisson(n, mean)) if n >= 0 else 0.0,
        tail_bound=tail,
        name="poisson",
    )


def negative_binomial_distribution(n: int, params: NetworkParams) -> DiscreteDistribution:
    """Attacker block count while the honest network finds ``n`` blocks."""
    if n < 1:
        raise DomainError("n must be a positive integer")
    q = params.q

    def tail(k):
        # pmf ratio (j+n)/(j+1) q is decreasing in j; bound by geometric series once below 1
        j = k + 1
        head = attacker_blocks_pmf(j, n, params)
        r = (j + n) / (j + 1) * q
        return head / (1.0 - r) if r < 1.0 else 1.0

    return DiscreteDistribution(
        pmf=lambda k: attacker_blocks_pmf(k, n, params) if k >= 0 else 0.0,
        tail_bound=tail,
        name="negative-binomial",
    )
