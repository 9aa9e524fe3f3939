"""Dyck words and the exact enumeration oracle for selfish-mining cycles.

A selfish-mining cycle, written as the sequence of block finders (S for the
attacker, H for the honest network), is one of

* ``H``: the honest network finds the next block;
* ``SHS``: the attacker wins the tie it created;
* ``SHH``: the honest network resolves the tie, on the attacker's block with
  probability gamma;
* ``SS w H`` with ``w`` a Dyck word: the attacker builds a lead of two and
  publishes everything once the lead falls back to one.

Expected attacker blocks ``Z`` and official blocks ``L`` per cycle give the
apparent hashrate E[Z] / E[L].
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, Sequence

from .errors import BudgetError, DomainError
from .mining_model import NetworkParams

__all__ = [
    "MAX_DYCK_HALF_LENGTH",
    "DyckWord",
    "AttackCycleWord",
    "CycleClassTotal",
    "EnumerationEstimate",
    "is_dyck",
    "enumerate_dyck",
    "count_dyck",
    "enumerate_sm_cycles",
    "sm_cycle_classes",
    "sm_cycle_tail_bound",
    "apparent_hashrate_by_enumeration",
    "official_length_histogram",
]

MAX_DYCK_HALF_LENGTH = 15
_ROUNDING = 1e-13


def is_dyck(word: Sequence[str] | str) -> bool:
    """True iff the word over {S, H} is balanced and no prefix has more H than S."""
    height = 0
    for letter in word:
        if letter == "S":
            height += 1
        elif letter == "H":
            height -= 1
            if height < 0:
                return False
        else:
            return False
    return height == 0


@dataclass(frozen=True)
class DyckWord:
    letters: str

    def __post_init__(self):
        if not is_dyck(self.letters):
            raise DomainError(f"{self.letters!r} is not a Dyck word")

    def __len__(self):
        return len(self.letters)

    def __str__(self):
        return self.letters


def _dyck_strings(n):
    # depth-first over (opens left, height); S < H so output is lexicographic
    out = []
    buf = []

    def walk(opens, height):
        if opens == 0 and height == 0:
            out.append("".join(buf))
            return
        if opens > 0:
            buf.append("S")
            walk(opens - 1, height + 1)
            buf.pop()
        if height > 0:
            buf.append("H")
            walk(opens, height - 1)
            buf.pop()

    walk(n, 0)
    return out


def _check_half_length(n):
    if n < 0:
        raise DomainError("n must be nonnegative")
    if n > MAX_DYCK_HALF_LENGTH:
        raise BudgetError(f"explicit enumeration is limited to n <= {MAX_DYCK_HALF_LENGTH}")


def enumerate_dyck(n: int) -> list[DyckWord]:
    """All Dyck words of length 2n in lexicographic order (S before H)."""
    _check_half_length(n)
    return [DyckWord(w) for w in _dyck_strings(n)]


def count_dyck(n: int) -> int:
    """Number of Dyck words of length 2n by dynamic programming over prefix heights."""
    if n < 0:
        raise DomainError("n must be nonnegative")
    ways = [1] + [0] * n
    for _ in range(2 * n):
        nxt = [0] * (n + 1)
        for h, w in enumerate(ways):
            if w:
                if h < n:
                    nxt[h + 1] += w
                if h > 0:
                    nxt[h - 1] += w
        ways = nxt
    return ways[0]


@dataclass(frozen=True)
class AttackCycleWord:
    """One selfish-mining cycle; ``Z`` is the attacker's expected share of ``L``."""

    letters: str
    cycle_class: str
    probability: float
    L: int
    Z: float


def _word_probability(letters, q, p):
    s = letters.count("S")
    return q ** s * p ** (len(letters) - s)


def enumerate_sm_cycles(max_len: int, params: NetworkParams) -> Iterator[AttackCycleWord]:
    """Yield every selfish-mining cycle word of length at most ``max_len``.

    Words come in order of length, then lexicographically. The longest words
    are ``SS w H`` with ``w`` of half-length ``(max_len - 3) // 2``, which must
    respect the explicit-enumeration budget.
    """
    if max_len < 1:
        raise DomainError("max_len must be at least 1")
    _check_half_length(max(0, (max_len - 3) // 2))
    q, p, g = params.q, params.p, params.gamma
    yield AttackCycleWord("H", "H", p, 1, 0.0)
    if max_len >= 3:
        yield AttackCycleWord("SHH", "SHH", _word_probability("SHH", q, p), 2, g)
        yield AttackCycleWord("SHS", "SHS", _word_probability("SHS", q, p), 2, 2.0)
    for n in range(0, (max_len - 3) // 2 + 1):
        for w in _dyck_strings(n):
            letters = "SS" + w + "H"
            yield AttackCycleWord(letters, "SSwH", _word_probability(letters, q, p), n + 2, float(n + 2))


@dataclass(frozen=True)
class CycleClassTotal:
    """All cycle words of one class and length, aggregated."""

    cycle_class: str
    length: int
    count: int
    probability: float
    L: int
    Z: float


def sm_cycle_classes(max_len: int, params: NetworkParams) -> list[CycleClassTotal]:
    """Cycle words of length at most ``max_len`` grouped by class and length.

    Word counts come from :func:`count_dyck`, so long words are covered
    without listing them.
    """
    if max_len < 1:
        raise DomainError("max_len must be at least 1")
    q, p, g = params.q, params.p, params.gamma
    out = [CycleClassTotal("H", 1, 1, p, 1, 0.0)]
    if max_len >= 3:
        out.append(CycleClassTotal("SHH", 3, 1, q * p * p, 2, g))
        out.append(CycleClassTotal("SHS", 3, 1, q * q * p, 2, 2.0))
    for n in range(0, (max_len - 3) // 2 + 1):
        count = count_dyck(n)
        if q == 0.0:
            prob = 0.0
        else:
            prob = math.exp(math.log(count) + (n + 2) * math.log(q) + (n + 1) * math.log(p))
        out.append(CycleClassTotal("SSwH", 2 * n + 3, count, prob, n + 2, float(n + 2)))
    return out


def _sswh_tail(params, n0, weighted):
    # sum over n >= n0 of q^2 p C_n (pq)^n [times (n+2)], using C_n <= 4^n / (sqrt(pi) n^1.5)
    q, p = params.q, params.p
    s = 4.0 * p * q
    if q == 0.0:
        return 0.0
    if n0 == 0:
        # n = 0 term exactly, then bound from n = 1
        first = q * q * p * (2.0 if weighted else 1.0)
        return first + _sswh_tail(params, 1, weighted)
    factor = (n0 + 2.0) if weighted else 1.0
    return q * q * p * factor / (math.sqrt(math.pi) * n0 ** 1.5) * s ** n0 / (1.0 - s)


@dataclass(frozen=True)
class EnumerationEstimate:
    """Truncated E[Z] / E[L] with an interval guaranteed to contain the exact value."""

    value: float
    lower: float
    upper: float
    covered_mass: float
    mass_tail_bound: float


def sm_cycle_tail_bound(max_len: int, params: NetworkParams) -> tuple[float, float, float]:
    """Upper bounds on the probability, E[Z] and E[L] carried by words longer than ``max_len``."""
    params.require_attacker_minority()
    q, p, g = params.q, params.p, params.gamma
    mass = z_part = l_part = 0.0
    if max_len < 3:
        mass += q * p * p + q * q * p
        z_part += q * p * p * g + 2.0 * q * q * p
        l_part += 2.0 * (q * p * p + q * q * p)
    n0 = max(0, (max_len - 3) // 2 + 1) if max_len >= 3 else 0
    mass += _sswh_tail(params, n0, False)
    weighted = _sswh_tail(params, n0, True)
    return mass, z_part + weighted, l_part + weighted


def apparent_hashrate_by_enumeration(params: NetworkParams, max_len: int) -> EnumerationEstimate:
    """Apparent hashrate of the selfish miner from the truncated cycle grammar."""
    params.require_attacker_minority()
    classes = sm_cycle_classes(max_len, params)
    mass = math.fsum(c.probability for c in classes)
    ez = math.fsum(c.probability * c.Z for c in classes)
    el = math.fsum(c.probability * c.L for c in classes)
    tail_mass, tail_z, tail_l = sm_cycle_tail_bound(max_len, params)
    # widen by a rounding allowance so the interval is safe in floating point
    lower = ez / (el + tail_l) * (1.0 - _ROUNDING)
    upper = (ez + tail_z) / el * (1.0 + _ROUNDING)
    return EnumerationEstimate(ez / el, lower, upper, mass, tail_mass)


def official_length_histogram(params: NetworkParams, max_len: int) -> dict[int, float]:
    """Probability of each value of L - 1 among cycles of length at most ``max_len``."""
    hist: dict[int, float] = {}
    for c in sm_cycle_classes(max_len, params):
        hist[c.L - 1] = hist.get(c.L - 1, 0.0) + c.probability
    return dict(sorted(hist.items()))

