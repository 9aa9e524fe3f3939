"""Monte Carlo driver: trials, aggregation, standard errors and reports."""

from __future__ import annotations

import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Any, Callable, Optional, Sequence, Union

import numpy as np

from ..errors import ConfigError, DomainError
from ..mining_model import NetworkParams
from ..nakamoto_profitability import DoubleSpendPlan
from ..strategies import StrategyKind, StrategySpec
from . import kernels
from .config import SCHEMA_VERSION, SimulationConfig, config_to_dict

__all__ = [
    "Estimate",
    "CycleOutcome",
    "CycleTable",
    "SimulationReport",
    "RaceStatistics",
    "UncappedDoubleSpend",
    "DoubleSpendEstimate",
    "DEFAULT_LAG_CAP",
    "trial_seeds",
    "simulate_cycles",
    "run",
    "poisson_race_statistics",
    "estimate_time_to_profitability",
    "estimate_double_spend_success",
    "ratio_of_means",
]

DEFAULT_LAG_CAP = 10_000
MAX_BATCH = 10_000
MIN_BATCHES = 30
CHUNK = 1 << 14
WEEK = 7 * 24 * 3600.0

_KIND_CODES = {
    StrategyKind.HONEST: kernels.HONEST,
    StrategyKind.SELFISH: kernels.SELFISH,
    StrategyKind.LEAD_STUBBORN: kernels.LEAD_STUBBORN,
    StrategyKind.EQUAL_FORK_STUBBORN: kernels.EQUAL_FORK_STUBBORN,
    StrategyKind.A_TRAILING: kernels.A_TRAILING,
}


@dataclass(frozen=True)
class Estimate:
    value: float
    se: float

    def to_dict(self) -> dict[str, float]:
        return {"value": self.value, "se": self.se}

    def within(self, target: float, k: float = 3.0) -> bool:
        """True if ``target`` lies within ``k`` standard errors."""
        return abs(self.value - target) <= k * self.se


def trial_seeds(seed: int, count: int) -> list[int]:
    """Independent 32-bit stream seeds, one per trial, derived from a master seed."""
    children = np.random.SeedSequence(seed).spawn(count)
    return [int(c.generate_state(1, np.uint32)[0]) for c in children]


def _default_workers():
    return max(1, min(8, os.cpu_count() or 1))


def _parallel_map(fn: Callable, items: Sequence, workers: Optional[int]) -> list:
    workers = _default_workers() if workers is None else workers
    if workers < 1:
        raise DomainError("workers must be at least 1")
    if workers == 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def ratio_of_means(x: np.ndarray, y: np.ndarray) -> Estimate:
    """sum(x) / sum(y) with a batch-means, delta-method standard error.

    Consecutive cycles are grouped in batches of ``min(10^4, n // 30)`` so
    that the error respects short-range dependence between cycles.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    n = x.shape[0]
    sy = float(y.sum())
    if n == 0 or sy == 0.0:
        raise DomainError("ratio of means needs a positive denominator")
    r = float(x.sum()) / sy
    size = min(MAX_BATCH, max(1, n // MIN_BATCHES))
    nb = n // size
    if nb < 2:
        return Estimate(r, math.nan)
    xb = x[: nb * size].reshape(nb, size).sum(axis=1)
    yb = y[: nb * size].reshape(nb, size).sum(axis=1)
    resid = xb - r * yb
    var = float(np.dot(resid, resid)) / (nb - 1) / nb
    return Estimate(r, math.sqrt(var) / float(yb.mean()))


@dataclass(frozen=True)
class CycleOutcome:
    duration: float
    official_length: int
    attacker_blocks: int
    attacker_reward: float
    honest_reward: float


@dataclass
class CycleTable:
    """Per-cycle records of all trials, concatenated in trial order."""

    duration: np.ndarray
    official: np.ndarray
    attacker: np.ndarray
    found: np.ndarray
    epoch: np.ndarray
    success: Optional[np.ndarray]
    capped: Optional[np.ndarray]
    trial_starts: np.ndarray
    b: float
    v: float = 0.0

    def __len__(self):
        return int(self.duration.shape[0])

    def attacker_reward(self) -> np.ndarray:
        reward = self.b * self.attacker.astype(np.float64)
        if self.success is not None:
            reward = reward + self.v * self.success
        return reward

    def outcome(self, i: int) -> CycleOutcome:
        z = int(self.attacker[i])
        extra = self.v if self.success is not None and self.success[i] else 0.0
        return CycleOutcome(
            duration=float(self.duration[i]),
            official_length=int(self.official[i]),
            attacker_blocks=z,
            attacker_reward=self.b * z + extra,
            honest_reward=self.b * (int(self.official[i]) - z),
        )

    def trial(self, k: int) -> slice:
        end = self.trial_starts[k + 1] if k + 1 < len(self.trial_starts) else len(self)
        return slice(int(self.trial_starts[k]), int(end))


def _initial_capacity(config):
    if config.cycles is not None:
        return config.cycles
    return int(2.5 * config.sim_time / config.params.tau0) + 1024


def _run_trial(config, seed):
    p = config.params
    cap = _initial_capacity(config)
    max_cycles = config.cycles or 0
    sim_time = config.sim_time or 0.0
    while True:
        dur = np.empty(cap)
        off = np.empty(cap, np.int64)
        att = np.empty(cap, np.int64)
        found = np.empty(cap, np.int64)
        if config.is_double_spend:
            plan = config.strategy
            success = np.empty(cap, np.int64)
            capped = np.empty(cap, np.int64)
            n = kernels.double_spend_trial(
                p.q, plan.z, plan.A, p.tau0, max_cycles, sim_time, seed,
                dur, off, att, found, success, capped,
            )
            epoch = np.zeros(max(n, 0), np.int64)
            extra = (success, capped)
        else:
            spec = config.strategy
            epoch = np.empty(cap, np.int64)
            n = kernels.strategy_trial(
                _KIND_CODES[spec.kind], spec.A or 0, p.q, p.gamma, p.tau0,
                config.difficulty_adjustment, config.adjustment_window,
                max_cycles, sim_time, seed, dur, off, att, found, epoch,
            )
            extra = (None, None)
        if n != kernels.BUFFER_FULL:
            break
        cap *= 2
    s, c = extra
    # copy so the oversized buffers are released
    return (
        dur[:n].copy(), off[:n].astype(np.int32), att[:n].astype(np.int32),
        found[:n].astype(np.int32), epoch[:n].astype(np.int32),
        None if s is None else s[:n].astype(np.int8),
        None if c is None else c[:n].astype(np.int8),
    )


def simulate_cycles(config: SimulationConfig, workers: Optional[int] = None) -> CycleTable:
    """Run every trial of ``config`` and collect the per-cycle records."""
    seeds = trial_seeds(config.seed, config.trials)
    parts = _parallel_map(lambda s: _run_trial(config, s), seeds, workers)
    lengths = [len(part[0]) for part in parts]
    starts = np.concatenate([[0], np.cumsum(lengths)[:-1]]).astype(np.int64)

    def cat(i):
        if parts[0][i] is None:
            return None
        return np.concatenate([part[i] for part in parts])

    v = config.strategy.v if config.is_double_spend else 0.0
    return CycleTable(
        duration=cat(0), official=cat(1), attacker=cat(2), found=cat(3), epoch=cat(4),
        success=cat(5), capped=cat(6), trial_starts=starts, b=config.params.b, v=v,
    )


@dataclass(frozen=True)
class SimulationReport:
    """Estimates with standard errors; ``revenue_ratio_estimate`` is in coins per second."""

    seed: int
    trials: int
    strategy: str
    cycles_executed: int
    steady_state_cycles: int
    adjustment_epochs: int
    revenue_ratio_estimate: Estimate
    relative_revenue_ratio: Optional[Estimate]
    apparent_hashrate_estimate: Estimate
    delta_estimate: Optional[Estimate]
    mean_cycle_duration: Estimate
    success_frequency: Optional[Estimate] = None
    time_to_profitability: Optional[Estimate] = None
    profitable: Optional[bool] = None
    config: dict = field(default_factory=dict)
    schema_version: int = SCHEMA_VERSION

    def to_dict(self) -> dict[str, Any]:
        def est(e):
            return None if e is None else e.to_dict()

        return {
            "schema_version": self.schema_version,
            "seed": self.seed,
            "trials": self.trials,
            "strategy": self.strategy,
            "cycles_executed": self.cycles_executed,
            "steady_state_cycles": self.steady_state_cycles,
            "adjustment_epochs": self.adjustment_epochs,
            "revenue_ratio_estimate": est(self.revenue_ratio_estimate),
            "relative_revenue_ratio": est(self.relative_revenue_ratio),
            "apparent_hashrate_estimate": est(self.apparent_hashrate_estimate),
            "delta_estimate": est(self.delta_estimate),
            "mean_cycle_duration": est(self.mean_cycle_duration),
            "success_frequency": est(self.success_frequency),
            "time_to_profitability": est(self.time_to_profitability),
            "profitable": self.profitable,
            "config": self.config,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, allow_nan=True) + "\n"


def _strategy_label(strategy):
    if isinstance(strategy, DoubleSpendPlan):
        return f"ANakamotoDoubleSpend(z={strategy.z}, A={strategy.A})"
    return strategy.label()


def _report(config: SimulationConfig, table: CycleTable) -> SimulationReport:
    if len(table) < 1:
        raise ConfigError("horizon: too short for a single complete cycle")
    p = config.params
    if config.difficulty_adjustment:
        mask = table.epoch >= 1
        if not mask.any():
            mask = np.ones(len(table), dtype=bool)
    else:
        mask = np.ones(len(table), dtype=bool)
    dur = table.duration[mask]
    off = table.official[mask]
    att = table.attacker[mask]
    reward = table.attacker_reward()[mask]

    revenue = ratio_of_means(reward, dur)
    relative = None
    if p.q > 0:
        honest = p.q * p.b / p.tau0
        relative = Estimate(revenue.value / honest, revenue.se / honest)
    delta = None
    if not config.is_double_spend:
        delta = ratio_of_means(table.official, table.found)
    success = None
    if table.success is not None:
        success = ratio_of_means(table.success, np.ones(len(table)))

    ttp, profitable = None, None
    if config.ttp_grid_step is not None:
        ttp = _time_to_profitability(config, table)
        profitable = ttp is not None

    return SimulationReport(
        seed=config.seed,
        trials=config.trials,
        strategy=_strategy_label(config.strategy),
        cycles_executed=len(table),
        steady_state_cycles=int(mask.sum()),
        adjustment_epochs=int(table.epoch.max()) if len(table) else 0,
        revenue_ratio_estimate=revenue,
        relative_revenue_ratio=relative,
        apparent_hashrate_estimate=ratio_of_means(att, off),
        delta_estimate=delta,
        mean_cycle_duration=ratio_of_means(table.duration, np.ones(len(table))),
        success_frequency=success,
        time_to_profitability=ttp,
        profitable=profitable,
        config=config_to_dict(config),
    )


def run(config: SimulationConfig, workers: Optional[int] = None) -> SimulationReport:
    """Simulate ``config`` and summarize it. The report depends only on ``config``."""
    return _report(config, simulate_cycles(config, workers))


def _ttp_grid(config):
    step = config.ttp_grid_step
    k = int(config.sim_time // step)
    if k < 2:
        raise ConfigError("time_to_profitability.grid_step: grid needs at least two points")
    if config.trials < 2:
        raise ConfigError("trials: time to profitability needs at least two trials")
    return step * np.arange(1, k + 1)


def _revenue_lead(config, grid, duration, reward):
    # attacker revenue so far minus the honest counterfactual q b t / tau0
    p = config.params
    ends = np.cumsum(duration)
    cum = np.concatenate([[0.0], np.cumsum(reward)])
    idx = np.searchsorted(ends, grid, side="right")
    return cum[idx] - p.q * p.b * grid / p.tau0


def _crossing(grid, leads):
    # last upward zero crossing of the trial-averaged lead
    trials = leads.shape[0]
    mean = leads.mean(axis=0)
    se = leads.std(axis=0, ddof=1) / math.sqrt(trials)
    if not mean[-1] > 3.0 * se[-1]:
        return None
    below = np.nonzero(mean <= 0.0)[0]
    if below.size == 0:
        return Estimate(0.0, 0.0)
    j = int(below[-1])
    step = grid[1] - grid[0]
    frac = -mean[j] / (mean[j + 1] - mean[j])
    t_star = grid[j] + frac * step
    se_here = se[j] + frac * (se[j + 1] - se[j])
    w = max(1, int(round(WEEK / step)))
    lo, hi = max(0, j - w), min(len(grid) - 1, j + 1 + w)
    slope = (mean[hi] - mean[lo]) / (grid[hi] - grid[lo])
    t_se = se_here / slope if slope > 0 else math.inf
    return Estimate(float(t_star), float(t_se))


def _time_to_profitability(config, table):
    grid = _ttp_grid(config)
    reward = table.attacker_reward()
    leads = np.empty((config.trials, grid.shape[0]))
    for t in range(config.trials):
        sl = table.trial(t)
        leads[t] = _revenue_lead(config, grid, table.duration[sl], reward[sl])
    return _crossing(grid, leads)


def estimate_time_to_profitability(config: SimulationConfig, workers: Optional[int] = None) -> Optional[Estimate]:
    """Simulated time (s) after which a withholding miner has out-earned honest mining.

    Returns None, the not-profitable marker, unless the trial-averaged revenue
    lead at the horizon exceeds three standard errors.
    """
    if config.is_double_spend or config.strategy.kind is StrategyKind.HONEST:
        raise ConfigError("strategy: time to profitability needs a block-withholding strategy")
    if config.sim_time is None:
        raise ConfigError("horizon: time to profitability needs a 'sim_time' horizon")
    if config.ttp_grid_step is None:
        config = replace(config, ttp_grid_step=6 * 3600.0)
    grid = _ttp_grid(config)
    b = config.params.b

    def one(seed):
        dur, _, att, *_ = _run_trial(config, seed)
        return _revenue_lead(config, grid, dur, b * att.astype(np.float64))

    leads = np.array(_parallel_map(one, trial_seeds(config.seed, config.trials), workers))
    return _crossing(grid, leads)


@dataclass(frozen=True)
class RaceStatistics:
    sigma: Estimate
    attacker_blocks: Estimate
    honest_blocks: Estimate
    always_one_ahead: bool


def _chunks(total):
    sizes = [CHUNK] * (total // CHUNK)
    if total % CHUNK:
        sizes.append(total % CHUNK)
    return sizes


def poisson_race_statistics(
    alpha: float, alpha_prime: float, seed: int, trials: int, workers: Optional[int] = None
) -> RaceStatistics:
    """Estimate E[sigma], E[N'(sigma)], E[N(sigma)] for sigma = inf{t : N(t) = N'(t) + 1}."""
    if not (alpha > 0 and alpha_prime > 0):
        raise DomainError("rates must be positive")
    if alpha_prime >= alpha:
        raise DomainError("the race time is not integrable unless alpha' < alpha")
    if trials < 2:
        raise DomainError("trials must be at least 2")
    sizes = _chunks(trials)
    seeds = trial_seeds(seed, len(sizes))

    def one(args):
        count, s = args
        sigma = np.empty(count)
        na = np.empty(count, np.int64)
        nh = np.empty(count, np.int64)
        kernels.poisson_race_chunk(alpha, alpha_prime, count, s, sigma, na, nh)
        return sigma, na, nh

    parts = _parallel_map(one, list(zip(sizes, seeds)), workers)
    sigma = np.concatenate([x[0] for x in parts])
    na = np.concatenate([x[1] for x in parts])
    nh = np.concatenate([x[2] for x in parts])

    def mean(x):
        return Estimate(float(x.mean()), float(x.std(ddof=1) / math.sqrt(len(x))))

    return RaceStatistics(mean(sigma), mean(na), mean(nh), bool(np.all(nh - na == 1)))


@dataclass(frozen=True)
class UncappedDoubleSpend:
    """The race without abandonment, truncated at a deficit of ``lag_cap`` blocks."""

    z: int
    params: NetworkParams
    lag_cap: int = DEFAULT_LAG_CAP

    def __post_init__(self):
        if self.z < 1:
            raise DomainError("z must be a positive integer")
        if self.lag_cap <= self.z:
            raise DomainError("lag_cap must exceed z")


@dataclass(frozen=True)
class DoubleSpendEstimate:
    """``truncation_bound`` bounds the success probability lost to the lag cap."""

    success: Estimate
    truncation_bound: float
    capped_attempts: int


def estimate_double_spend_success(
    plan: Union[DoubleSpendPlan, UncappedDoubleSpend],
    seed: int,
    trials: int,
    workers: Optional[int] = None,
) -> DoubleSpendEstimate:
    """Fraction of premine-and-race attempts whose private chain overtakes the official one."""
    params = plan.params
    if not (0.0 < params.q < 0.5):
        raise DomainError("double-spend races need 0 < q < 1/2")
    if trials < 2:
        raise DomainError("trials must be at least 2")
    if isinstance(plan, UncappedDoubleSpend):
        limit = plan.lag_cap
        bound = params.lam ** limit
    else:
        limit = plan.A
        bound = 0.0
    sizes = _chunks(trials)
    seeds = trial_seeds(seed, len(sizes))

    def one(args):
        count, s = args
        bufs = [np.empty(count)] + [np.empty(count, np.int64) for _ in range(5)]
        kernels.double_spend_trial(params.q, plan.z, limit, params.tau0, count, 0.0, s, *bufs)
        return bufs[4], bufs[5]

    parts = _parallel_map(one, list(zip(sizes, seeds)), workers)
    success = np.concatenate([x[0] for x in parts]).astype(np.float64)
    capped = int(sum(int(x[1].sum()) for x in parts)) if isinstance(plan, UncappedDoubleSpend) else 0
    est = Estimate(float(success.mean()), float(success.std(ddof=1) / math.sqrt(trials)))
    return DoubleSpendEstimate(est, bound, capped)
