"""Simulation configuration and its JSON document form."""

from __future__ import annotations

import json
import math
import numbers
from dataclasses import dataclass
from typing import Any, Optional, Union

from ..errors import ConfigError, DomainError
from ..mining_model import NetworkParams
from ..nakamoto_profitability import DoubleSpendPlan
from ..strategies import StrategyKind, StrategySpec

__all__ = [
    "SCHEMA_VERSION",
    "MAX_TOTAL_CYCLES",
    "SimulationConfig",
    "config_from_dict",
    "config_from_json",
    "config_to_dict",
]

SCHEMA_VERSION = 1
MAX_TOTAL_CYCLES = 500_000_000
MAX_SEED = 2**64 - 1
DOUBLE_SPEND_KIND = "ANakamotoDoubleSpend"


def _is_int(x):
    return isinstance(x, numbers.Integral) and not isinstance(x, bool)


@dataclass(frozen=True)
class SimulationConfig:
    """Exactly one of ``cycles`` and ``sim_time`` (seconds) bounds every trial.

    ``ttp_grid_step`` (seconds), when set, asks for the time-to-profitability
    estimate on a grid of that spacing.
    """

    params: NetworkParams
    strategy: Union[StrategySpec, DoubleSpendPlan]
    cycles: Optional[int] = None
    sim_time: Optional[float] = None
    difficulty_adjustment: bool = False
    adjustment_window: int = 2016
    seed: int = 0
    trials: int = 1
    ttp_grid_step: Optional[float] = None

    def __post_init__(self):
        if (self.cycles is None) == (self.sim_time is None):
            raise ConfigError("horizon: set exactly one of 'cycles' and 'sim_time'")
        if self.cycles is not None and not (_is_int(self.cycles) and self.cycles >= 1):
            raise ConfigError("horizon.cycles: must be a positive integer")
        if self.sim_time is not None and not (
            isinstance(self.sim_time, numbers.Real) and math.isfinite(self.sim_time) and self.sim_time > 0
        ):
            raise ConfigError("horizon.sim_time: must be a positive number of seconds")
        if not (_is_int(self.trials) and self.trials >= 1):
            raise ConfigError("trials: must be a positive integer")
        if not (_is_int(self.seed) and 0 <= self.seed <= MAX_SEED):
            raise ConfigError("seed: must be an unsigned 64-bit integer")
        if not (_is_int(self.adjustment_window) and self.adjustment_window >= 1):
            raise ConfigError("adjustment_window: must be a positive integer")
        if not isinstance(self.difficulty_adjustment, bool):
            raise ConfigError("difficulty_adjustment: must be true or false")
        if self.cycles is not None and self.cycles * self.trials > MAX_TOTAL_CYCLES:
            raise ConfigError(f"horizon.cycles: cycles x trials exceeds the limit {MAX_TOTAL_CYCLES}")
        if self.ttp_grid_step is not None:
            if not (isinstance(self.ttp_grid_step, numbers.Real) and self.ttp_grid_step > 0):
                raise ConfigError("time_to_profitability.grid_step: must be a positive number")
            if self.sim_time is None:
                raise ConfigError("time_to_profitability: needs a 'sim_time' horizon")
        strat = self.strategy
        if isinstance(strat, DoubleSpendPlan):
            if strat.params != self.params:
                raise ConfigError("strategy: double-spend plan must use the configured params")
            if self.difficulty_adjustment:
                raise ConfigError("difficulty_adjustment: not supported for double-spend runs")
            if not (0.0 < self.params.q < 0.5):
                raise ConfigError("params.q: double-spend runs need 0 < q < 1/2")
            if self.ttp_grid_step is not None:
                raise ConfigError("time_to_profitability: only for block-withholding strategies")
        elif isinstance(strat, StrategySpec):
            if strat.kind is not StrategyKind.HONEST and self.params.q >= 0.5:
                raise ConfigError("params.q: withholding strategies need q < 1/2 for cycles to end")
        else:
            raise ConfigError("strategy: unsupported strategy object")

    @property
    def is_double_spend(self) -> bool:
        return isinstance(self.strategy, DoubleSpendPlan)


def _require(doc, key, path):
    if not isinstance(doc, dict):
        raise ConfigError(f"{path}: expected an object")
    if key not in doc:
        raise ConfigError(f"{path}.{key}: missing required field" if path else f"{key}: missing required field")
    return doc[key]


def _number(value, field):
    if not isinstance(value, numbers.Real) or isinstance(value, bool):
        raise ConfigError(f"{field}: expected a number, got {value!r}")
    return float(value)


def _integer(value, field):
    if not _is_int(value):
        raise ConfigError(f"{field}: expected an integer, got {value!r}")
    return int(value)


_TOP_KEYS = {
    "schema_version", "params", "strategy", "horizon", "difficulty_adjustment",
    "adjustment_window", "seed", "trials", "time_to_profitability",
}


def config_from_dict(doc: dict[str, Any]) -> SimulationConfig:
    """Validate a decoded JSON document; errors name the offending field."""
    if not isinstance(doc, dict):
        raise ConfigError("document: expected a JSON object")
    unknown = sorted(set(doc) - _TOP_KEYS)
    if unknown:
        raise ConfigError(f"{unknown[0]}: unknown field")
    version = doc.get("schema_version", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        raise ConfigError(f"schema_version: unsupported version {version!r}")

    pdoc = _require(doc, "params", "")
    if not isinstance(pdoc, dict):
        raise ConfigError("params: expected an object")
    try:
        params = NetworkParams(
            q=_number(_require(pdoc, "q", "params"), "params.q"),
            gamma=_number(pdoc.get("gamma", 0.0), "params.gamma"),
            tau0=_number(pdoc.get("tau0", 600.0), "params.tau0"),
            b=_number(pdoc.get("b", 12.5), "params.b"),
        )
    except DomainError as exc:
        raise ConfigError(f"params: {exc}") from None

    sdoc = _require(doc, "strategy", "")
    kind = _require(sdoc, "kind", "strategy")
    try:
        if kind == DOUBLE_SPEND_KIND:
            strategy = DoubleSpendPlan(
                z=_integer(_require(sdoc, "z", "strategy"), "strategy.z"),
                A=_integer(_require(sdoc, "A", "strategy"), "strategy.A"),
                v=_number(sdoc.get("v", 0.0), "strategy.v"),
                params=params,
            )
        else:
            try:
                skind = StrategyKind(kind)
            except ValueError:
                raise ConfigError(f"strategy.kind: unknown strategy {kind!r}") from None
            a_val = sdoc.get("A")
            if a_val is not None:
                a_val = _integer(a_val, "strategy.A")
            strategy = StrategySpec(skind, a_val)
    except DomainError as exc:
        raise ConfigError(f"strategy: {exc}") from None

    hdoc = _require(doc, "horizon", "")
    if not isinstance(hdoc, dict) or len(hdoc) != 1 or not set(hdoc) <= {"cycles", "sim_time"}:
        raise ConfigError("horizon: expected exactly one of {'cycles': n} or {'sim_time': seconds}")
    cycles = _integer(hdoc["cycles"], "horizon.cycles") if "cycles" in hdoc else None
    sim_time = _number(hdoc["sim_time"], "horizon.sim_time") if "sim_time" in hdoc else None

    adjust = doc.get("difficulty_adjustment", False)
    if not isinstance(adjust, bool):
        raise ConfigError("difficulty_adjustment: expected true or false")
    ttp = doc.get("time_to_profitability")
    step = None
    if ttp is not None:
        if not isinstance(ttp, dict):
            raise ConfigError("time_to_profitability: expected an object")
        step = _number(ttp.get("grid_step", 21600.0), "time_to_profitability.grid_step")

    return SimulationConfig(
        params=params,
        strategy=strategy,
        cycles=cycles,
        sim_time=sim_time,
        difficulty_adjustment=adjust,
        adjustment_window=_integer(doc.get("adjustment_window", 2016), "adjustment_window"),
        seed=_integer(_require(doc, "seed", ""), "seed"),
        trials=_integer(doc.get("trials", 1), "trials"),
        ttp_grid_step=step,
    )


def config_from_json(text: str) -> SimulationConfig:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    return config_from_dict(doc)


def _strategy_to_dict(strategy):
    if isinstance(strategy, DoubleSpendPlan):
        return {"kind": DOUBLE_SPEND_KIND, "z": strategy.z, "A": strategy.A, "v": strategy.v}
    out = {"kind": strategy.kind.value}
    if strategy.A is not None:
        out["A"] = strategy.A
    return out


def config_to_dict(config: SimulationConfig) -> dict[str, Any]:
    p = config.params
    doc = {
        "schema_version": SCHEMA_VERSION,
        "params": {"q": p.q, "gamma": p.gamma, "tau0": p.tau0, "b": p.b},
        "strategy": _strategy_to_dict(config.strategy),
        "horizon": {"cycles": config.cycles} if config.cycles is not None else {"sim_time": config.sim_time},
        "difficulty_adjustment": config.difficulty_adjustment,
        "adjustment_window": config.adjustment_window,
        "seed": config.seed,
        "trials": config.trials,
    }
    if config.ttp_grid_step is not None:
        doc["time_to_profitability"] = {"grid_step": config.ttp_grid_step}
    return doc
