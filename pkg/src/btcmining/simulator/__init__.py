"""Event-driven Monte Carlo of competing Poisson miners."""

from .config import (
    SCHEMA_VERSION,
    SimulationConfig,
    config_from_dict,
    config_from_json,
    config_to_dict,
)
from .engine import (
    DEFAULT_LAG_CAP,
    CycleOutcome,
    CycleTable,
    DoubleSpendEstimate,
    Estimate,
    RaceStatistics,
    SimulationReport,
    UncappedDoubleSpend,
    estimate_double_spend_success,
    estimate_time_to_profitability,
    poisson_race_statistics,
    ratio_of_means,
    run,
    simulate_cycles,
    trial_seeds,
)

__all__ = [
    "SCHEMA_VERSION",
    "SimulationConfig",
    "config_from_dict",
    "config_from_json",
    "config_to_dict",
    "DEFAULT_LAG_CAP",
    "CycleOutcome",
    "CycleTable",
    "DoubleSpendEstimate",
    "Estimate",
    "RaceStatistics",
    "SimulationReport",
    "UncappedDoubleSpend",
    "estimate_double_spend_success",
    "estimate_time_to_profitability",
    "poisson_race_statistics",
    "ratio_of_means",
    "run",
    "simulate_cycles",
    "trial_seeds",
]
