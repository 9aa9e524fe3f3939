import json
import math

import numpy as np
import pytest
from scipy import stats

from btcmining.errors import ConfigError, DomainError
from btcmining.mining_model import NetworkParams
from btcmining.nakamoto_profitability import (
    DoubleSpendPlan,
    a_nakamoto_revenue_ratio,
    a_nakamoto_success_probability,
)
from btcmining.simulator import (
    SimulationConfig,
    UncappedDoubleSpend,
    config_from_dict,
    config_from_json,
    config_to_dict,
    estimate_double_spend_success,
    estimate_time_to_profitability,
    poisson_race_statistics,
    ratio_of_means,
    run,
    simulate_cycles,
    trial_seeds,
)
from btcmining.strategies import (
    EQUAL_FORK_STUBBORN,
    HONEST,
    LEAD_STUBBORN,
    SELFISH,
    a_trailing,
    selfish_apparent_hashrate,
    strategy_revenue_ratio,
)

WEEK = 7 * 24 * 3600.0


def cfg(q=0.1, gamma=0.0, strategy=HONEST, **kw):
    kw.setdefault("cycles", 10_000)
    return SimulationConfig(params=NetworkParams(q=q, gamma=gamma), strategy=strategy, **kw)


def base_doc(**over):
    doc = {
        "params": {"q": 0.2, "gamma": 0.5},
        "strategy": {"kind": "SelfishMining"},
        "horizon": {"cycles": 1000},
        "seed": 7,
    }
    doc.update(over)
    return doc


def test_honest_revenue_matches_share():
    rep = run(cfg(q=0.1, cycles=1_000_000, seed=2), workers=1)
    target = 0.1 * 12.5 / 600
    assert rep.revenue_ratio_estimate.within(target)
    assert rep.relative_revenue_ratio.within(1.0)
    assert rep.apparent_hashrate_estimate.within(0.1)
    assert rep.delta_estimate.value == 1.0


def test_zero_hashrate_earns_nothing():
    rep = run(cfg(q=0.0, cycles=20_000, seed=3), workers=1)
    assert rep.revenue_ratio_estimate.value == 0.0
    assert rep.relative_revenue_ratio is None


def test_honest_block_times_are_exponential():
    table = simulate_cycles(cfg(q=0.2, cycles=200_000, seed=11), workers=1)
    res = stats.kstest(table.duration, "expon", args=(0.0, 600.0))
    assert res.pvalue > 1e-3
    assert np.all(table.official == 1)


def test_selfish_mining_with_adjustment_matches_closed_form():
    params = NetworkParams(q=0.3, gamma=0.5)
    rep = run(SimulationConfig(params, SELFISH, cycles=1_000_000, difficulty_adjustment=True, seed=1), workers=1)
    assert rep.adjustment_epochs >= 1
    assert rep.steady_state_cycles < rep.cycles_executed
    assert rep.apparent_hashrate_estimate.within(selfish_apparent_hashrate(params))
    exact = strategy_revenue_ratio(SELFISH, params).revenue_ratio_over_honest
    assert rep.relative_revenue_ratio.within(exact)


@pytest.mark.parametrize("spec", [LEAD_STUBBORN, EQUAL_FORK_STUBBORN, a_trailing(3)], ids=lambda s: s.label())
def test_stubborn_with_adjustment_matches_closed_form(spec):
    params = NetworkParams(q=0.25, gamma=0.6)
    rep = run(SimulationConfig(params, spec, cycles=300_000, difficulty_adjustment=True, seed=5), workers=1)
    exact = strategy_revenue_ratio(spec, params).revenue_ratio_over_honest
    assert rep.relative_revenue_ratio.within(exact)


def test_without_adjustment_withholding_does_not_pay():
    for spec in (SELFISH, LEAD_STUBBORN, EQUAL_FORK_STUBBORN, a_trailing(4)):
        rep = run(cfg(q=0.3, gamma=0.5, strategy=spec, cycles=200_000, seed=9), workers=1)
        r = rep.relative_revenue_ratio
        assert r.value <= 1.0 + 3 * r.se
        assert rep.adjustment_epochs == 0


def test_time_horizon_is_respected():
    config = cfg(q=0.2, gamma=0.5, strategy=SELFISH, cycles=None, sim_time=30 * 86400.0, trials=3, seed=4)
    table = simulate_cycles(config, workers=1)
    for k in range(3):
        assert table.duration[table.trial(k)].sum() <= 30 * 86400.0
    assert len(table.trial_starts) == 3


def test_same_seed_gives_identical_reports():
    config = cfg(q=0.3, gamma=0.5, strategy=SELFISH, cycles=20_000, trials=4, difficulty_adjustment=True, seed=42)
    a = run(config, workers=1).to_json()
    b = run(config, workers=1).to_json()
    c = run(config, workers=3).to_json()
    assert a == b == c
    other = run(cfg(q=0.3, gamma=0.5, strategy=SELFISH, cycles=20_000, trials=4, difficulty_adjustment=True, seed=43))
    assert other.to_json() != a


def test_double_spend_runs_are_deterministic():
    plan = DoubleSpendPlan(2, 4, 10.0, NetworkParams(q=0.2))
    config = SimulationConfig(plan.params, plan, cycles=5_000, trials=3, seed=8)
    assert run(config, workers=1).to_json() == run(config, workers=2).to_json()


def test_trial_seeds():
    s = trial_seeds(5, 10)
    assert s == trial_seeds(5, 10)
    assert len(set(s)) == 10
    assert trial_seeds(5, 3) == s[:3]


def test_ratio_of_means_standard_error():
    rng = np.random.default_rng(0)
    x = rng.exponential(2.0, 300_000)
    y = np.ones_like(x)
    est = ratio_of_means(x, y)
    assert est.value == pytest.approx(x.mean())
    assert est.se == pytest.approx(x.std() / math.sqrt(len(x)), rel=0.3)
    with pytest.raises(DomainError):
        ratio_of_means(np.ones(3), np.zeros(3))


def test_poisson_race():
    a, ap = 0.9 / 600, 0.1 / 600
    st = poisson_race_statistics(a, ap, seed=1, trials=200_000, workers=1)
    assert st.always_one_ahead
    assert st.sigma.within(1 / (a - ap))
    assert st.attacker_blocks.within(ap / (a - ap))
    assert st.honest_blocks.within(a / (a - ap))
    with pytest.raises(DomainError):
        poisson_race_statistics(ap, a, seed=1, trials=10)


@pytest.mark.parametrize("q, z, A", [(0.1, 1, 1), (0.2, 2, 4), (0.3, 3, 10)])
def test_double_spend_success_matches_closed_form(q, z, A):
    plan = DoubleSpendPlan(z, A, 0.0, NetworkParams(q=q))
    est = estimate_double_spend_success(plan, seed=6, trials=200_000, workers=1)
    assert est.success.within(a_nakamoto_success_probability(plan))
    assert est.capped_attempts == 0 and est.truncation_bound == 0.0


def test_double_spend_near_critical_hashrate():
    plan = UncappedDoubleSpend(2, NetworkParams(q=0.49), lag_cap=2000)
    est = estimate_double_spend_success(plan, seed=3, trials=20_000, workers=1)
    assert est.success.value > 0.9


def test_double_spend_revenue_ratio():
    plan = DoubleSpendPlan(2, 4, 25.0, NetworkParams(q=0.2))
    rep = run(SimulationConfig(plan.params, plan, cycles=400_000, seed=12), workers=1)
    assert rep.success_frequency.within(a_nakamoto_success_probability(plan))
    assert rep.revenue_ratio_estimate.within(a_nakamoto_revenue_ratio(plan))
    assert rep.delta_estimate is None


def test_time_to_profitability_markers():
    weeks = 12 * WEEK
    below = cfg(q=0.1, gamma=0.0, strategy=SELFISH, cycles=None, sim_time=weeks, trials=40,
                difficulty_adjustment=True, seed=1)
    assert estimate_time_to_profitability(below, workers=1) is None
    flat = cfg(q=0.1, gamma=0.9, strategy=SELFISH, cycles=None, sim_time=weeks, trials=40, seed=1)
    assert estimate_time_to_profitability(flat, workers=1) is None
    with pytest.raises(ConfigError):
        estimate_time_to_profitability(cfg(strategy=HONEST, cycles=None, sim_time=weeks, trials=4))
    with pytest.raises(ConfigError):
        estimate_time_to_profitability(cfg(strategy=SELFISH, cycles=100, trials=4))


def test_time_to_profitability_in_report():
    config = cfg(q=0.1, gamma=0.0, strategy=SELFISH, cycles=None, sim_time=4 * WEEK, trials=5,
                 difficulty_adjustment=True, ttp_grid_step=86400.0, seed=2)
    rep = run(config, workers=1)
    assert rep.profitable is False and rep.time_to_profitability is None


def test_config_round_trip():
    timed = config_from_dict(base_doc(horizon={"sim_time": 86400.0}, time_to_profitability={"grid_step": 3600}))
    assert timed.ttp_grid_step == 3600.0 and timed.cycles is None
    assert config_from_dict(config_to_dict(timed)) == timed
    plain = config_from_dict(base_doc())
    assert config_from_dict(config_to_dict(plain)) == plain
    plan_doc = base_doc(strategy={"kind": "ANakamotoDoubleSpend", "z": 2, "A": 5, "v": 3.0})
    plan = config_from_dict(plan_doc)
    assert plan.is_double_spend and config_from_dict(config_to_dict(plan)) == plan
    assert config_from_dict(base_doc(strategy={"kind": "ATrailing", "A": 3})).strategy == a_trailing(3)


@pytest.mark.parametrize(
    "doc, field",
    [
        (base_doc(extra=1), "extra"),
        (base_doc(params={"gamma": 0.5}), "params.q"),
        (base_doc(params={"q": "x"}), "params.q"),
        (base_doc(params={"q": 0.2, "gamma": 2.0}), "params"),
        (base_doc(strategy={"kind": "Greedy"}), "strategy.kind"),
        (base_doc(strategy={"kind": "ATrailing"}), "strategy"),
        (base_doc(horizon={"cycles": 10, "sim_time": 5.0}), "horizon"),
        (base_doc(horizon={"cycles": 0}), "horizon.cycles"),
        (base_doc(seed=-1), "seed"),
        (base_doc(trials=0), "trials"),
        (base_doc(schema_version=2), "schema_version"),
        (base_doc(difficulty_adjustment="yes"), "difficulty_adjustment"),
        (base_doc(params={"q": 0.6}), "params.q"),
        (base_doc(params={"q": 0.2}, strategy={"kind": "ANakamotoDoubleSpend", "z": 2, "A": 4},
                  difficulty_adjustment=True), "difficulty_adjustment"),
        (base_doc(time_to_profitability={"grid_step": 60}), "time_to_profitability"),
    ],
)
def test_config_errors_name_the_field(doc, field):
    with pytest.raises(ConfigError) as info:
        config_from_dict(doc)
    assert str(info.value).startswith(field)


def test_malformed_json_reports_position():
    text = '{\n  "params": {"q": 0.1,}\n}'
    with pytest.raises(ConfigError, match=r"line 2, column \d+"):
        config_from_json(text)
    assert config_from_json(json.dumps(base_doc())).seed == 7
