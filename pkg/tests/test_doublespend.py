import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from btcmining.doublespend import (
    ConfirmationQuery,
    confirmations_for_risk,
    double_spend_asymptotic,
    double_spend_probability,
    double_spend_probability_conditional,
    kappa_from_duration,
    nakamoto_catchup_probability,
)
from btcmining.errors import DomainError
from btcmining.mining_model import NetworkParams
from btcmining.simulator import UncappedDoubleSpend, estimate_double_spend_success
from oracles import mp_betainc

minority = st.floats(min_value=0.01, max_value=0.49)

# independent of the module: scipy/mpmath betainc at 40 digits, frozen
GOLDEN_Q01 = {1: 0.2, 2: 0.056, 3: 0.01712, 4: 0.005456, 5: 0.00178184, 6: 0.00059141216}


def P(q):
    return NetworkParams(q=q)


def test_catchup_examples():
    assert nakamoto_catchup_probability(0, P(0.3)) == 1.0
    assert nakamoto_catchup_probability(2, P(0.3)) == pytest.approx((3 / 7) ** 2, rel=1e-14)
    for n in (0, 1, 7, 100):
        assert nakamoto_catchup_probability(n, NetworkParams(q=0.5)) == 1.0


def test_catchup_matches_absorbing_walk():
    # gambler's ruin with a far absorbing barrier
    q, n, far = 0.3, 4, 400
    p = 1 - q
    m = np.eye(far + 1)
    rhs = np.zeros(far + 1)
    rhs[0] = 1.0
    for d in range(1, far):
        m[d, d - 1] -= q
        m[d, d + 1] -= p
    reach = np.linalg.solve(m, rhs)
    assert nakamoto_catchup_probability(n, P(q)) == pytest.approx(reach[n], rel=1e-12)


def test_catchup_domain():
    with pytest.raises(DomainError):
        nakamoto_catchup_probability(-1, P(0.1))
    with pytest.raises(DomainError):
        nakamoto_catchup_probability(2, NetworkParams(q=0.6))


@pytest.mark.parametrize("z, value", sorted(GOLDEN_Q01.items()))
def test_golden_values(z, value):
    assert double_spend_probability(z, P(0.1)) == pytest.approx(value, abs=1e-13)


def test_matches_high_precision_oracle():
    for q in (0.01, 0.1, 0.25, 0.4, 0.49):
        for z in (1, 2, 5, 20, 100, 1000):
            s = 4 * q * (1 - q)
            assert double_spend_probability(z, P(q)) == pytest.approx(mp_betainc(s, z, 0.5), abs=1e-12)


@settings(max_examples=200)
@given(minority)
def test_one_confirmation_is_twice_q(q):
    assert double_spend_probability(1, P(q)) == pytest.approx(2 * q, abs=1e-12)


def test_monotone_in_z_and_q():
    qs = np.linspace(0.01, 0.49, 25)
    for q in qs:
        vals = [double_spend_probability(z, P(q)) for z in range(1, 60)]
        assert all(b < a for a, b in zip(vals, vals[1:]))
    for z in (1, 3, 10, 50):
        vals = [double_spend_probability(z, P(q)) for q in qs]
        assert all(b > a for a, b in zip(vals, vals[1:]))


def test_domain_errors():
    for bad_q in (0.0, 0.5, 0.7):
        with pytest.raises(DomainError):
            double_spend_probability(3, NetworkParams(q=bad_q))
    with pytest.raises(DomainError):
        double_spend_probability(0, P(0.1))
    with pytest.raises(DomainError):
        double_spend_probability(2.5, P(0.1))


def test_asymptotic_examples():
    assert double_spend_asymptotic(1, P(0.25)) == pytest.approx(0.75 / math.sqrt(math.pi * 0.25), rel=1e-14)
    r100 = double_spend_probability(100, P(0.1)) / double_spend_asymptotic(100, P(0.1))
    assert abs(r100 - 1) <= 0.05
    e100 = abs(double_spend_probability(100, P(0.2)) / double_spend_asymptotic(100, P(0.2)) - 1)
    e400 = abs(double_spend_probability(400, P(0.2)) / double_spend_asymptotic(400, P(0.2)) - 1)
    assert e400 < e100


@pytest.mark.parametrize("q", [0.05, 0.1, 0.2, 0.3])
def test_asymptotic_error_halves_from_z_to_4z(q):
    s = 4 * q * (1 - q)
    for z in (10, 25, 50, 100, 200):
        if 4 * z * math.log(s) < -600:
            continue
        e1 = abs(double_spend_probability(z, P(q)) / double_spend_asymptotic(z, P(q)) - 1)
        e4 = abs(double_spend_probability(4 * z, P(q)) / double_spend_asymptotic(4 * z, P(q)) - 1)
        assert e4 <= 0.5 * e1


def test_conditional_limits_and_shape():
    params = P(0.1)
    lam = 1 / 9
    tiny = double_spend_probability_conditional(ConfirmationQuery(6, params, 1e-12))
    assert tiny == pytest.approx(lam**6, rel=1e-9)
    grid = np.linspace(0.05, 40.0, 400)
    vals = [double_spend_probability_conditional(ConfirmationQuery(6, params, float(k))) for k in grid]
    assert all(b >= a for a, b in zip(vals, vals[1:]))
    assert vals[-1] > 0.999
    assert all(0.0 <= v <= 1.0 for v in vals)


def test_conditional_monte_carlo_average_small():
    params = P(0.1)
    rng = np.random.default_rng(123)
    for z in (2, 6):
        kappas = rng.gamma(z, 1.0 / z, 40_000)
        vals = np.array([double_spend_probability_conditional(ConfirmationQuery(z, params, float(k))) for k in kappas])
        se = vals.std(ddof=1) / math.sqrt(len(vals))
        assert abs(vals.mean() - double_spend_probability(z, params)) <= 3 * se


def test_kappa_from_duration():
    params = P(0.1)
    # the mean honest time for z blocks maps to kappa = 1
    assert kappa_from_duration(6 * 600 / 0.9, 6, params) == pytest.approx(1.0)
    with pytest.raises(DomainError):
        kappa_from_duration(-1.0, 6, params)


def test_confirmation_query_validation():
    with pytest.raises(DomainError):
        ConfirmationQuery(0, P(0.1))
    with pytest.raises(DomainError):
        ConfirmationQuery(2, P(0.1), kappa=0.0)
    with pytest.raises(DomainError):
        double_spend_probability_conditional(ConfirmationQuery(2, P(0.1)))


def test_confirmations_for_risk():
    params = P(0.1)
    assert confirmations_for_risk(0.2, params) == 1
    assert confirmations_for_risk(0.5, params) == 1
    # minimal z meeting the target; 6 is the answer for a 0.1% target
    assert confirmations_for_risk(0.01, params) == 4
    assert confirmations_for_risk(0.001, params) == 6
    assert double_spend_probability(6, params) < 0.01


def test_confirmations_for_risk_scan_and_inversion():
    params = P(0.25)
    z = confirmations_for_risk(1e-6, params)
    assert double_spend_probability(z, params) <= 1e-6 < double_spend_probability(z - 1, params)
    scan = next(k for k in range(1, 1000) if double_spend_probability(k, params) <= 1e-6)
    assert z == scan
    approx = next(k for k in range(1, 1000) if double_spend_asymptotic(k, params) <= 1e-6)
    assert abs(approx - z) <= 2


def test_confirmations_for_risk_domain():
    with pytest.raises(DomainError):
        confirmations_for_risk(0.0, P(0.1))
    with pytest.raises(DomainError):
        confirmations_for_risk(1.5, P(0.1))


def test_three_confirmations_against_simulated_race():
    params = P(0.1)
    est = estimate_double_spend_success(UncappedDoubleSpend(3, params, lag_cap=300), seed=4, trials=400_000)
    assert est.truncation_bound < 1e-200
    assert abs(est.success.value - double_spend_probability(3, params)) <= 3 * est.success.se
