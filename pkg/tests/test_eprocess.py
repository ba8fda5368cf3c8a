import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from robustseq.dists import make_rng
from robustseq.eprocess import EProcess, anytime_p_value, growth_slope, run_eprocess

factors = st.lists(st.floats(0.0, 5.0), min_size=1, max_size=60)


def test_wealth_is_running_product():
    st_ = run_eprocess([2.0, 0.5, 4.0])
    assert st_.n == 3
    assert st_.wealth == pytest.approx(4.0)
    assert st_.running_max_log_wealth == pytest.approx(math.log(4.0))


def test_stops_at_first_crossing_and_keeps_monitoring():
    st_ = run_eprocess([10.0, 2.0, 0.01, 100.0], alpha=0.05)
    assert st_.stopped_at == 2
    assert st_.n == 4 and st_.stopped


def test_zero_factor_absorbs():
    st_ = run_eprocess([3.0, 0.0, 50.0])
    assert st_.log_wealth == -math.inf
    assert st_.p_value() == pytest.approx(1 / 3)


def test_negative_factor_rejected():
    with pytest.raises(ValueError):
        EProcess().update(-0.1)
    with pytest.raises(ValueError):
        EProcess(alpha=1.5)


def test_checkpoints_at_powers_of_two():
    st_ = run_eprocess([1.1] * 20)
    assert [n for n, _ in st_.checkpoints()] == [0, 1, 2, 4, 8, 16, 20]
    full = run_eprocess([1.1] * 5, keep_trace=True)
    assert [n for n, _ in full.trace] == [0, 1, 2, 3, 4, 5]


def test_growth_slope():
    assert growth_slope(run_eprocess([math.e] * 10)) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        growth_slope(run_eprocess([2.0]))


@given(factors)
def test_p_value_is_monotone_and_in_unit_interval(fs):
    st_ = EProcess()
    prev = 1.0
    for f in fs:
        st_.update(f)
        p = anytime_p_value(st_)
        assert 0 <= p <= 1
        assert p <= prev
        prev = p


@given(factors, st.floats(0.01, 0.5))
def test_stopping_matches_p_value(fs, alpha):
    st_ = run_eprocess(fs, alpha=alpha)
    margin = abs(st_.running_max_log_wealth + math.log(alpha))
    if margin > 1e-12:
        assert st_.stopped == (st_.p_value() <= alpha)


def test_ville_bound_for_fair_bets():
    # factors 2 * Bernoulli(1/2) have mean one; crossing 1/alpha happens w.p. <= alpha
    rng = make_rng(11)
    alpha, reps, horizon = 0.1, 4000, 200
    bits = rng.random((reps, horizon)) < 0.5
    logw = np.cumsum(np.where(bits, math.log(2.0), -np.inf), axis=1)
    crossed = np.mean(np.max(logw, axis=1) >= -math.log(alpha))
    assert crossed <= alpha + 3 * math.sqrt(alpha * (1 - alpha) / reps)
