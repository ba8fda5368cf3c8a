import math
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from robustseq.censoring import (
    check_lfd_membership,
    clamp_ratio,
    f_value,
    g_value,
    least_favorable_densities,
    solve_thresholds,
)
from robustseq.dists import Cauchy, DiscretePair, Gaussian, GaussianLocationPair, GenericPair, make_pair

# Gaussian N(0,1) vs N(1,1) thresholds from an independent brentq solve of
# the threshold equations written directly with scipy.stats
GAUSS_ORACLE = {
    0.1: (0.5361444239849623, 1.8651690762115383, 1.0367725678658197),
    0.01: (0.20606516400536726, 4.852833834514374, 1.0075501732251466),
    0.001: (0.09895441529559587, 10.105663269423518, 1.0008919308066555),
}


def test_two_point_pair_exact(two_point_pair):
    # eps = 1/10, target 10/9:
    #   upper: 1/2 + (3/4)/c = 10/9  ->  c = 27/22
    #   lower: 3/4 + c/2     = 10/9  ->  c = 13/18
    cp = solve_thresholds(two_point_pair, 0.1)
    assert cp.eps == Fraction(1, 10)
    assert cp.c_hi == Fraction(27, 22)
    assert cp.c_lo == Fraction(13, 18)
    assert cp.expected_clamp_null == Fraction(193, 198)
    assert cp.denom == Fraction(203, 198)
    assert not cp.degenerate


def test_identical_pair_is_degenerate():
    pair = DiscretePair([0, 1], [Fraction(1, 2)] * 2, [Fraction(1, 2)] * 2)
    cp = solve_thresholds(pair, 0.1)
    assert cp.degenerate
    assert cp.c_hi == Fraction(9, 10) and cp.c_lo == Fraction(10, 9)
    assert math.isnan(cp.denom)
    gen = solve_thresholds(make_pair(Gaussian(0, 1), Gaussian(0, 1)), 0.01)
    assert gen.degenerate


@pytest.mark.parametrize("eps", sorted(GAUSS_ORACLE))
def test_gaussian_thresholds_match_oracle(eps, gauss_pair):
    c_lo, c_hi, denom = GAUSS_ORACLE[eps]
    cp = solve_thresholds(gauss_pair, eps)
    assert cp.c_lo == pytest.approx(c_lo, rel=1e-9)
    assert cp.c_hi == pytest.approx(c_hi, rel=1e-9)
    assert cp.denom == pytest.approx(denom, rel=1e-9)


def test_generic_pair_solves_like_closed_form(gauss_pair):
    gen = solve_thresholds(GenericPair(Gaussian(0, 1), Gaussian(1, 1)), 0.01)
    ref = solve_thresholds(gauss_pair, 0.01)
    assert gen.c_lo == pytest.approx(ref.c_lo, rel=1e-8)
    assert gen.c_hi == pytest.approx(ref.c_hi, rel=1e-8)


def test_upper_threshold_within_bound_example(gauss_pair):
    assert solve_thresholds(gauss_pair, 0.01).c_hi <= 99


def test_c_hi_eps_vanishes(gauss_pair):
    vals = [solve_thresholds(gauss_pair, e).c_hi * e for e in (1e-2, 1e-3, 1e-4)]
    assert vals[0] > vals[1] > vals[2]
    assert vals[2] < 0.2


def test_subprobability_null_rescales_thresholds():
    full = solve_thresholds(GaussianLocationPair(0, 1), 0.05)
    part = solve_thresholds(GaussianLocationPair(0, 1, null_mass=0.9), 0.05)
    assert part.k == 0.9
    assert 0.9 * part.c_hi == pytest.approx(full.c_hi, rel=1e-10)
    assert 0.9 * part.c_lo == pytest.approx(full.c_lo, rel=1e-10)


def test_input_validation(gauss_pair):
    with pytest.raises(ValueError):
        solve_thresholds(gauss_pair, 0.0)
    with pytest.raises(ValueError):
        solve_thresholds(gauss_pair, 1.0)
    with pytest.raises(ValueError):
        solve_thresholds(gauss_pair, 0.1, k=0.5)


eps_st = st.floats(1e-4, 0.3)
mu_st = st.floats(0.1, 4.0)


@given(mu_st, eps_st)
def test_residuals_and_bounds(mu1, eps):
    pair = GaussianLocationPair(0, mu1)
    cp = solve_thresholds(pair, eps)
    assert abs(f_value(pair, cp.c_hi) - 1 / (1 - eps)) <= 1e-9
    assert abs(g_value(pair, cp.c_lo) - 1 / (1 - eps)) <= 1e-9
    assert cp.c_hi <= 1 / eps - 1 + 1e-9
    assert cp.c_lo >= eps / (1 - eps) - 1e-9


@given(mu_st, st.floats(1e-4, 0.2), st.floats(1.05, 3.0))
def test_thresholds_monotone_in_eps(mu1, eps, factor):
    pair = GaussianLocationPair(0, mu1)
    small, big = solve_thresholds(pair, eps), solve_thresholds(pair, min(eps * factor, 0.45))
    assert big.c_hi <= small.c_hi * (1 + 1e-10)
    if not big.degenerate:
        assert big.c_lo >= small.c_lo * (1 - 1e-10)


@given(st.lists(st.integers(1, 50), min_size=3, max_size=7), st.lists(st.integers(1, 50), min_size=3, max_size=7),
       st.sampled_from([Fraction(1, 100), Fraction(1, 20), Fraction(1, 10)]))
def test_discrete_exact_residuals(w0, w1, eps):
    n = min(len(w0), len(w1))
    p0 = [Fraction(v, sum(w0[:n])) for v in w0[:n]]
    p1 = [Fraction(v, sum(w1[:n])) for v in w1[:n]]
    pair = DiscretePair(list(range(n)), p0, p1)
    cp = solve_thresholds(pair, eps)
    target = 1 / (1 - eps)
    if not cp.degenerate:
        assert f_value(pair, cp.c_hi) == target
        assert g_value(pair, cp.c_lo) == target
        tv0, tv1 = check_lfd_membership(cp)
        assert tv0 <= eps and tv1 <= eps


def test_least_favorable_densities_are_probabilities(two_point_pair):
    cp = solve_thresholds(two_point_pair, 0.1)
    q0, q1 = least_favorable_densities(cp)
    assert sum(q0) == 1 and sum(q1) == 1
    assert check_lfd_membership(cp) == (Fraction(1, 20), Fraction(3, 40))


def test_clamp_ratio_of_heavy_tailed_pair():
    pair = make_pair(Gaussian(0, 1), Cauchy(0, 1))
    cp = solve_thresholds(pair, 0.05)
    v = clamp_ratio(cp, [-50.0, 0.0, 50.0])
    assert v[0] == pytest.approx(cp.c_hi) and v[2] == pytest.approx(cp.c_hi)
    assert cp.c_lo <= v[1] <= cp.c_hi


def test_discrete_thresholds_monotone_and_limits():
    pair = DiscretePair([0, 1, 2, 3], [0.4, 0.3, 0.2, 0.1], [0.1, 0.2, 0.3, 0.4])
    ratios = [q / p for p, q in zip(pair.p0, pair.p1)]
    grid = [1e-4, 1e-3, 1e-2, 1e-1]
    sols = [solve_thresholds(pair, e) for e in grid]
    his = [float(s.c_hi) for s in sols]
    los = [float(s.c_lo) for s in sols]
    assert all(a >= b for a, b in zip(his, his[1:]))
    assert all(a <= b for a, b in zip(los, los[1:]))
    # the limits as eps -> 0 are the extreme ratio atoms
    tiny = solve_thresholds(pair, 1e-6)
    assert float(tiny.c_hi) == pytest.approx(max(ratios), rel=1e-4)
    assert float(tiny.c_lo) == pytest.approx(min(ratios), rel=1e-4)
    assert max(ratios) - his[0] > max(ratios) - float(tiny.c_hi) > 0
