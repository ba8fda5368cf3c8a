"""Acceptance gate: one test per criterion, each reporting a PASS/FAIL line."""

import functools
import math
import time
from fractions import Fraction

import numpy as np
import pytest
from scipy import stats

from conftest import record_criterion
from robustseq.batch import draw_streams, method_spec, run_batch
from robustseq.censoring import f_value, g_value, solve_thresholds
from robustseq.dists import (
    Cauchy,
    ContaminatedModel,
    Gaussian,
    GaussianLocationPair,
    GenericPair,
    make_rng,
)
from robustseq.evalues import make_simple_efactor
from robustseq.experiments import ExperimentConfig, SCENARIOS, expectation_checks, run_experiment, summarize_slopes
from robustseq.oracle import certify_efactor, exact_growth_rate, random_discrete_pair
from robustseq.ripr import CompositeNullSpec, gaussian_location_family, make_ripr_efactor
from robustseq.theory import asymptotic_sweep, growth_lower_bound, kl_censored_cp, optimality_gap_bound, theoretical_slope

SWEEP_EPS = (Fraction(1, 100), Fraction(1, 20), Fraction(1, 10))
SEED = 20240611


@functools.lru_cache(maxsize=1)
def discrete_sweep():
    """100 seeded random exact pairs, each solved at every sweep eps."""
    rng = make_rng(SEED, 1)
    pairs = [random_discrete_pair(rng, exact=True) for _ in range(100)]
    return [(pair, eps, solve_thresholds(pair, eps)) for pair in pairs for eps in SWEEP_EPS]


def test_criterion_1_discrete_certification(two_point_pair):
    t0 = time.perf_counter()
    worst, bad, degenerate = Fraction(0), 0, 0
    for pair, eps, cp in discrete_sweep():
        if cp.degenerate:
            # the factor is the constant 1, whose mean is 1 under every law
            degenerate += 1
            worst = max(worst, Fraction(1))
            continue
        rep = certify_efactor(pair, eps)
        worst = max(worst, rep.max_mean)
        bad += rep.max_mean > 1 + 1e-9
    two = certify_efactor(two_point_pair, Fraction(1, 10))
    exact_ok = two.c_hi == Fraction(27, 22) and two.c_lo == Fraction(13, 18) and two.max_mean == 1
    elapsed = time.perf_counter() - t0
    passed = bad == 0 and exact_ok and elapsed < 10
    record_criterion(1, passed, f"max worst-case mean {float(worst)!r} over 300 instances ({degenerate} degenerate), "
                                f"two-point exact {exact_ok}, {elapsed:.2f}s")
    assert passed


def test_criterion_2_threshold_residuals():
    t0 = time.perf_counter()
    cases = []
    for mu1 in (0.1, 0.5, 1.0, 2.0, 4.0):
        for k in (1.0, 0.9):
            cases += [GaussianLocationPair(0, mu1, null_mass=k)]
    cases += [GenericPair(Gaussian(0, 1), Cauchy(0, 1)), GenericPair(Gaussian(0, 1), Gaussian(1, 2))]
    rng = make_rng(SEED, 2)
    cases += [random_discrete_pair(rng) for _ in range(30)]
    cases += [pair for pair, eps, _ in discrete_sweep()[:60:3]]
    worst_res, bound_bad, solved = 0.0, 0, 0
    for pair in cases:
        for eps in (1e-4, 1e-3, 1e-2, 0.05, 0.1, 0.3):
            cp = solve_thresholds(pair, eps)
            k, e = float(cp.k), float(cp.eps)
            if not cp.degenerate:
                solved += 1
                worst_res = max(worst_res,
                                abs(float(f_value(pair, cp.c_hi)) - k / (1 - e)),
                                abs(float(g_value(pair, cp.c_lo)) - 1 / (1 - e)))
            bound_bad += k * float(cp.c_hi) > 1 / e - 1 + 1e-9 or k * float(cp.c_lo) < e / (1 - e) - 1e-9
    elapsed = time.perf_counter() - t0
    passed = worst_res <= 1e-9 and bound_bad == 0 and elapsed < 5
    record_criterion(2, passed, f"max residual {worst_res:.2e} over {solved} solves, {bound_bad} bound violations, "
                                f"{elapsed:.2f}s")
    assert passed


BOUND_3 = 0.05 + 3 * math.sqrt(0.05 * 0.95 / 2000)


def _validity_runs():
    """(method, theta0) pairs: simple methods at N(0,1), composite ones on a null grid."""
    runs = [(m, 0.0) for m in ("robust_simple", "robust_plugin")]
    runs += [(m, t) for m in ("robust_ripr", "robust_combined") for t in (-0.5, 0.0, 0.5)]
    return runs


@pytest.mark.slow
def test_criterion_3_type_one_validity():
    t0 = time.perf_counter()
    reps, horizon, eps, block = 2000, 10_000, 0.01, 250
    worst = (0.0, "")
    lines = []
    by_theta = {}
    for method, theta0 in _validity_runs():
        by_theta.setdefault(theta0, []).append(method)
    for j, (theta0, methods) in enumerate(sorted(by_theta.items())):
        crossed = {(m, a): 0 for m in methods for a in ("iid", "worst_case", "delayed")}
        for start in range(0, reps, block):
            z, U, h = draw_streams(SEED, 300 + j, range(start, start + block), horizon, theta0)
            for m in methods:
                for mode in ("iid", "worst_case", "delayed"):
                    res = run_batch(method_spec(m), eps, z, U, h, mode=mode, eps_real=eps,
                                    switch_n=horizon // 2, checkpoints=[horizon])
                    crossed[(m, mode)] += int(np.sum(res.stopped_at > 0))
        for (m, mode), c in crossed.items():
            frac = c / reps
            lines.append(f"{m}/{mode}/theta0={theta0:g}: {frac:.4f}")
            if frac >= worst[0]:
                worst = (frac, f"{m}/{mode}/theta0={theta0:g}")
    elapsed = time.perf_counter() - t0
    passed = worst[0] <= BOUND_3
    for line in lines:
        print("   ", line)
    record_criterion(3, passed, f"max crossing fraction {worst[0]:.4f} ({worst[1]}) <= {BOUND_3:.4f} "
                                f"over {len(lines)} method/adversary cells, {elapsed:.1f}s")
    assert passed


def _slopes(method, eps, horizon, reps, key):
    z, U, h = draw_streams(SEED, key, range(reps), horizon, 1.0)
    res = run_batch(method_spec(method), eps, z, U, h, eps_real=eps, checkpoints=[horizon])
    return res.final_log_wealth / horizon


def test_criterion_4_growth_rate_agreement():
    t0 = time.perf_counter()
    pair = GaussianLocationPair(0, 1)
    parts, passed = [], True
    for j, eps in enumerate((0.1, 0.01)):
        s = _slopes("robust_simple", eps, 100_000, 10, 400 + j)
        mc, se = s.mean(), s.std(ddof=1) / math.sqrt(len(s))
        theo = theoretical_slope(make_simple_efactor(pair, eps), ContaminatedModel(Gaussian(1, 1), Cauchy(-1, 10), eps))
        ok = abs(mc - theo) <= 3 * se
        passed &= ok
        parts.append(f"eps={eps:g}: MC {mc:.5f} vs theory {theo:.5f} ({abs(mc - theo) / se:.2f} SE)")
    tiny = theoretical_slope(make_simple_efactor(pair, 1e-4),
                             ContaminatedModel(Gaussian(1, 1), Cauchy(-1, 10), 1e-4))
    ok = abs(tiny - 0.5) <= 0.01
    passed &= ok
    parts.append(f"theory at 1e-4 {tiny:.5f} vs 0.5")
    record_criterion(4, passed, "; ".join(parts) + f", {time.perf_counter() - t0:.1f}s")
    assert passed


def test_criterion_5_plugin_matches_oracle():
    t0 = time.perf_counter()
    plug = _slopes("robust_plugin", 0.01, 20_000, 10, 500)
    oracle = _slopes("robust_simple", 0.01, 20_000, 10, 500)
    gap = abs(plug.mean() - oracle.mean())
    passed = gap <= 0.01
    record_criterion(5, passed, f"plug-in {plug.mean():.5f} vs oracle {oracle.mean():.5f}, gap {gap:.5f} <= 0.01, "
                                f"{time.perf_counter() - t0:.1f}s")
    assert passed


def test_criterion_6_ripr_asymptotics():
    t0 = time.perf_counter()
    rows = asymptotic_sweep("ripr", [1e-1, 1e-2, 1e-3, 1e-4], mu1=1.0, null_interval=(-0.5, 0.5))
    slopes = [r["r_theoretical"] for r in rows]
    increasing = all(a < b for a, b in zip(slopes, slopes[1:])) and slopes[-1] < 0.125
    close = abs(slopes[-1] - 0.125) <= 0.005
    ef = make_ripr_efactor(CompositeNullSpec(gaussian_location_family(), -0.5, 0.5), 1.0, 1e-6)
    xs = np.arange(-2, 3)
    star = np.exp(stats.norm.logpdf(xs, 1.0) - stats.norm.logpdf(xs, 0.5))
    rel = float(np.max(np.abs(ef.evaluate(xs) - star) / star))
    passed = increasing and close and rel < 1e-3
    record_criterion(6, passed, f"slopes {[round(s, 5) for s in slopes]} -> 0.125, max rel err {rel:.2e} at 1e-6, "
                                f"{time.perf_counter() - t0:.2f}s")
    assert passed


def test_criterion_7_qualitative_figures():
    t0 = time.perf_counter()
    failed, total = [], 0
    for scenario in SCENARIOS:
        cfg = ExperimentConfig(scenario=scenario, horizon=10_000, replications=10, seed=SEED)
        table = run_experiment(cfg)
        for desc, ok in expectation_checks(cfg, table, summarize_slopes(table)):
            total += 1
            print(f"    {scenario}: {'ok  ' if ok else 'FAIL'} {desc}")
            if not ok:
                failed.append(f"{scenario}: {desc}")
    elapsed = time.perf_counter() - t0
    passed = not failed and elapsed < 600
    record_criterion(7, passed, f"{total - len(failed)}/{total} qualitative checks across {len(SCENARIOS)} scenarios, "
                                f"{elapsed:.1f}s" + ("" if not failed else f"; failed: {failed}"))
    assert passed


def test_criterion_8_bound_chain():
    t0 = time.perf_counter()
    checked, bad, min_gap = 0, 0, math.inf
    for pair, eps, cp in discrete_sweep():
        if cp.degenerate:
            continue
        kl = kl_censored_cp(cp)
        rate = exact_growth_rate(pair, eps, pair.p1)
        b2 = growth_lower_bound(cp, kl)
        b3 = optimality_gap_bound(kl, eps)
        chain = rate >= b2 and (not math.isfinite(b3) or b2 >= b3)
        bad += not chain
        min_gap = min(min_gap, rate - b2)
        checked += 1
    elapsed = time.perf_counter() - t0
    passed = bad == 0 and elapsed < 10
    record_criterion(8, passed, f"{checked} instances, {bad} chain violations, min(rate - bound) {min_gap:.3e}, "
                                f"{elapsed:.2f}s")
    assert passed
