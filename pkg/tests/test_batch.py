import math

import numpy as np
import pytest

from robustseq.adversary import DelayedAttackAdversary, WorstCaseAdaptiveAdversary
from robustseq.batch import (
    METHODS,
    ROBUST_METHODS,
    draw_streams,
    fixed_efactor,
    method_spec,
    run_batch,
    solve_gaussian_thresholds,
)
from robustseq.censoring import solve_thresholds
from robustseq.dists import Cauchy, Gaussian, GaussianLocationPair
from robustseq.plugin import MedianEstimator, NonzeroMean, OutsideInterval, PluginTest
from robustseq.ripr import CombinedTest, CompositeNullSpec, gaussian_location_family, nonrobust_ripr_factor

INTERVAL = (-0.5, 0.5)


def _scalar_process(name, eps, composite):
    """(prepare, factor) callables for the scalar reference of a method."""
    spec = CompositeNullSpec(gaussian_location_family(), *INTERVAL)
    if name in ("robust_simple", "robust_ripr"):
        ef = fixed_efactor(method_spec(name), eps)
        return (lambda: ef), lambda x: float(ef.evaluate(x))
    if name == "nonrobust_sprt":
        return (lambda: None), lambda x: math.exp(x - 0.5) if x < 709 else math.inf
    if name == "nonrobust_ripr":
        return (lambda: None), lambda x: nonrobust_ripr_factor(spec, 1.0, x)
    robust = name.startswith("robust")
    if name == "robust_combined" or (name == "nonrobust_plugin" and composite):
        t = CombinedTest(spec, MedianEstimator(OutsideInterval(*INTERVAL)), eps, robust=robust)
    else:
        t = PluginTest(Gaussian(0, 1), NonzeroMean(), eps, robust=robust)
    return t.prepare, lambda x: t.step(x)[0]


def _assert_same(batch_lw, ref):
    # scalar non-robust factors overflow to inf where the batch engine keeps
    # the exact log; after that point only the direction can be compared
    fin = np.isfinite(ref)
    assert np.allclose(batch_lw[fin], ref[fin], rtol=1e-9, atol=1e-9)
    assert np.all(batch_lw[~fin] > 700)


def _scalar_run(name, eps, z, U, h, mode, eps_real, composite=False, switch_n=math.inf):
    prepare, factor = _scalar_process(name, eps, composite)
    logw, out = 0.0, []
    delayed = DelayedAttackAdversary(Gaussian(0, 1), eps_real, switch_n, Cauchy(-1, 10))
    worst = WorstCaseAdaptiveAdversary(Gaussian(0, 1), eps_real)
    for i in range(len(z)):
        ef = prepare()
        if mode == "iid":
            x = h[i] if U[i] < eps_real else z[i]
        elif mode == "delayed":
            law = delayed.next_distribution([0.0] * i, {"log_wealth": logw})
            x = h[i] if (law.eps > 0 and U[i] < eps_real) else z[i]
        else:
            law = worst.next_distribution([0.0] * i, {"efactor": ef})
            attacked = law.eps > 0 and U[i] < eps_real
            x = law.contaminant.x0 if attacked else z[i]
        v = factor(x)
        logw = logw + (math.log(v) if v > 0 else -math.inf)
        out.append(logw)
    return np.array(out)


@pytest.fixture(scope="module")
def streams():
    return draw_streams(2024, 0, range(2), 300, 0.3)


@pytest.mark.parametrize("name", METHODS)
@pytest.mark.parametrize("mode", ["iid", "delayed"])
def test_batch_matches_scalar(name, mode, streams):
    z, U, h = streams
    composite = name in ("robust_ripr", "robust_combined", "nonrobust_ripr")
    spec = method_spec(name, composite_null=composite)
    res = run_batch(spec, 0.02, z, U, h, mode=mode, eps_real=0.05, switch_n=150)
    for r in range(z.shape[0]):
        ref = _scalar_run(name, 0.02, z[r], U[r], h[r], mode, 0.05, composite, switch_n=150)
        _assert_same(res.log_wealth[r], ref)


def test_composite_nonrobust_plugin_matches_scalar(streams):
    z, U, h = streams
    res = run_batch(method_spec("nonrobust_plugin", composite_null=True), 0.02, z, U, h, eps_real=0.05)
    ref = _scalar_run("nonrobust_plugin", 0.02, z[0], U[0], h[0], "iid", 0.05, composite=True)
    _assert_same(res.log_wealth[0], ref)


@pytest.mark.parametrize("name", ROBUST_METHODS)
def test_worst_case_mode_matches_scalar(name, streams):
    z, U, h = streams
    composite = name in ("robust_ripr", "robust_combined")
    res = run_batch(method_spec(name), 0.02, z, U, h, mode="worst_case", eps_real=0.02)
    ref = _scalar_run(name, 0.02, z[0], U[0], h[0], "worst_case", 0.02, composite)
    _assert_same(res.log_wealth[0], ref)


def test_worst_case_needs_robust_method(streams):
    with pytest.raises(ValueError):
        run_batch(method_spec("nonrobust_sprt"), 0.02, *streams, mode="worst_case", eps_real=0.02)


@pytest.mark.parametrize("d,eps", [(1.0, 0.01), (0.5, 0.1), (2.0, 0.001), (0.05, 0.2)])
def test_compiled_solver_matches_reference(d, eps):
    cp = solve_thresholds(GaussianLocationPair(0, d), eps)
    u_lo, u_hi, log_denom = solve_gaussian_thresholds(d, eps, 0.0, 0.0)
    if cp.degenerate:
        assert u_lo >= u_hi
        return
    assert u_lo == pytest.approx(math.log(cp.c_lo), abs=1e-10)
    assert u_hi == pytest.approx(math.log(cp.c_hi), abs=1e-10)
    assert log_denom == pytest.approx(math.log(cp.denom), abs=1e-10)
    warm = solve_gaussian_thresholds(d, eps, u_lo + 0.3, u_hi - 0.3)
    assert warm[0] == pytest.approx(u_lo, abs=1e-10) and warm[1] == pytest.approx(u_hi, abs=1e-10)


def test_streams_are_replication_addressable():
    z, U, h = draw_streams(5, 1, range(4), 50, 1.0)
    z2, U2, h2 = draw_streams(5, 1, [2], 50, 1.0)
    assert np.array_equal(z[2], z2[0]) and np.array_equal(h[2], h2[0])


def test_checksums_and_determinism(streams):
    z, U, h = streams
    a = run_batch(method_spec("robust_plugin"), 0.01, z, U, h, eps_real=0.01, checkpoints=[1, 10, 300])
    b = run_batch(method_spec("robust_simple"), 0.01, z, U, h, eps_real=0.01, checkpoints=[1, 10, 300])
    assert np.array_equal(a.checksum, b.checksum)
    again = run_batch(method_spec("robust_plugin"), 0.01, z, U, h, eps_real=0.01, checkpoints=[1, 10, 300])
    assert np.array_equal(a.log_wealth, again.log_wealth)
    assert a.log_wealth.shape == (2, 3)
    assert np.array_equal(a.final_log_wealth, a.log_wealth[:, -1])


def test_input_validation(streams):
    z, U, h = streams
    with pytest.raises(ValueError):
        run_batch(method_spec("robust_simple"), 0.01, z, U, h[:, :10])
    with pytest.raises(ValueError):
        run_batch(method_spec("robust_simple"), 0.01, z, U, h, mode="sideways")
    with pytest.raises(ValueError):
        run_batch(method_spec("robust_simple"), 0.01, z, U, h, checkpoints=[0])
    with pytest.raises(ValueError):
        method_spec("bogus")
    with pytest.raises(ValueError):
        method_spec("robust_ripr", mu1=0.2)


def test_delayed_switch_at_one_is_iid(streams):
    z, U, h = streams
    spec = method_spec("robust_plugin")
    a = run_batch(spec, 0.02, z, U, h, mode="delayed", eps_real=0.05, switch_n=1)
    b = run_batch(spec, 0.02, z, U, h, mode="iid", eps_real=0.05)
    assert np.array_equal(a.log_wealth, b.log_wealth)


def _mean_bound(logw, reps):
    w = np.exp(logw)
    return w.mean(axis=0), 1 + 3 * w.std(axis=0, ddof=1) / math.sqrt(reps)


SIMPLE_CASES = [(m, 0.0) for m in ("robust_simple", "robust_plugin")]
COMPOSITE_CASES = [(m, t) for m in ("robust_ripr", "robust_combined") for t in (-0.5, -0.25, 0.0, 0.25, 0.5)]


@pytest.mark.parametrize("name,theta0", SIMPLE_CASES + COMPOSITE_CASES)
@pytest.mark.parametrize("mode", ["iid", "worst_case", "delayed"])
def test_null_mean_wealth_and_ville(name, theta0, mode):
    reps, eps = 2000, 0.02
    z, U, h = draw_streams(31, int(100 * theta0) + 1000, range(reps), 1000, theta0)
    res = run_batch(method_spec(name), eps, z, U, h, mode=mode, eps_real=eps, switch_n=300,
                    checkpoints=[10, 100, 1000])
    mean, bound = _mean_bound(res.log_wealth, reps)
    assert np.all(mean <= bound)
    assert res.crossing_fraction() <= 0.05 + 3 * math.sqrt(0.05 * 0.95 / reps)
