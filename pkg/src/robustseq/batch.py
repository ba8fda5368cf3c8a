"""Compiled trajectory engine for Gaussian-location experiments.

The scalar classes (``EFactor``, ``PluginTest``, ``CombinedTest`` and the
adversaries) are the reference implementation. This module runs the same
processes for many replications and long horizons inside one numba
kernel, for unit-variance Gaussian models only:

* fixed factors (simple null, or RIPr against a fixed alternative) take
  thresholds and denominators from the scalar solver;
* plug-in and combined factors re-solve thresholds every step with a
  safeguarded Newton iteration in ``u = log c`` (warm-started from the
  previous step, bisection whenever Newton leaves the bracket), using
  ``df/du = -P1[r >= c] / c`` and ``dg/du = c * P0[r <= c]``;
* the composite-null supremum of ``E_theta[clamp]`` is taken at the
  interval endpoint nearest the alternative, where it is attained because
  the clamp is monotone in ``x`` and the family is stochastically ordered
  (``ripr.sup_expected_clamp`` confirms this numerically).

Data enter as three pre-drawn arrays per replication: base draws ``z``
from the null member (or alternative), uniforms ``U`` and contaminant
draws ``h``. The adversary mode decides how they combine:

* ``iid``: ``x = h if U < eps_real else z``
* ``worst_case``: ``x = x_plus(state) if U < eps_real else z``
* ``delayed``: like ``iid`` once the attack is on, ``z`` before.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numba as nb
import numpy as np

from .dists import GaussianLocationPair, make_rng
from .evalues import EFactor, make_simple_efactor
from .ripr import CompositeNullSpec, gaussian_location_family, make_ripr_efactor

MODES = {"iid": 0, "worst_case": 1, "delayed": 2}
KIND_FIXED, KIND_PLUGIN, KIND_COMBINED = 0, 1, 2
CLASS_NONZERO, CLASS_OUTSIDE = 0, 1
_SQRT1_2 = 1.0 / math.sqrt(2.0)
_NEWTON_TOL = 1e-13


@nb.njit(cache=True)
def _ndtr(x):
    return 0.5 * math.erfc(-x * _SQRT1_2)


@nb.njit(cache=True)
def _eval_eq(which, u, d, target):
    """Increasing-oriented residual and derivative of the threshold equations (k = 1)."""
    c = math.exp(u)
    t = (u + 0.5 * d * d) / d
    below = _ndtr(t)
    above = _ndtr(d - t)
    if which == 0:
        # f is decreasing; return target - f
        return target - (below + above / c), above / c
    return above + c * below - target, c * below


@nb.njit(cache=True)
def _solve_root(which, d, target, u0, lo, hi):
    width = hi - lo
    g_lo, _ = _eval_eq(which, lo, d, target)
    n = 0
    while g_lo > 0.0 and n < 200:
        lo -= width
        width *= 2.0
        g_lo, _ = _eval_eq(which, lo, d, target)
        n += 1
    width = hi - lo
    g_hi, _ = _eval_eq(which, hi, d, target)
    while g_hi < 0.0 and n < 400:
        hi += width
        width *= 2.0
        g_hi, _ = _eval_eq(which, hi, d, target)
        n += 1
    u = u0 if (lo < u0 < hi) else 0.5 * (lo + hi)
    for _ in range(200):
        g, dg = _eval_eq(which, u, d, target)
        if g == 0.0:
            return u
        if g < 0.0:
            lo = u
        else:
            hi = u
        un = u - g / dg if dg > 0.0 else 0.5 * (lo + hi)
        if not (lo < un < hi):
            un = 0.5 * (lo + hi)
        if abs(un - u) < _NEWTON_TOL or hi - lo < _NEWTON_TOL:
            return un
        u = un
    return u


@nb.njit(cache=True)
def solve_gaussian_thresholds(d, eps, u_lo0, u_hi0):
    """``(log c_lo, log c_hi, log denom)`` for ``N(0,1)`` vs ``N(d,1)``, ``d > 0``.

    ``log denom`` is NaN when the thresholds cross.
    """
    lo = math.log(eps / (2.0 * (1.0 - eps)))
    hi = math.log(2.0 * (1.0 / eps - 1.0))
    u_hi = _solve_root(0, d, 1.0 / (1.0 - eps), u_hi0, lo, hi)
    u_lo = _solve_root(1, d, 1.0 / (1.0 - eps), u_lo0, lo, hi)
    if u_lo >= u_hi:
        return u_lo, u_hi, math.nan
    c_lo = math.exp(u_lo)
    c_hi = math.exp(u_hi)
    t_lo = (u_lo + 0.5 * d * d) / d
    t_hi = (u_hi + 0.5 * d * d) / d
    ec = c_lo * _ndtr(t_lo) + (_ndtr(t_hi - d) - _ndtr(t_lo - d)) + c_hi * _ndtr(-t_hi)
    return u_lo, u_hi, math.log(ec + (c_hi - c_lo) * eps)


@nb.njit(cache=True)
def _heap_push(h, size, v):
    i = size
    h[i] = v
    while i > 0:
        p = (i - 1) // 2
        if h[p] <= h[i]:
            break
        h[p], h[i] = h[i], h[p]
        i = p
    return size + 1


@nb.njit(cache=True)
def _heap_pop(h, size):
    top = h[0]
    size -= 1
    h[0] = h[size]
    i = 0
    while True:
        l = 2 * i + 1
        if l >= size:
            break
        m = l
        if l + 1 < size and h[l + 1] < h[l]:
            m = l + 1
        if h[i] <= h[m]:
            break
        h[i], h[m] = h[m], h[i]
        i = m
    return top, size


@nb.njit(cache=True)
def _run_kernel(kind, robust, mu0, mu1, null_a, null_b, class_kind, class_a, class_b,
                fixed_u_lo, fixed_u_hi, fixed_log_denom, fixed_degenerate, fixed_xplus,
                eps, z, U, h, mode, eps_real, switch_n, ck_idx, log_threshold,
                out_ck, out_stop, out_final, out_max, out_checksum):
    R, N = z.shape
    low = np.empty(N)
    high = np.empty(N)
    for r in range(R):
        n_low = 0
        n_high = 0
        logw = 0.0
        maxw = 0.0
        stop = 0
        active = False
        checksum = 0.0
        j = 0
        u_lo_prev = 0.0
        u_hi_prev = 0.0
        for i in range(N):
            n = i + 1
            # --- factor for step n from data before n
            have = True
            center = mu0
            alt = mu1
            if kind == KIND_FIXED:
                u_lo, u_hi, log_denom = fixed_u_lo, fixed_u_hi, fixed_log_denom
                degenerate = fixed_degenerate
            else:
                if n_low == 0:
                    have = False
                    med = 0.0
                elif n_low > n_high:
                    med = -low[0]
                else:
                    med = 0.5 * (-low[0] + high[0])
                if class_kind == CLASS_NONZERO:
                    alt = mu0 + 1e-8 if med == mu0 else med
                else:
                    alt = med
                    if class_a < med < class_b:
                        alt = class_a if med - class_a < class_b - med else class_b
                if kind == KIND_COMBINED:
                    if null_a <= alt <= null_b:
                        have = False
                    center = min(max(alt, null_a), null_b)
                elif alt == center:
                    have = False
                degenerate = True
                u_lo = 0.0
                u_hi = 0.0
                log_denom = 0.0
                if have and robust:
                    dd = abs(alt - center)
                    u_lo, u_hi, log_denom = solve_gaussian_thresholds(dd, eps, u_lo_prev, u_hi_prev)
                    u_lo_prev = u_lo
                    u_hi_prev = u_hi
                    degenerate = u_lo >= u_hi
            d = abs(alt - center)
            sgn = 1.0 if alt > center else -1.0
            # --- observation
            attack = U[r, i] < eps_real
            if mode == 0:
                x = h[r, i] if attack else z[r, i]
            elif mode == 1:
                x = z[r, i]
                if attack and have and robust and not degenerate:
                    if kind == KIND_FIXED:
                        x = fixed_xplus
                    else:
                        t_hi = (u_hi + 0.5 * d * d) / d
                        x = center + sgn * (t_hi + 1.0)
            else:
                if not active:
                    active = logw > 0.0 or n >= switch_n
                x = h[r, i] if (active and attack) else z[r, i]
            checksum += x * ((i % 97) + 1)
            # --- factor value
            if have:
                lr = d * sgn * (x - center) - 0.5 * d * d
                if robust:
                    if not degenerate:
                        logw += min(max(lr, u_lo), u_hi) - log_denom
                else:
                    logw += lr
            if logw > maxw:
                maxw = logw
            if stop == 0 and logw >= log_threshold:
                stop = n
            # --- estimator absorbs x
            if kind != KIND_FIXED:
                if n_low > 0 and x > -low[0]:
                    n_high = _heap_push(high, n_high, x)
                else:
                    n_low = _heap_push(low, n_low, -x)
                if n_low > n_high + 1:
                    v, n_low = _heap_pop(low, n_low)
                    n_high = _heap_push(high, n_high, -v)
                elif n_high > n_low:
                    v, n_high = _heap_pop(high, n_high)
                    n_low = _heap_push(low, n_low, -v)
            while j < ck_idx.shape[0] and ck_idx[j] == n:
                out_ck[r, j] = logw
                j += 1
        out_stop[r] = stop
        out_final[r] = logw
        out_max[r] = maxw
        out_checksum[r] = checksum


# ---------------------------------------------------------------------------
# Python-side wrappers
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MethodSpec:
    """One test process in compiled form.

    ``kind`` is fixed / plugin / combined; ``mu0`` is the simple null mean
    (fixed and plugin), ``mu1`` the known alternative (fixed kinds) and
    ``null_interval`` the composite null (combined kind and RIPr).
    """

    name: str
    kind: int
    robust: bool
    mu0: float = 0.0
    mu1: float = 1.0
    null_interval: tuple = (0.0, 0.0)
    class_kind: int = CLASS_NONZERO
    class_bounds: tuple = (0.0, 0.0)


ROBUST_METHODS = ("robust_simple", "robust_plugin", "robust_ripr", "robust_combined")
NONROBUST_METHODS = ("nonrobust_sprt", "nonrobust_plugin", "nonrobust_ripr")
METHODS = ROBUST_METHODS + NONROBUST_METHODS


def method_spec(name: str, *, mu1: float = 1.0, null_mu: float = 0.0, null_interval=(-0.5, 0.5),
                composite_null: bool = False) -> MethodSpec:
    """Build the compiled description of a named method.

    ``composite_null`` switches ``nonrobust_plugin`` to the plug-in RIPr
    ratio against the null interval.
    """
    a, b = null_interval
    if name == "robust_simple":
        return MethodSpec(name, KIND_FIXED, True, mu0=null_mu, mu1=mu1)
    if name == "nonrobust_sprt":
        return MethodSpec(name, KIND_FIXED, False, mu0=null_mu, mu1=mu1)
    if name in ("robust_ripr", "nonrobust_ripr"):
        if a <= mu1 <= b:
            raise ValueError("alternative mean lies in the null interval")
        return MethodSpec(name, KIND_FIXED, name.startswith("robust"), mu0=min(max(mu1, a), b),
                          mu1=mu1, null_interval=(a, b))
    if name == "robust_plugin" or (name == "nonrobust_plugin" and not composite_null):
        return MethodSpec(name, KIND_PLUGIN, name.startswith("robust"), mu0=null_mu)
    if name == "robust_combined" or name == "nonrobust_plugin":
        return MethodSpec(name, KIND_COMBINED, name.startswith("robust"), null_interval=(a, b),
                          class_kind=CLASS_OUTSIDE, class_bounds=(a, b))
    raise ValueError(f"unknown method {name!r}; choose from {', '.join(METHODS)}")


def fixed_efactor(spec: MethodSpec, eps: float) -> EFactor:
    """Scalar reference factor behind a fixed-kind method."""
    if spec.name == "robust_ripr":
        ns = CompositeNullSpec(gaussian_location_family(), *spec.null_interval)
        return make_ripr_efactor(ns, spec.mu1, eps)
    return make_simple_efactor(GaussianLocationPair(spec.mu0, spec.mu1), eps)


@dataclass
class BatchResult:
    checkpoints: np.ndarray
    log_wealth: np.ndarray      # replications x checkpoints
    stopped_at: np.ndarray      # 0 when never crossed
    final_log_wealth: np.ndarray
    max_log_wealth: np.ndarray
    checksum: np.ndarray

    def crossing_fraction(self) -> float:
        return float(np.mean(self.stopped_at > 0))


def run_batch(spec: MethodSpec, eps: float, z, U, h, *, mode: str = "iid", eps_real: float = 0.0,
              switch_n: float = math.inf, checkpoints=None, alpha: float = 0.05) -> BatchResult:
    z = np.ascontiguousarray(z, dtype=float)
    U = np.ascontiguousarray(U, dtype=float)
    h = np.ascontiguousarray(h, dtype=float)
    if z.ndim != 2 or z.shape != U.shape or z.shape != h.shape:
        raise ValueError("z, U and h must be equal-shape 2-d arrays (replications x horizon)")
    R, N = z.shape
    if mode not in MODES:
        raise ValueError(f"unknown adversary mode {mode!r}")
    if mode == "worst_case" and not spec.robust:
        raise ValueError("the worst-case attack targets the clamp of a robust method")
    ck = np.arange(1, N + 1) if checkpoints is None else np.asarray(sorted(set(int(c) for c in checkpoints)))
    if ck.size and (ck[0] < 1 or ck[-1] > N):
        raise ValueError("checkpoints must lie in 1..horizon")
    u_lo = u_hi = log_denom = 0.0
    degenerate = True
    xplus = 0.0
    if spec.kind == KIND_FIXED and spec.robust:
        ef = fixed_efactor(spec, eps)
        degenerate = ef.degenerate
        if not degenerate:
            u_lo, u_hi = math.log(ef.cp.c_lo), math.log(ef.cp.c_hi)
            log_denom = math.log(ef.denom)
            xplus = float(ef.cp.pair.upper_point(ef.cp.c_hi))
    out_ck = np.zeros((R, ck.size))
    out_stop = np.zeros(R, dtype=np.int64)
    out_final = np.zeros(R)
    out_max = np.zeros(R)
    out_sum = np.zeros(R)
    a, b = spec.null_interval
    ca, cb = spec.class_bounds
    _run_kernel(
        spec.kind, spec.robust, float(spec.mu0), float(spec.mu1), float(a), float(b),
        spec.class_kind, float(ca), float(cb),
        u_lo, u_hi, log_denom, degenerate, xplus,
        float(eps), z, U, h, MODES[mode], float(eps_real),
        float(switch_n), ck.astype(np.int64), -math.log(alpha),
        out_ck, out_stop, out_final, out_max, out_sum,
    )
    return BatchResult(ck, out_ck, out_stop, out_final, out_max, out_sum)


def draw_streams(seed: int, stream_key: int, reps, horizon: int, base_mu: float,
                 contaminant=(-1.0, 10.0)):
    """Base draws, uniforms and Cauchy draws for replications ``reps``.

    Replication ``r`` reads from ``make_rng(seed, stream_key, r)`` in the
    order base normals, uniforms, contaminant draws, so any subset of
    replications reproduces the same rows.
    """
    reps = list(reps)
    z = np.empty((len(reps), horizon))
    U = np.empty_like(z)
    h = np.empty_like(z)
    loc, scale = contaminant
    for i, r in enumerate(reps):
        rng = make_rng(seed, stream_key, r)
        z[i] = base_mu + rng.standard_normal(horizon)
        U[i] = rng.random(horizon)
        h[i] = loc + scale * rng.standard_cauchy(horizon)
    return z, U, h
