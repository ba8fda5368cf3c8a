"""Censoring thresholds for the least-favourable pair.

With ``r = p1/p0`` and the null carrying total mass ``k``, the upper
threshold ``c_hi`` solves ``f(c) = k / (1 - eps)`` and the lower threshold
``c_lo`` solves ``g(c) = 1 / (1 - eps)`` where::

    f(c) = P0[r <  c] + P1[r >= c] / c      (continuous, decreasing)
    g(c) = P1[r >  c] + c * P0[r <= c]      (continuous, increasing)

Both are continuous even for discrete pairs: at a ratio atom ``a`` the atom
contributes ``p0`` to ``f`` and ``p1`` to ``g`` from either side. Discrete
pairs are therefore solved exactly, segment by segment between consecutive
ratio atoms (``f`` is ``A + B/c`` and ``g`` is ``A + B*c`` on each segment);
everything else is solved by bisection on ``log c``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .dists import DensityModel, DiscretePair, LikelihoodRatioPair


class ThresholdConvergenceError(RuntimeError):
    """Bisection hit its iteration cap before reaching the tolerance."""


def f_value(pair: LikelihoodRatioPair, c):
    return pair.null_below(c, strict=True) + pair.alt_above(c, strict=False) / c


def g_value(pair: LikelihoodRatioPair, c):
    return pair.alt_above(c, strict=True) + c * pair.null_below(c, strict=False)


@dataclass(frozen=True)
class CensoredPair:
    pair: LikelihoodRatioPair
    eps: float
    k: float
    c_lo: float
    c_hi: float
    degenerate: bool
    expected_clamp_null: float
    denom: float
    residual_lo: float = 0.0
    residual_hi: float = 0.0
    iterations: int = 0

    @property
    def log_c_lo(self) -> float:
        return math.log(self.c_lo)

    @property
    def log_c_hi(self) -> float:
        return math.log(self.c_hi)


def _exact_eps(eps):
    if isinstance(eps, Fraction):
        return eps
    # decimal reading, so that eps=0.1 means 1/10
    return Fraction(repr(float(eps)))


def _solve_discrete(pair: DiscretePair, eps, k):
    """Exact segment-wise roots of ``f = k/(1-eps)`` and ``g = 1/(1-eps)``."""
    if pair.exact:
        eps = _exact_eps(eps)
        k = Fraction(k) if not isinstance(k, Fraction) else k
        one = Fraction(1)
    else:
        eps, k, one = float(eps), float(k), 1.0
    t_hi = k / (one - eps)
    t_lo = one / (one - eps)
    atoms = sorted({r for r in pair.ratios if 0 < r < math.inf})
    lows = [0 * one] + atoms
    highs = atoms + [math.inf]

    c_hi = None
    for lo, hi in zip(lows, highs):
        # on (lo, hi]:  f(c) = P0[r <= lo] + P1[r >= hi] / c
        a = pair.null_below(lo, strict=False)
        b = pair.alt_above(hi, strict=False)
        if b > 0 and t_hi > a:
            c = b / (t_hi - a)
            if lo < c <= hi:
                c_hi = c
                break
    c_lo = None
    for lo, hi in zip(lows, highs):
        # on [lo, hi):  g(c) = P1[r >= hi] + c * P0[r <= lo]
        a = pair.alt_above(hi, strict=False)
        b = pair.null_below(lo, strict=False)
        if b > 0:
            c = (t_lo - a) / b
            if lo <= c < hi:
                c_lo = c
                break
    if c_hi is None or c_lo is None:
        raise ThresholdConvergenceError("no segment brackets the normalization target")
    return c_lo, c_hi


def _bisect_log(fn, target, lo, hi, increasing, rtol, max_iter):
    """Root of monotone ``fn(exp(u)) = target`` on ``[lo, hi]``, expanding if needed."""
    sgn = 1.0 if increasing else -1.0
    F = lambda u: sgn * (float(fn(math.exp(u))) - target)
    it = 0
    width = hi - lo
    while F(lo) > 0 and it < 60:
        lo -= width
        width *= 2
        it += 1
    width = hi - lo
    while F(hi) < 0 and it < 120:
        hi += width
        width *= 2
        it += 1
    n = 0
    while hi - lo > rtol:
        if n >= max_iter:
            mid = 0.5 * (lo + hi)
            raise ThresholdConvergenceError(
                f"bisection did not converge in {max_iter} iterations; residual {F(mid):.3e}"
            )
        mid = 0.5 * (lo + hi)
        if F(mid) < 0:
            lo = mid
        else:
            hi = mid
        n += 1
    return math.exp(0.5 * (lo + hi)), n


def solve_thresholds(
    pair: LikelihoodRatioPair,
    eps: float,
    k: float | None = None,
    *,
    rtol: float = 1e-12,
    max_iter: int = 300,
) -> CensoredPair:
    """Solve ``c_lo`` and ``c_hi`` for ``pair`` at contamination level ``eps``.

    ``k`` defaults to the null's total mass and must agree with it when
    given. Identical null/alternative is not an error: the result simply
    has ``degenerate=True`` (``c_lo >= c_hi``).
    """
    if not 0 < eps < 1:
        raise ValueError(f"eps must lie in (0, 1), got {eps}")
    mass = pair.null_mass
    if k is None:
        k = mass
    elif abs(float(k) - float(mass)) > 1e-12:
        raise ValueError(f"k={k} does not match the null's total mass {float(mass)}")
    if not 0 < k <= 1 + 1e-12:
        raise ValueError("k must lie in (0, 1]")

    if isinstance(pair, DiscretePair):
        c_lo, c_hi = _solve_discrete(pair, eps, k)
        iters = 0
        if pair.exact:
            eps = _exact_eps(eps)
    else:
        kf, ef = float(k), float(eps)
        lo = math.log(ef / (2 * (1 - ef) * kf))
        hi = math.log(2 * (1 / ef - 1) / kf)
        c_hi, n1 = _bisect_log(lambda c: f_value(pair, c), kf / (1 - ef), lo, hi, False, rtol, max_iter)
        c_lo, n2 = _bisect_log(lambda c: g_value(pair, c), 1 / (1 - ef), lo, hi, True, rtol, max_iter)
        iters = n1 + n2

    res_hi = float(f_value(pair, c_hi)) - float(k) / (1 - float(eps))
    res_lo = float(g_value(pair, c_lo)) - 1 / (1 - float(eps))
    degenerate = bool(c_lo >= c_hi)
    if degenerate:
        ecn = denom = math.nan
    else:
        ecn = pair.expected_clamp(c_lo, c_hi)
        denom = ecn + (c_hi - c_lo) * eps
    return CensoredPair(
        pair=pair, eps=eps, k=k, c_lo=c_lo, c_hi=c_hi, degenerate=degenerate,
        expected_clamp_null=ecn, denom=denom,
        residual_lo=res_lo, residual_hi=res_hi, iterations=iters,
    )


def clamp_ratio(cp: CensoredPair, x):
    """``max(c_lo, min(c_hi, p1(x)/p0(x)))``; ``+inf`` ratios map to ``c_hi``."""
    if cp.degenerate:
        raise ValueError("clamp undefined for a degenerate pair (c_lo >= c_hi)")
    return cp.pair.clamp(x, cp.c_lo, cp.c_hi)


def expected_clamp(cp: CensoredPair, model: DensityModel | None = None):
    if cp.degenerate:
        raise ValueError("clamp undefined for a degenerate pair (c_lo >= c_hi)")
    val = cp.pair.expected_clamp(cp.c_lo, cp.c_hi, model)
    if not np.isfinite(float(val)):
        raise ArithmeticError("non-finite clamp expectation")
    return val


def least_favorable_densities(cp: CensoredPair) -> tuple[tuple, tuple]:
    """Censored densities ``(q0, q1)`` on the support of a discrete pair."""
    pair = cp.pair
    if not isinstance(pair, DiscretePair):
        raise TypeError("least-favourable densities are only materialized for discrete pairs")
    if cp.degenerate:
        raise ValueError("degenerate pair")
    e, c1, c2 = cp.eps, cp.c_lo, cp.c_hi
    q0 = tuple(
        (1 - e) * p0 if r < c2 else (1 - e) * p1 / c2
        for p0, p1, r in zip(pair.p0, pair.p1, pair.ratios)
    )
    q1 = tuple(
        (1 - e) * p1 if r > c1 else c1 * (1 - e) * p0
        for p0, p1, r in zip(pair.p0, pair.p1, pair.ratios)
    )
    return q0, q1


def tv_distance(p, q):
    return sum(abs(a - b) for a, b in zip(p, q)) / 2


def check_lfd_membership(cp: CensoredPair):
    """Total-variation distances ``(TV(P0, Q0), TV(P1, Q1))``; both should be <= eps."""
    if not isinstance(cp.pair, DiscretePair):
        raise TypeError("membership check needs a discrete pair")
    if abs(float(cp.k) - 1) > 1e-12:
        raise ValueError("membership check assumes k = 1")
    q0, q1 = least_favorable_densities(cp)
    return tv_distance(cp.pair.p0, q0), tv_distance(cp.pair.p1, q1)
