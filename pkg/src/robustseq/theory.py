"""Growth rates of the robust tests and their lower bounds.

The almost-sure slope of log-wealth under an i.i.d. data law ``Q`` is
``E_Q[log clamp] - log denom``. Log-clamp is constant outside the band
``c_lo < r < c_hi``, so only the band needs integration (closed form for
same-variance Gaussian data, quadrature for everything else).
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

from .censoring import CensoredPair, solve_thresholds
from .dists import (
    DensityModel,
    DiscretePair,
    Gaussian,
    GaussianLocationPair,
    LikelihoodRatioPair,
    kl_divergence,
)
from .evalues import EFactor, make_simple_efactor
from .oracle import censored_kl
from .ripr import CompositeNullSpec, gaussian_location_family, make_ripr_efactor


def theoretical_slope(ef: EFactor, q_data: DensityModel) -> float:
    if ef.degenerate:
        return 0.0
    cp = ef.cp
    val = float(cp.pair.expected_log_clamp(cp.c_lo, cp.c_hi, q_data))
    lo, hi = math.log(cp.c_lo), math.log(cp.c_hi)
    if not (lo - 1e-9 <= val <= hi + 1e-9):
        raise ArithmeticError(f"log-clamp expectation {val} escapes [{lo}, {hi}]")
    return val - math.log(ef.denom)


def kl_censored(pair: LikelihoodRatioPair, eps: float) -> float:
    """``KL(Q1, Q0)`` for the censored least-favourable pair (0 when degenerate)."""
    cp = solve_thresholds(pair, eps)
    if cp.degenerate:
        return 0.0
    return kl_censored_cp(cp)


def kl_censored_cp(cp: CensoredPair) -> float:
    if abs(float(cp.k) - 1) > 1e-12:
        raise ValueError("censored KL assumes k = 1")
    if isinstance(cp.pair, DiscretePair):
        return censored_kl(cp)
    # q1/q0 equals the clamp everywhere; q1 is (1-eps) p1 above c_lo and
    # (1-eps) c_lo p0 below it
    pair, c1, c2, e = cp.pair, float(cp.c_lo), float(cp.c_hi), float(cp.eps)
    elog = float(pair.expected_log_clamp(c1, c2, pair.alt_model))
    below_alt = 1.0 - float(pair.alt_above(c1, strict=True))
    below_null = float(pair.null_below(c1, strict=False))
    return (1 - e) * (elog - math.log(c1) * below_alt + c1 * math.log(c1) * below_null)


def growth_lower_bound(cp: CensoredPair, kl: float) -> float:
    """Slope lower bound from the censored KL and the threshold spread."""
    e, c1, c2 = float(cp.eps), float(cp.c_lo), float(cp.c_hi)
    return kl - 2 * (math.log(c2) - math.log(c1)) * e - math.log1p(2 * (c2 - c1) * e)


def optimality_gap_bound(kl: float, eps: float) -> float:
    """Threshold-free slope bound; the log argument is positive for eps < 1."""
    eps = float(eps)
    return kl - 4 * eps * math.log((1 - eps) / eps) - math.log(3 - 2 * eps * (1 - 2 * eps) / (1 - eps))


@dataclass(frozen=True)
class GrowthReport:
    eps: float
    c_lo: float
    c_hi: float
    r_theoretical: float
    lower_bound_spread: float
    lower_bound_eps_only: float
    kl_limit: float


def growth_report(ef: EFactor, q_data: DensityModel, kl_limit: float) -> GrowthReport:
    cp = ef.cp
    kl = kl_censored_cp(cp)
    return GrowthReport(
        eps=float(cp.eps), c_lo=float(cp.c_lo), c_hi=float(cp.c_hi),
        r_theoretical=theoretical_slope(ef, q_data),
        lower_bound_spread=growth_lower_bound(cp, kl),
        lower_bound_eps_only=optimality_gap_bound(kl, cp.eps),
        kl_limit=kl_limit,
    )


SWEEP_COLUMNS = ("eps", "c_lo", "c_hi", "c_hi_times_eps", "r_theoretical", "kl_limit")


def asymptotic_sweep(scenario: str, eps_grid, *, mu1: float = 1.0, null_interval=(-0.5, 0.5),
                     q_data: DensityModel | None = None) -> list[dict]:
    """Slope and thresholds across a decreasing ``eps_grid``.

    ``scenario`` is ``"simple"`` (null ``N(0,1)``) or ``"ripr"`` (null
    ``N(theta,1)``, ``theta`` in ``null_interval``); the alternative is
    ``N(mu1, 1)`` and data default to it.
    """
    eps_grid = [float(e) for e in eps_grid]
    if any(a <= b for a, b in zip(eps_grid, eps_grid[1:])):
        raise ValueError("eps_grid must be sorted in decreasing order")
    q = Gaussian(mu1, 1.0) if q_data is None else q_data
    if scenario == "simple":
        pair = GaussianLocationPair(0.0, mu1)
        kl_limit = kl_divergence(Gaussian(mu1, 1.0), Gaussian(0.0, 1.0))
        build = lambda e: make_simple_efactor(pair, e)
    elif scenario == "ripr":
        spec = CompositeNullSpec(gaussian_location_family(), *null_interval)
        star = min(max(mu1, spec.a), spec.b)
        kl_limit = kl_divergence(Gaussian(mu1, 1.0), Gaussian(star, 1.0))
        build = lambda e: make_ripr_efactor(spec, mu1, e)
    else:
        raise ValueError(f"unknown scenario {scenario!r}; use 'simple' or 'ripr'")
    rows = []
    for e in eps_grid:
        ef = build(e)
        cp = ef.cp
        rows.append({
            "eps": e,
            "c_lo": float(cp.c_lo),
            "c_hi": float(cp.c_hi),
            "c_hi_times_eps": float(cp.c_hi) * e,
            "r_theoretical": theoretical_slope(ef, q),
            "kl_limit": kl_limit,
        })
    return rows


def sweep_to_csv(rows: list[dict], stream: io.TextIOBase | None = None) -> str:
    out = io.StringIO() if stream is None else stream
    w = csv.DictWriter(out, fieldnames=SWEEP_COLUMNS, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: repr(float(r[k])) for k in SWEEP_COLUMNS})
    return out.getvalue() if stream is None else ""
