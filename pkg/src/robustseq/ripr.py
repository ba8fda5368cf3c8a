"""Composite nulls: RIPr projection, supremum denominators, combined steps.

The null is an interval ``[a, b]`` of a one-parameter exponential family
and the alternative sits on one side of it. The reverse information
projection of ``P_theta1`` onto the null is then the member at the
endpoint closest to ``theta1`` and carries full mass (``k = 1``).

For a composite null the e-factor denominator replaces ``E_P0[clamp]`` by
``sup_theta E_{P_theta}[clamp]`` over the null interval.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .censoring import CensoredPair, solve_thresholds
from .dists import DensityModel, Gaussian, GaussianLocationPair
from .evalues import EFactor
from .plugin import MedianEstimator, StepDiagnostics

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class ExpFamilySpec:
    """Canonical one-parameter family ``h(x) exp(theta T(x) - A(theta))``."""

    name: str
    sufficient_stat: Callable
    log_partition: Callable
    log_carrier: Callable
    make_model: Callable[[float], DensityModel]
    make_pair: Callable[[float, float, float], object]

    def log_density(self, theta: float, x):
        x = np.asarray(x, dtype=float)
        return self.log_carrier(x) + theta * self.sufficient_stat(x) - self.log_partition(theta)


def gaussian_location_family(sigma: float = 1.0) -> ExpFamilySpec:
    """``N(mu, sigma^2)`` indexed by its mean ``mu`` (natural parameter ``mu / sigma^2``).

    The family is parameterized by the mean throughout; the canonical form
    is used only for densities.
    """
    s2 = sigma * sigma
    return ExpFamilySpec(
        name=f"gaussian(sigma={sigma:g})",
        sufficient_stat=lambda x: x / s2,
        log_partition=lambda mu: 0.5 * mu * mu / s2,
        log_carrier=lambda x: -0.5 * x * x / s2 - 0.5 * math.log(2 * math.pi * s2),
        make_model=lambda mu: Gaussian(mu, sigma),
        make_pair=lambda mu0, mu1, k=1.0: GaussianLocationPair(mu0, mu1, sigma, k),
    )


@dataclass(frozen=True)
class CompositeNullSpec:
    family: ExpFamilySpec
    a: float
    b: float

    def __post_init__(self):
        if not self.a <= self.b:
            raise ValueError("empty null interval: need a <= b")

    def contains(self, theta: float) -> bool:
        return self.a <= theta <= self.b


def ripr_project(null_spec: CompositeNullSpec, theta1: float) -> tuple[float, float]:
    """``(theta_star, k)``: the null endpoint nearest ``theta1`` and mass 1."""
    if null_spec.contains(theta1):
        raise ValueError(f"theta1={theta1} lies in the null interval [{null_spec.a}, {null_spec.b}]")
    return float(np.clip(theta1, null_spec.a, null_spec.b)), 1.0


def _golden_max(fn, lo: float, hi: float, tol: float) -> tuple[float, float]:
    x1 = hi - GOLDEN * (hi - lo)
    x2 = lo + GOLDEN * (hi - lo)
    f1, f2 = fn(x1), fn(x2)
    while hi - lo > tol:
        if f1 < f2:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + GOLDEN * (hi - lo)
            f2 = fn(x2)
        else:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - GOLDEN * (hi - lo)
            f1 = fn(x1)
    x = 0.5 * (lo + hi)
    return fn(x), x


def sup_expected_clamp(null_spec: CompositeNullSpec, cp: CensoredPair,
                       grid_size: int = 129, tol: float = 1e-10) -> tuple[float, float]:
    """``max_theta E_{P_theta}[clamp]`` over the null interval, with its argmax.

    A coarse grid locates every local maximum; each is refined by golden
    section inside its neighbouring grid cells and the best is returned.
    """
    if cp.degenerate:
        raise ValueError("supremum undefined for a degenerate pair")
    pair = cp.pair

    def value(theta: float) -> float:
        v = float(pair.expected_clamp(cp.c_lo, cp.c_hi, null_spec.family.make_model(theta)))
        if not math.isfinite(v):
            raise ArithmeticError(f"non-finite clamp expectation at theta={theta}")
        return v

    a, b = null_spec.a, null_spec.b
    if a == b:
        return value(a), a
    grid = np.linspace(a, b, grid_size)
    vals = np.array([value(t) for t in grid])
    best_v, best_t = float(vals.max()), float(grid[vals.argmax()])
    for i in range(grid_size):
        left = vals[i - 1] if i > 0 else -math.inf
        right = vals[i + 1] if i < grid_size - 1 else -math.inf
        if vals[i] >= left and vals[i] >= right:
            lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, grid_size - 1)]
            v, t = _golden_max(value, float(lo), float(hi), tol)
            if v > best_v:
                best_v, best_t = v, t
    return best_v, best_t


class RiprEFactor(EFactor):
    def __init__(self, cp: CensoredPair, null_spec: CompositeNullSpec, theta1: float):
        self.null_spec = null_spec
        self.theta1 = theta1
        if cp.degenerate:
            self.sup_value, self.sup_theta = math.nan, math.nan
            super().__init__(cp, label="ripr")
            return
        self.sup_value, self.sup_theta = sup_expected_clamp(null_spec, cp)
        super().__init__(cp, denom=self.sup_value + (cp.c_hi - cp.c_lo) * cp.eps, label="ripr")


def make_ripr_efactor(null_spec: CompositeNullSpec, theta1: float, eps: float) -> RiprEFactor:
    theta_star, k = ripr_project(null_spec, theta1)
    pair = null_spec.family.make_pair(theta_star, theta1, k)
    return RiprEFactor(solve_thresholds(pair, eps), null_spec, theta1)


def ripr_factor_for_estimate(null_spec: CompositeNullSpec, theta_hat: float, eps: float) -> RiprEFactor | None:
    """RIPr factor for a plug-in estimate, or None when it touches the null."""
    if null_spec.contains(theta_hat):
        return None
    return make_ripr_efactor(null_spec, theta_hat, eps)


def combined_step(null_spec: CompositeNullSpec, estimator: MedianEstimator, eps: float, x_next: float):
    """Plug-in estimate from past data, RIPr factor on ``x_next``, then absorb ``x_next``."""
    theta = estimator.current_theta()
    ef = None if theta is None else ripr_factor_for_estimate(null_spec, theta, eps)
    if ef is None or ef.degenerate:
        value, diag = 1.0, StepDiagnostics(theta)
    else:
        value = float(ef.evaluate(x_next))
        diag = StepDiagnostics(theta, ef.cp.c_lo, ef.cp.c_hi, ef.denom, False)
    estimator.observe(x_next)
    return value, estimator, diag


class CombinedTest:
    """Stateful combined plug-in / RIPr factor stream (optionally non-robust)."""

    def __init__(self, null_spec: CompositeNullSpec, estimator: MedianEstimator, eps: float,
                 cache_tol: float | None = None, robust: bool = True):
        self.null_spec = null_spec
        self.estimator = estimator
        self.eps = eps
        self.robust = robust
        self.cache_tol = cache_tol
        self._cached = None
        self.current: RiprEFactor | None = None
        self._prepared_for = -1

    def prepare(self) -> RiprEFactor | None:
        theta = self.estimator.current_theta()
        ef = None
        if theta is not None and self.robust:
            if self.cache_tol is not None and self._cached is not None and abs(theta - self._cached[0]) < self.cache_tol:
                ef = self._cached[1]
            else:
                ef = ripr_factor_for_estimate(self.null_spec, theta, self.eps)
                self._cached = (theta, ef)
        self.current = ef
        self._prepared_for = self.estimator.count
        return ef

    def step(self, x: float) -> tuple[float, StepDiagnostics]:
        ef = self.current if self._prepared_for == self.estimator.count else self.prepare()
        theta = self.estimator.current_theta()
        if theta is None or self.null_spec.contains(theta):
            value, diag = 1.0, StepDiagnostics(theta)
        elif self.robust:
            if ef.degenerate:
                value, diag = 1.0, StepDiagnostics(theta)
            else:
                value = float(ef.evaluate(x))
                diag = StepDiagnostics(theta, ef.cp.c_lo, ef.cp.c_hi, ef.denom, False)
        else:
            value = nonrobust_ripr_factor(self.null_spec, theta, x)
            diag = StepDiagnostics(theta, degenerate=False)
        self.estimator.observe(x)
        return value, diag


def nonrobust_ripr_factor(null_spec: CompositeNullSpec, theta1: float, x: float) -> float:
    """Uncensored ratio ``p_theta1(x) / p_theta_star(x)``."""
    theta_star, _ = ripr_project(null_spec, theta1)
    fam = null_spec.family
    lr = float(fam.make_model(theta1).log_density(x) - fam.make_model(theta_star).log_density(x))
    return math.exp(lr) if lr < 709 else math.inf
