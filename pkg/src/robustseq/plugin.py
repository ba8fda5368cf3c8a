"""Predictable plug-in e-factors for composite Gaussian-location alternatives.

Each step estimates the alternative mean from the observations strictly
before the current one (sample median, projected into the alternative
class), re-solves the censoring thresholds against the fixed null and
emits the resulting factor. Until an estimate exists the factor is 1.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass

from .censoring import solve_thresholds
from .dists import Gaussian, GaussianLocationPair
from .evalues import EFactor


class AlternativeClass:
    label = "alternative class"

    def project(self, value: float) -> float:
        raise NotImplementedError

    def contains(self, value: float) -> bool:
        raise NotImplementedError


class NonzeroMean(AlternativeClass):
    """``{mu : mu != center}``; an estimate of exactly ``center`` is nudged up by ``tiny``."""

    def __init__(self, center: float = 0.0, tiny: float = 1e-8):
        self.center = float(center)
        self.tiny = tiny
        self.label = f"mu != {self.center:g}"

    def project(self, value: float) -> float:
        return self.center + self.tiny if value == self.center else float(value)

    def contains(self, value: float) -> bool:
        return value != self.center


class OutsideInterval(AlternativeClass):
    """``{mu : mu <= a or mu >= b}``; interior points go to the nearest end, ties to ``b``."""

    def __init__(self, a: float, b: float):
        if not a < b:
            raise ValueError("need a < b")
        self.a, self.b = float(a), float(b)
        self.label = f"mu <= {self.a:g} or mu >= {self.b:g}"

    def project(self, value: float) -> float:
        v = float(value)
        if self.a < v < self.b:
            return self.a if v - self.a < self.b - v else self.b
        return v

    def contains(self, value: float) -> bool:
        return value <= self.a or value >= self.b


class MedianEstimator:
    """Exact running median (two heaps) mapped into an alternative class."""

    def __init__(self, alt_class: AlternativeClass, sigma: float = 1.0):
        self.alt_class = alt_class
        self.sigma = float(sigma)
        self.label = f"median[{alt_class.label}]"
        self._low: list[float] = []   # max-heap via negation
        self._high: list[float] = []
        self.count = 0

    def observe(self, x: float) -> "MedianEstimator":
        x = float(x)
        if self._low and x > -self._low[0]:
            heapq.heappush(self._high, x)
        else:
            heapq.heappush(self._low, -x)
        if len(self._low) > len(self._high) + 1:
            heapq.heappush(self._high, -heapq.heappop(self._low))
        elif len(self._high) > len(self._low):
            heapq.heappush(self._low, -heapq.heappop(self._high))
        self.count += 1
        return self

    def median(self) -> float | None:
        if not self.count:
            return None
        if len(self._low) > len(self._high):
            return -self._low[0]
        return 0.5 * (-self._low[0] + self._high[0])

    def current_theta(self) -> float | None:
        m = self.median()
        return None if m is None else self.alt_class.project(m)

    def current_alt(self) -> Gaussian | None:
        th = self.current_theta()
        return None if th is None else Gaussian(th, self.sigma)


def median_estimator(alt_class: AlternativeClass, sigma: float = 1.0) -> MedianEstimator:
    return MedianEstimator(alt_class, sigma)


@dataclass(frozen=True)
class StepDiagnostics:
    theta: float | None
    c_lo: float = math.nan
    c_hi: float = math.nan
    denom: float = math.nan
    degenerate: bool = True


def plugin_efactor(null_model: Gaussian, theta: float, eps: float) -> EFactor | None:
    if theta == null_model.mu:
        return None
    pair = GaussianLocationPair(null_model.mu, theta, null_model.sigma)
    return EFactor(solve_thresholds(pair, eps), label="plugin")


def _diagnostics(theta, ef: EFactor | None) -> StepDiagnostics:
    if ef is None or ef.degenerate:
        return StepDiagnostics(theta)
    return StepDiagnostics(theta, ef.cp.c_lo, ef.cp.c_hi, ef.denom, False)


def plugin_efactor_step(null_model: Gaussian, estimator: MedianEstimator, eps: float, x_next: float):
    """Emit the factor for ``x_next`` using only earlier data, then absorb ``x_next``."""
    theta = estimator.current_theta()
    ef = None if theta is None else plugin_efactor(null_model, theta, eps)
    value = 1.0 if ef is None else float(ef.evaluate(x_next))
    diag = _diagnostics(theta, ef)
    estimator.observe(x_next)
    return value, estimator, diag


class PluginTest:
    """Stateful plug-in factor stream.

    With ``cache_tol`` set, thresholds are reused while the estimate stays
    within ``cache_tol`` of the one they were solved for.
    """

    def __init__(self, null_model: Gaussian, alt_class: AlternativeClass, eps: float,
                 cache_tol: float | None = None, robust: bool = True):
        self.null_model = null_model
        self.eps = eps
        self.robust = robust
        self.estimator = MedianEstimator(alt_class, null_model.sigma)
        self.cache_tol = cache_tol
        self._cached: tuple[float, EFactor | None] | None = None
        self.current: EFactor | None = None
        self._prepared_for = -1

    def _factor_for(self, theta: float) -> EFactor | None:
        if self.cache_tol is not None and self._cached is not None:
            if abs(theta - self._cached[0]) < self.cache_tol:
                return self._cached[1]
        ef = plugin_efactor(self.null_model, theta, self.eps)
        self._cached = (theta, ef)
        return ef

    def prepare(self) -> EFactor | None:
        """Robust factor for the next observation (None in burn-in or non-robust mode)."""
        theta = self.estimator.current_theta()
        self.current = None if theta is None or not self.robust else self._factor_for(theta)
        self._prepared_for = self.estimator.count
        return self.current

    def step(self, x: float) -> tuple[float, StepDiagnostics]:
        ef = self.current if self._prepared_for == self.estimator.count else self.prepare()
        theta = self.estimator.current_theta()
        if theta is None:
            value, diag = 1.0, StepDiagnostics(None)
        elif self.robust:
            value = 1.0 if ef is None else float(ef.evaluate(x))
            diag = _diagnostics(theta, ef)
        else:
            sd = self.null_model.sigma
            lr = float(Gaussian(theta, sd).log_density(x) - self.null_model.log_density(x))
            value = math.exp(lr) if lr < 709 else math.inf
            diag = StepDiagnostics(theta, degenerate=False)
        self.estimator.observe(x)
        return value, diag
