"""Per-observation e-factors built from a censored likelihood ratio.

The factor is ``clamp(x) / denom`` with
``denom = E_P0[clamp] + (c_hi - c_lo) * eps``. Over the TV ball of radius
``eps`` around ``P0`` the mean of the clamp can grow by at most
``(c_hi - c_lo) * eps`` (move ``eps`` of mass from where the clamp is
``c_lo`` to where it is ``c_hi``), so the worst-case mean of the factor is
exactly one.
"""

from __future__ import annotations

import math

import numpy as np

from .censoring import CensoredPair, solve_thresholds
from .dists import LikelihoodRatioPair


class EFactor:
    """``x -> clamp(x) / denom``; the constant 1 when the thresholds cross.

    ``denom`` may be overridden (composite nulls use a supremum over the
    null in place of ``E_P0[clamp]``).
    """

    def __init__(self, cp: CensoredPair, denom=None, label: str = "robust"):
        self.cp = cp
        self.degenerate = cp.degenerate
        self.label = label
        if self.degenerate:
            self.denom = 1.0
        else:
            self.denom = cp.denom if denom is None else denom
            if not self.denom > 0:
                raise ArithmeticError(f"non-positive denominator {self.denom!r}")
        self._log_denom = math.log(float(self.denom))

    @property
    def lower(self):
        return 1.0 if self.degenerate else self.cp.c_lo / self.denom

    @property
    def upper(self):
        return 1.0 if self.degenerate else self.cp.c_hi / self.denom

    def evaluate(self, x):
        if self.degenerate:
            return np.ones_like(np.asarray(x, dtype=float)) if np.ndim(x) else 1.0
        return self.cp.pair.clamp(x, self.cp.c_lo, self.cp.c_hi) / self.denom

    __call__ = evaluate

    def log_evaluate(self, x):
        if self.degenerate:
            return np.zeros_like(np.asarray(x, dtype=float)) if np.ndim(x) else 0.0
        cp = self.cp
        lr = np.clip(cp.pair.log_ratio(x), math.log(cp.c_lo), math.log(cp.c_hi))
        return lr - self._log_denom

    def __repr__(self) -> str:
        if self.degenerate:
            return f"EFactor({self.label}, degenerate)"
        return f"EFactor({self.label}, c_lo={float(self.cp.c_lo):.6g}, c_hi={float(self.cp.c_hi):.6g}, denom={float(self.denom):.6g})"


def make_simple_efactor(pair: LikelihoodRatioPair, eps: float, k=None) -> EFactor:
    return EFactor(solve_thresholds(pair, eps, k))


def worst_case_null_mean(ef: EFactor):
    """Supremum of ``E_Q[factor]`` over the TV ball of radius eps around ``P0``."""
    if ef.degenerate:
        return 1.0
    cp = ef.cp
    return (cp.expected_clamp_null + (cp.c_hi - cp.c_lo) * cp.eps) / ef.denom
