"""Null-side data generators for validity stress tests.

Every strategy emits, at each step, a conditional law of the form
``(1 - eps) * P + eps * H`` with ``P`` a null member and ``H`` chosen by the
strategy, possibly as a function of the history and of the test's current
state. The test state arrives through a context mapping with the optional
keys ``"efactor"`` (the factor about to be applied) and ``"log_wealth"``.
"""

from __future__ import annotations

from typing import Mapping, Sequence

import numpy as np

from .dists import ContaminatedModel, DensityModel, PointMass
from .evalues import EFactor


class AdversaryStrategy:
    label = "adversary"

    def __init__(self, null_member: DensityModel, eps: float):
        if not 0.0 <= eps < 1.0:
            raise ValueError(f"eps must lie in [0, 1), got {eps}")
        self.null_member = null_member
        self.eps = float(eps)

    def next_distribution(self, history: Sequence[float], context: Mapping | None = None) -> ContaminatedModel:
        raise NotImplementedError

    def sample(self, rng: np.random.Generator, history: Sequence[float], context: Mapping | None = None) -> float:
        return float(self.next_distribution(history, context).sample(rng))


class IidMixtureAdversary(AdversaryStrategy):
    label = "iid_mixture"

    def __init__(self, p0: DensityModel, contaminant: DensityModel, eps: float):
        super().__init__(p0, eps)
        self.law = ContaminatedModel(p0, contaminant, eps)

    def next_distribution(self, history, context=None):
        return self.law


def upper_attack_point(ef: EFactor) -> float | None:
    """A point where the clamp sits at its upper limit (None if degenerate)."""
    if ef is None or ef.degenerate:
        return None
    return float(ef.cp.pair.upper_point(ef.cp.c_hi))


class WorstCaseAdaptiveAdversary(AdversaryStrategy):
    """``(1 - eps) P0 + eps * delta(x+)`` with ``x+`` in the clamp's upper region.

    ``x+`` is frozen from ``target_efactor`` when one is given; a factor
    passed through the context takes precedence, so tests whose thresholds
    move are attacked at their current upper region.
    """

    label = "worst_case_adaptive"

    def __init__(self, p0: DensityModel, eps: float, target_efactor: EFactor | None = None):
        super().__init__(p0, eps)
        self.frozen_point = upper_attack_point(target_efactor) if target_efactor is not None else None
        if target_efactor is not None and self.frozen_point is None:
            raise ValueError("target e-factor is degenerate: no upper clamp region to attack")

    def attack_point(self, context=None) -> float | None:
        if context is not None and "efactor" in context:
            return upper_attack_point(context["efactor"])
        return self.frozen_point

    def next_distribution(self, history, context=None):
        x_plus = self.attack_point(context)
        if x_plus is None or self.eps == 0:
            return ContaminatedModel(self.null_member, self.null_member, 0.0)
        return ContaminatedModel(self.null_member, PointMass(x_plus), self.eps)


class DelayedAttackAdversary(AdversaryStrategy):
    """Clean null draws until the wealth first exceeds 1 or step ``switch_n`` is reached.

    From then on it is the iid mixture. ``switch_n = math.inf`` disables the
    step trigger (the wealth trigger still applies). One instance per
    trajectory: the switch latches.
    """

    label = "delayed_attack"

    def __init__(self, p0: DensityModel, eps: float, switch_n: float, contaminant: DensityModel):
        super().__init__(p0, eps)
        if not switch_n >= 1:
            raise ValueError("switch_n must be >= 1")
        self.switch_n = switch_n
        self.contaminant = contaminant
        self.active = False
        self._mixture = ContaminatedModel(p0, contaminant, eps)
        self._clean = ContaminatedModel(p0, contaminant, 0.0)

    def next_distribution(self, history, context=None):
        n = len(history) + 1
        if not self.active:
            wealth_up = context is not None and context.get("log_wealth", 0.0) > 0
            self.active = wealth_up or n >= self.switch_n
        return self._mixture if self.active else self._clean


def iid_mixture_adversary(p0, contaminant, eps) -> IidMixtureAdversary:
    return IidMixtureAdversary(p0, contaminant, eps)


def worst_case_adaptive_adversary(p0, eps, target_efactor=None) -> WorstCaseAdaptiveAdversary:
    return WorstCaseAdaptiveAdversary(p0, eps, target_efactor)


def delayed_attack_adversary(p0, eps, switch_n, contaminant) -> DelayedAttackAdversary:
    return DelayedAttackAdversary(p0, eps, switch_n, contaminant)


def membership_certificate(law: ContaminatedModel, null_member: DensityModel, eps: float, grid) -> bool:
    """Sufficient check that ``law`` lies in the contamination model around ``null_member``.

    Uses the stored decomposition: the non-contaminant part must be
    ``(1 - w) * null_member`` with ``w <= eps``, verified pointwise on
    ``grid`` as ``density >= (1 - eps) * null density``.
    """
    if law.eps > eps + 1e-15:
        return False
    grid = np.asarray(grid, dtype=float)
    base_part = (1.0 - law.eps) * law.base.density(grid)
    cont = law.contaminant
    if law.eps > 0 and not isinstance(cont, PointMass):
        base_part = base_part + law.eps * cont.density(grid)
    need = (1.0 - eps) * null_member.density(grid)
    return bool(np.all(base_part >= need - 1e-15 * np.maximum(1.0, need)))


ADVERSARIES = ("iid_mixture", "worst_case_adaptive", "delayed_attack")
