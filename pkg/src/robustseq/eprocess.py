"""Wealth accumulation, Ville stopping and anytime-valid p-values."""

from __future__ import annotations

import math
from dataclasses import dataclass, field


@dataclass
class EProcess:
    """Running product of e-factors, held in log space.

    ``stopped_at`` records the first ``n`` with wealth ``>= 1/alpha``;
    updates keep flowing afterwards. With ``keep_trace`` every step is
    recorded, otherwise only powers of two (``last`` holds the final step).
    """

    alpha: float = 0.05
    keep_trace: bool = False
    n: int = 0
    log_wealth: float = 0.0
    running_max_log_wealth: float = 0.0
    stopped_at: int | None = None
    trace: list = field(default_factory=lambda: [(0, 0.0)])

    def __post_init__(self):
        if not 0 < self.alpha < 1:
            raise ValueError("alpha must lie in (0, 1)")
        self._threshold = -math.log(self.alpha)

    @property
    def wealth(self) -> float:
        return math.exp(self.log_wealth)

    @property
    def stopped(self) -> bool:
        return self.stopped_at is not None

    def update(self, factor: float) -> "EProcess":
        if not factor >= 0:
            raise ValueError(f"e-factor must be nonnegative, got {factor!r}")
        return self.update_log(math.log(factor) if factor > 0 else -math.inf)

    def update_log(self, log_factor: float) -> "EProcess":
        self.n += 1
        if self.log_wealth > -math.inf:
            self.log_wealth += log_factor
        if self.log_wealth > self.running_max_log_wealth:
            self.running_max_log_wealth = self.log_wealth
        if self.stopped_at is None and self.log_wealth >= self._threshold:
            self.stopped_at = self.n
        if self.keep_trace or (self.n & (self.n - 1)) == 0:
            self.trace.append((self.n, self.log_wealth))
        return self

    def p_value(self) -> float:
        return anytime_p_value(self)

    def checkpoints(self) -> list:
        """Retained trace plus the current step."""
        if self.trace[-1][0] == self.n:
            return list(self.trace)
        return self.trace + [(self.n, self.log_wealth)]


def anytime_p_value(state: EProcess) -> float:
    return min(1.0, math.exp(-state.running_max_log_wealth))


def growth_slope(state: EProcess) -> float:
    if state.n < 2:
        raise ValueError("growth slope needs at least two observations")
    return state.log_wealth / state.n


def run_eprocess(factors, alpha: float = 0.05, keep_trace: bool = False) -> EProcess:
    st = EProcess(alpha=alpha, keep_trace=keep_trace)
    for f in factors:
        st.update(f)
    return st
