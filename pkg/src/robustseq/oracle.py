"""Exact verification on finite sample spaces.

The mean ``sum q_i * payoff_i`` is linear in ``q``, and a TV ball of radius
``eps`` lets at most ``eps`` of mass change hands. Any feasible ``q`` can be
reached by moving mass ``m_ij`` from atom ``i`` to ``j``; each unit moved
gains ``payoff_j - payoff_i``, which is largest with ``j`` the argmax and
``i`` the cheapest atoms still holding mass. So the greedy transport below
is optimal.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .censoring import (
    CensoredPair,
    check_lfd_membership,
    least_favorable_densities,
    solve_thresholds,
    tv_distance,
)
from .dists import DiscreteDist, DiscretePair
from .evalues import EFactor


@dataclass(frozen=True)
class TVBallInstance:
    base: DiscreteDist
    eps: float
    payoff: tuple


def tv_ball_maximize(inst: TVBallInstance):
    """Return ``(q_star, value)`` maximizing the mean payoff over the TV ball."""
    p = list(inst.base.probs)
    pay = list(inst.payoff)
    if len(p) != len(pay):
        raise ValueError("payoff length differs from support size")
    if any(not math.isfinite(float(v)) for v in pay):
        raise ValueError("payoff must be finite")
    exact = all(isinstance(v, (int, Fraction)) for v in p + pay) and isinstance(inst.eps, (int, Fraction))
    zero = Fraction(0) if exact else 0.0
    budget = inst.eps if exact else float(inst.eps)
    top = max(range(len(pay)), key=lambda i: pay[i])
    q = list(p) if exact else [float(v) for v in p]
    for i in sorted(range(len(pay)), key=lambda i: pay[i]):
        if budget <= 0 or i == top or pay[i] >= pay[top]:
            continue
        moved = min(budget, q[i])
        q[i] -= moved
        q[top] += moved
        budget -= moved
    value = sum((qi * v for qi, v in zip(q, pay)), zero)
    return DiscreteDist(inst.base.support, tuple(q)), value


@dataclass
class CertificationReport:
    eps: object
    c_lo: object
    c_hi: object
    max_mean: object
    attains_one: bool | None
    tv_null: object
    tv_alt: object
    certified: bool
    violating_q: tuple | None = None
    notes: list = field(default_factory=list)


def efactor_payoffs(ef: EFactor, pair: DiscretePair) -> tuple:
    if ef.degenerate:
        return tuple(1 for _ in pair.support)
    return tuple(v / ef.denom for v in pair.clamp_values(ef.cp.c_lo, ef.cp.c_hi))


def certify_efactor(pair: DiscretePair, eps, tol: float = 1e-9) -> CertificationReport:
    """Check the worst-case null mean of the e-factor and the LFD distances."""
    cp = solve_thresholds(pair, eps)
    if cp.degenerate:
        raise ValueError("certification needs a non-degenerate pair")
    ef = EFactor(cp)
    payoff = efactor_payoffs(ef, pair)
    q_star, value = tv_ball_maximize(TVBallInstance(pair.null_model, cp.eps, payoff))
    tv0, tv1 = check_lfd_membership(cp)
    ok = float(value) <= 1 + tol and float(tv0) <= float(cp.eps) + tol and float(tv1) <= float(cp.eps) + tol
    # with at least eps of null mass at the lower clamp the greedy move is
    # a full eps transfer, which hits the bound exactly
    low_mass = sum(p for p, r in zip(pair.p0, pair.ratios) if r <= cp.c_lo)
    attains = None
    if low_mass >= cp.eps:
        attains = (value == 1) if pair.exact else abs(float(value) - 1) <= tol
        ok = ok and attains
    return CertificationReport(
        eps=cp.eps, c_lo=cp.c_lo, c_hi=cp.c_hi, max_mean=value, attains_one=attains,
        tv_null=tv0, tv_alt=tv1, certified=bool(ok),
        violating_q=None if ok else q_star.probs,
    )


def exact_growth_rate(pair: DiscretePair, eps, q_data) -> float:
    """``E_q[log clamp] - log denom`` for a discrete data law ``q_data``."""
    cp = solve_thresholds(pair, eps)
    if cp.degenerate:
        raise ValueError("growth rate undefined for a degenerate pair")
    w = pair._weights(q_data)
    if float(tv_distance(pair.p1, w)) > float(cp.eps) + 1e-12:
        warnings.warn("q_data lies outside the TV ball around the alternative", stacklevel=2)
    return pair.expected_log_clamp(cp.c_lo, cp.c_hi, w) - math.log(cp.denom)


def discrete_kl(p, q) -> float:
    """``KL(p, q)`` for weight vectors on a common support."""
    out = 0.0
    for a, b in zip(p, q):
        if a > 0:
            if b <= 0:
                return math.inf
            out += float(a) * math.log(float(a) / float(b))
    return out


def censored_kl(cp: CensoredPair) -> float:
    q0, q1 = least_favorable_densities(cp)
    return discrete_kl(q1, q0)


def random_discrete_pair(rng: np.random.Generator, n_atoms: int | None = None, exact: bool = False) -> DiscretePair:
    """Dirichlet(1) null and alternative on ``n_atoms`` points (4 to 8 if unset).

    ``exact=True`` rounds the draws to rationals with denominator 1000 so
    the oracle runs in exact arithmetic.
    """
    if n_atoms is None:
        n_atoms = int(rng.integers(4, 9))
    p0 = rng.dirichlet(np.ones(n_atoms))
    p1 = rng.dirichlet(np.ones(n_atoms))
    support = list(range(n_atoms))
    if exact:
        return DiscretePair(support, _to_rational(p0), _to_rational(p1))
    p0 = tuple(float(v) for v in p0 / p0.sum())
    p1 = tuple(float(v) for v in p1 / p1.sum())
    return DiscretePair(support, p0, p1)


def _to_rational(p, denom: int = 1000) -> list:
    # every atom keeps at least 1/denom so ratios stay finite
    ints = np.maximum(1, np.floor(p * denom).astype(int))
    ints[np.argmax(ints)] += denom - ints.sum()
    return [Fraction(int(v), denom) for v in ints]
