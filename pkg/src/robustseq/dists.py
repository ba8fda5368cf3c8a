"""Distribution models and likelihood-ratio pairs.

A pair bundles a null density ``p0`` (possibly a sub-probability density of
total mass ``k``) with an alternative ``p1`` and answers the queries the
censoring solver needs: masses of the sets ``{p1/p0 < c}`` / ``{p1/p0 >= c}``
under either model, band expectations of the ratio, and expectations of the
clamped ratio under arbitrary data models.

Three pair flavours are provided:

* :class:`GaussianLocationPair` -- common-variance normals, closed forms
  through the standard normal CDF;
* :class:`DiscretePair` -- finite support, exact summation (works with
  :class:`fractions.Fraction` inputs for rational arithmetic);
* :class:`GenericPair` -- any two continuous models with CDFs; level sets of
  the ratio are located on a ``x = tan(u)`` grid and refined by root finding.
"""

from __future__ import annotations

import math
from abc import ABC, abstractmethod
from fractions import Fraction
from typing import Sequence

import numpy as np
from scipy import integrate, optimize
from scipy.special import ndtr

LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)


def make_rng(seed: int, *spawn_key: int) -> np.random.Generator:
    """PCG64 generator for a 64-bit ``seed`` and an optional spawn path.

    Streams for replication ``r`` of sweep point ``j`` are
    ``make_rng(seed, j, r)``; distinct spawn keys give independent streams
    and the mapping does not depend on how many streams are created.
    """
    if not 0 <= int(seed) < 2**64:
        raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in spawn_key))
    return np.random.Generator(np.random.PCG64(ss))


# ---------------------------------------------------------------------------
# Models
# ---------------------------------------------------------------------------


class DensityModel(ABC):
    """A univariate law with density, CDF and sampler."""

    label: str = "model"
    discrete: bool = False
    total_mass: float = 1.0

    @abstractmethod
    def log_density(self, x): ...

    def density(self, x):
        return np.exp(self.log_density(x))

    @abstractmethod
    def cdf(self, x): ...

    @abstractmethod
    def sample(self, rng: np.random.Generator, size=None): ...

    def __repr__(self) -> str:
        return f"<{type(self).__name__} {self.label}>"


class Gaussian(DensityModel):
    def __init__(self, mu: float = 0.0, sigma: float = 1.0):
        if not sigma > 0:
            raise ValueError("sigma must be positive")
        self.mu = float(mu)
        self.sigma = float(sigma)
        self.label = f"N({self.mu:g},{self.sigma:g}^2)"

    def log_density(self, x):
        z = (np.asarray(x, dtype=float) - self.mu) / self.sigma
        return -0.5 * z * z - LOG_SQRT_2PI - math.log(self.sigma)

    def cdf(self, x):
        return ndtr((np.asarray(x, dtype=float) - self.mu) / self.sigma)

    def sample(self, rng, size=None):
        return rng.normal(self.mu, self.sigma, size)


class Cauchy(DensityModel):
    def __init__(self, loc: float = 0.0, scale: float = 1.0):
        if not scale > 0:
            raise ValueError("scale must be positive")
        self.loc = float(loc)
        self.scale = float(scale)
        self.label = f"Cauchy({self.loc:g},{self.scale:g})"

    def log_density(self, x):
        z = (np.asarray(x, dtype=float) - self.loc) / self.scale
        return -np.log1p(z * z) - math.log(math.pi * self.scale)

    def cdf(self, x):
        z = (np.asarray(x, dtype=float) - self.loc) / self.scale
        return 0.5 + np.arctan(z) / math.pi

    def sample(self, rng, size=None):
        return self.loc + self.scale * rng.standard_cauchy(size)


class PointMass(DensityModel):
    """Dirac mass at ``x0``.

    It has no Lebesgue density; ``density`` is 0 off the atom and ``inf`` on
    it, which is only used symbolically (contamination bookkeeping).
    """

    def __init__(self, x0: float):
        self.x0 = float(x0)
        self.label = f"delta({self.x0:g})"

    def log_density(self, x):
        x = np.asarray(x, dtype=float)
        return np.where(x == self.x0, np.inf, -np.inf)

    def cdf(self, x):
        return np.where(np.asarray(x, dtype=float) >= self.x0, 1.0, 0.0)

    def sample(self, rng, size=None):
        if size is None:
            return self.x0
        return np.full(size, self.x0)


class MixtureModel(DensityModel):
    """Finite mixture ``sum_i w_i * model_i`` with weights summing to one."""

    def __init__(self, components: Sequence[tuple[float, DensityModel]]):
        comps = [(float(w), m) for w, m in components]
        if not comps:
            raise ValueError("mixture needs at least one component")
        if any(w < 0 for w, _ in comps):
            raise ValueError("mixture weights must be nonnegative")
        if abs(sum(w for w, _ in comps) - 1.0) > 1e-12:
            raise ValueError("mixture weights must sum to 1")
        self.components = tuple(comps)
        self.weights = np.array([w for w, _ in comps])
        self.label = " + ".join(f"{w:g}*{m.label}" for w, m in comps)

    def density(self, x):
        return sum(w * m.density(x) for w, m in self.components if w > 0)

    def log_density(self, x):
        with np.errstate(divide="ignore"):
            return np.log(self.density(x))

    def cdf(self, x):
        return sum(w * m.cdf(x) for w, m in self.components if w > 0)

    def sample(self, rng, size=None):
        n = 1 if size is None else int(np.prod(size))
        idx = rng.choice(len(self.components), size=n, p=self.weights)
        out = np.empty(n)
        for i, (_, m) in enumerate(self.components):
            sel = idx == i
            if sel.any():
                out[sel] = m.sample(rng, int(sel.sum()))
        if size is None:
            return float(out[0])
        return out.reshape(size)


class ContaminatedModel(MixtureModel):
    """``(1 - eps) * base + eps * contaminant`` with the decomposition kept."""

    def __init__(self, base: DensityModel, contaminant: DensityModel, eps: float):
        if not 0.0 <= eps < 1.0:
            raise ValueError(f"contamination fraction must lie in [0, 1), got {eps}")
        self.base = base
        self.contaminant = contaminant
        self.eps = float(eps)
        super().__init__([(1.0 - self.eps, base), (self.eps, contaminant)])

    def density(self, x):
        if isinstance(self.contaminant, PointMass):
            # no density on the atom; report the base part off the atom
            d = (1.0 - self.eps) * self.base.density(x)
            return np.where(np.asarray(x, dtype=float) == self.contaminant.x0, np.inf, d)
        return super().density(x)

    def sample(self, rng, size=None):
        n = 1 if size is None else int(np.prod(size))
        flip = rng.random(n) < self.eps
        out = np.asarray(self.base.sample(rng, n), dtype=float)
        k = int(flip.sum())
        if k:
            out[flip] = self.contaminant.sample(rng, k)
        if size is None:
            return float(out[0])
        return out.reshape(size)


def make_contaminated_sampler(
    base: DensityModel, contaminant: DensityModel, eps_real: float
) -> ContaminatedModel:
    """Contaminated mixture: draw from ``contaminant`` w.p. ``eps_real`` else ``base``."""
    return ContaminatedModel(base, contaminant, eps_real)


class DiscreteDist(DensityModel):
    """Finite-support (sub-)probability vector w.r.t. counting measure.

    Probabilities may be :class:`~fractions.Fraction` for exact arithmetic.
    """

    discrete = True

    def __init__(self, support: Sequence, probs: Sequence, *, mass=None):
        if len(support) != len(probs):
            raise ValueError("support and probs must have equal length")
        if len(support) == 0:
            raise ValueError("empty support")
        if any(b <= a for a, b in zip(support, support[1:])):
            raise ValueError("support atoms must be strictly increasing")
        if any(p < 0 for p in probs):
            raise ValueError("negative mass")
        self.support = tuple(support)
        self.probs = tuple(probs)
        total = sum(self.probs)
        if mass is not None and abs(total - mass) > 1e-12:
            raise ValueError(f"probs sum to {float(total)!r}, expected {float(mass)!r}")
        self.total_mass = total
        self._index = {float(a): i for i, a in enumerate(self.support)}
        self.label = f"Discrete({len(self.support)} atoms)"

    def prob_of(self, x):
        i = self._index.get(float(x))
        return 0 if i is None else self.probs[i]

    def density(self, x):
        if np.ndim(x) == 0:
            return float(self.prob_of(x))
        return np.array([float(self.prob_of(v)) for v in np.ravel(x)]).reshape(np.shape(x))

    def log_density(self, x):
        with np.errstate(divide="ignore"):
            return np.log(self.density(x))

    def cdf(self, x):
        sup = np.array([float(a) for a in self.support])
        cum = np.cumsum([float(p) for p in self.probs])
        idx = np.searchsorted(sup, np.asarray(x, dtype=float), side="right")
        return np.where(idx > 0, cum[np.maximum(idx - 1, 0)], 0.0)

    def sample(self, rng, size=None):
        p = np.array([float(v) for v in self.probs])
        if abs(p.sum() - 1.0) > 1e-12:
            raise ValueError("cannot sample from a sub-probability vector")
        return rng.choice(np.array([float(a) for a in self.support]), size=size, p=p / p.sum())


# ---------------------------------------------------------------------------
# Likelihood-ratio pairs
# ---------------------------------------------------------------------------


class LikelihoodRatioPair(ABC):
    """Null ``p0`` (mass ``null_mass``) against alternative ``p1``.

    The "masses" queried by the solver are
    ``null_below(c, strict)``  = P0[r < c]  (or ``<=`` when not strict) and
    ``alt_above(c, strict)``   = P1[r > c]  (or ``>=`` when not strict),
    with ``r = p1/p0`` taking the value ``+inf`` where ``p0 = 0 < p1``.
    """

    null_model: DensityModel
    alt_model: DensityModel
    null_mass = 1.0
    discrete = False

    @abstractmethod
    def log_ratio(self, x): ...

    def ratio(self, x):
        with np.errstate(over="ignore"):
            return np.exp(self.log_ratio(x))

    @abstractmethod
    def null_below(self, c, strict: bool = True): ...

    @abstractmethod
    def alt_above(self, c, strict: bool = True): ...

    def ratio_cdf_null(self, c):
        """P0[p1/p0 <= c]."""
        return self.null_below(c, strict=False)

    def ratio_cdf_alt(self, c):
        """P1[p1/p0 <= c]."""
        return 1 - self.alt_above(c, strict=True)

    @abstractmethod
    def expected_ratio_band_null(self, c_lo, c_hi):
        """E_{P0}[r * 1(c_lo < r <= c_hi)]."""

    @abstractmethod
    def expected_clamp(self, c_lo, c_hi, model=None):
        """E_model[max(c_lo, min(c_hi, r))]; ``model=None`` means the null."""

    @abstractmethod
    def expected_log_clamp(self, c_lo, c_hi, model):
        """E_model[log max(c_lo, min(c_hi, r))]."""

    @abstractmethod
    def upper_point(self, c_hi) -> float:
        """A point x with r(x) >= c_hi (clamp saturates at the top)."""

    def clamp(self, x, c_lo, c_hi):
        r = self.ratio(x)
        return np.where(r >= c_hi, c_hi, np.where(r <= c_lo, c_lo, r))


class GaussianLocationPair(LikelihoodRatioPair):
    """``N(mu0, s^2)`` (optionally scaled to mass ``k``) vs ``N(mu1, s^2)``.

    In the oriented standard coordinate ``w = sign(mu1 - mu0) (x - mu0) / s``
    the log-ratio is ``d*w - d^2/2 - log k`` with ``d = |mu1 - mu0| / s``,
    so every query reduces to normal CDF evaluations.
    """

    def __init__(self, mu0: float, mu1: float, sigma: float = 1.0, null_mass: float = 1.0):
        if mu0 == mu1:
            raise ValueError("degenerate pair: equal means give ratio identically 1")
        if not 0 < null_mass <= 1:
            raise ValueError("null mass must lie in (0, 1]")
        self.mu0 = float(mu0)
        self.mu1 = float(mu1)
        self.sigma = float(sigma)
        self.null_mass = float(null_mass)
        self.sign = 1.0 if mu1 > mu0 else -1.0
        self.d = abs(self.mu1 - self.mu0) / self.sigma
        self.null_model = Gaussian(mu0, sigma)
        self.alt_model = Gaussian(mu1, sigma)
        self._log_k = math.log(self.null_mass)

    def _w(self, x):
        return self.sign * (np.asarray(x, dtype=float) - self.mu0) / self.sigma

    def _x(self, w):
        return self.mu0 + self.sign * self.sigma * w

    def _t(self, c):
        """Oriented-coordinate level of ``{r <= c}``."""
        c = np.asarray(c, dtype=float)
        with np.errstate(divide="ignore"):
            return (np.log(c) + self._log_k + 0.5 * self.d**2) / self.d

    def log_ratio(self, x):
        return self.d * self._w(x) - 0.5 * self.d**2 - self._log_k

    def null_below(self, c, strict=True):
        return self.null_mass * ndtr(self._t(c))

    def alt_above(self, c, strict=True):
        return ndtr(self.d - self._t(c))

    def expected_ratio_band_null(self, c_lo, c_hi):
        return ndtr(self._t(c_hi) - self.d) - ndtr(self._t(c_lo) - self.d)

    def _gauss_offset(self, model):
        """Oriented mean ``m`` of a same-variance Gaussian model, else None."""
        if isinstance(model, Gaussian) and model.sigma == self.sigma:
            return self.sign * (model.mu - self.mu0) / self.sigma
        return None

    def _region_mass(self, model, t, below=True):
        x = self._x(t)
        lower = model.cdf(x) if self.sign > 0 else model.total_mass - model.cdf(x)
        return lower if below else model.total_mass - lower

    def expected_clamp(self, c_lo, c_hi, model=None):
        t_lo, t_hi = self._t(c_lo), self._t(c_hi)
        if model is None:
            # null: mass k, oriented mean 0
            return (
                c_lo * self.null_mass * ndtr(t_lo)
                + (ndtr(t_hi - self.d) - ndtr(t_lo - self.d))
                + c_hi * self.null_mass * ndtr(-t_hi)
            )
        if isinstance(model, MixtureModel):
            return sum(w * self.expected_clamp(c_lo, c_hi, m) for w, m in model.components if w > 0)
        m = self._gauss_offset(model)
        if m is not None:
            band = math.exp(self.d * m - self._log_k) * (
                ndtr(t_hi - m - self.d) - ndtr(t_lo - m - self.d)
            )
            return c_lo * ndtr(t_lo - m) + band + c_hi * ndtr(m - t_hi)
        return self._generic_expect(lambda x: self.ratio(x), c_lo, c_hi, c_lo, c_hi, model)

    def expected_log_clamp(self, c_lo, c_hi, model):
        t_lo, t_hi = self._t(c_lo), self._t(c_hi)
        if isinstance(model, MixtureModel):
            return sum(w * self.expected_log_clamp(c_lo, c_hi, m) for w, m in model.components if w > 0)
        m = self._gauss_offset(model)
        if m is not None:
            a, b = t_lo - m, t_hi - m
            pb = ndtr(b) - ndtr(a)
            phi = lambda z: math.exp(-0.5 * z * z - LOG_SQRT_2PI)
            band = self.d * (m * pb + phi(a) - phi(b)) - (0.5 * self.d**2 + self._log_k) * pb
            return math.log(c_lo) * ndtr(a) + band + math.log(c_hi) * ndtr(-b)
        return self._generic_expect(
            lambda x: self.log_ratio(x), math.log(c_lo), math.log(c_hi), c_lo, c_hi, model
        )

    def _generic_expect(self, fn, v_lo, v_hi, c_lo, c_hi, model):
        """Piecewise E_model[clip(fn)]: constants outside the band, quadrature inside."""
        t_lo, t_hi = float(self._t(c_lo)), float(self._t(c_hi))
        lo_mass = self._region_mass(model, t_lo, below=True)
        hi_mass = self._region_mass(model, t_hi, below=False)
        xa, xb = sorted((float(self._x(t_lo)), float(self._x(t_hi))))
        band, _ = integrate.quad(
            lambda x: float(fn(x)) * float(model.density(x)), xa, xb,
            epsabs=1e-12, epsrel=1e-10, limit=200,
        )
        return v_lo * lo_mass + band + v_hi * hi_mass

    def upper_point(self, c_hi):
        return float(self._x(self._t(c_hi) + 1.0))


class DiscretePair(LikelihoodRatioPair):
    """Finite-support pair evaluated by exact summation.

    When all inputs are :class:`~fractions.Fraction` (or int) every query
    returns an exact rational, which the oracle exploits.
    """

    discrete = True

    def __init__(self, support, probs0, probs1, *, allow_subprobability: bool = False):
        if not (len(support) == len(probs0) == len(probs1)):
            raise ValueError("mismatched lengths: support, probs0 and probs1 must agree")
        if any(p < 0 for p in probs0) or any(p < 0 for p in probs1):
            raise ValueError("negative mass")
        m0, m1 = sum(probs0), sum(probs1)
        if abs(m1 - 1) > 1e-12:
            raise ValueError("probs1 must be a probability vector")
        if allow_subprobability:
            if not 0 < m0 <= 1 + 1e-12:
                raise ValueError("probs0 must have total mass in (0, 1]")
        elif abs(m0 - 1) > 1e-12:
            raise ValueError("probs0 must be a probability vector")
        keep = [i for i in range(len(support)) if probs0[i] > 0 or probs1[i] > 0]
        self.support = tuple(support[i] for i in keep)
        self.p0 = tuple(probs0[i] for i in keep)
        self.p1 = tuple(probs1[i] for i in keep)
        self.null_model = DiscreteDist(self.support, self.p0)
        self.alt_model = DiscreteDist(self.support, self.p1)
        self.null_mass = sum(self.p0)
        self.exact = all(isinstance(v, (int, Fraction)) for v in self.p0 + self.p1)
        self.ratios = tuple(
            (b / a if self.exact else float(b) / float(a)) if a > 0 else math.inf
            for a, b in zip(self.p0, self.p1)
        )
        self._index = {float(a): i for i, a in enumerate(self.support)}

    def _zero(self):
        return Fraction(0) if self.exact else 0.0

    def _atom(self, x) -> int:
        i = self._index.get(float(x))
        if i is None:
            raise ValueError(f"{x!r} is not a support atom (both densities vanish)")
        return i

    def ratio(self, x):
        if np.ndim(x) == 0:
            return self.ratios[self._atom(x)]
        return np.array([float(self.ratios[self._atom(v)]) for v in np.ravel(x)]).reshape(np.shape(x))

    def log_ratio(self, x):
        with np.errstate(divide="ignore"):
            return np.log(np.asarray(self.ratio(x), dtype=float))

    def null_below(self, c, strict=True):
        return sum((p for p, r in zip(self.p0, self.ratios) if (r < c if strict else r <= c)), self._zero())

    def alt_above(self, c, strict=True):
        return sum((p for p, r in zip(self.p1, self.ratios) if (r > c if strict else r >= c)), self._zero())

    def expected_ratio_band_null(self, c_lo, c_hi):
        return sum(
            (p * r for p, r in zip(self.p0, self.ratios) if p > 0 and c_lo < r <= c_hi), self._zero()
        )

    def clamp_values(self, c_lo, c_hi) -> tuple:
        """Clamped ratio at every atom (exact when the pair is exact)."""
        return tuple(c_lo if r <= c_lo else (c_hi if r >= c_hi else r) for r in self.ratios)

    def _weights(self, model):
        if model is None:
            return self.p0
        if isinstance(model, DiscreteDist):
            return tuple(model.prob_of(a) for a in self.support)
        if len(model) == len(self.support):
            return tuple(model)
        raise ValueError("data model must be a DiscreteDist or a weight vector on the support")

    def expected_clamp(self, c_lo, c_hi, model=None):
        w = self._weights(model)
        return sum((wi * v for wi, v in zip(w, self.clamp_values(c_lo, c_hi))), self._zero())

    def expected_log_clamp(self, c_lo, c_hi, model):
        w = self._weights(model)
        return float(sum(float(wi) * math.log(v) for wi, v in zip(w, self.clamp_values(c_lo, c_hi)) if wi > 0))

    def clamp(self, x, c_lo, c_hi):
        vals = self.clamp_values(c_lo, c_hi)
        if np.ndim(x) == 0:
            return vals[self._atom(x)]
        return np.array([float(vals[self._atom(v)]) for v in np.ravel(x)]).reshape(np.shape(x))

    def upper_point(self, c_hi):
        best = max(range(len(self.ratios)), key=lambda i: self.ratios[i])
        if self.ratios[best] < c_hi:
            raise ValueError("clamp has an empty upper region")
        return float(self.support[best])


class GenericPair(LikelihoodRatioPair):
    """Continuous models without a closed form for the ratio CDFs.

    Level sets ``{r <= c}`` are found by scanning the log-ratio on the grid
    ``x = scale * tan(u)`` and refining each crossing with Brent's method;
    masses then come from the models' CDFs. Crossings closer together than
    the grid spacing can be missed.
    """

    def __init__(self, null_model: DensityModel, alt_model: DensityModel, *, grid_size: int = 4001, scale: float = 1.0):
        if null_model.discrete or alt_model.discrete:
            raise ValueError("no mixed-type pairs: use DiscretePair for counting measure")
        self.null_model = null_model
        self.alt_model = alt_model
        u = np.linspace(-0.5 * math.pi, 0.5 * math.pi, grid_size + 2)[1:-1]
        self._grid = scale * np.tan(u)
        self._lr_grid = self.log_ratio(self._grid)

    def log_ratio(self, x):
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.asarray(self.alt_model.log_density(x) - self.null_model.log_density(x), dtype=float)

    def _level_set(self, c) -> list[tuple[float, float]]:
        """Intervals whose union is ``{x : r(x) <= c}``."""
        lc = math.log(c) if c > 0 else -math.inf
        inside = self._lr_grid <= lc
        if not inside.any():
            return []
        h = lambda x: float(self.log_ratio(x)) - lc
        out = []
        start = -math.inf if inside[0] else None
        for i in np.flatnonzero(inside[1:] != inside[:-1]) + 1:
            xa, xb = self._grid[i - 1], self._grid[i]
            try:
                root = optimize.brentq(h, xa, xb, xtol=1e-14, rtol=4 * np.finfo(float).eps)
            except ValueError:
                root = 0.5 * (xa + xb)
            if inside[i]:
                start = root
            else:
                out.append((start, root))
                start = None
        if start is not None:
            out.append((start, math.inf))
        return out

    @staticmethod
    def _mass(model, intervals):
        tot = 0.0
        for a, b in intervals:
            fb = model.total_mass if b == math.inf else float(model.cdf(b))
            fa = 0.0 if a == -math.inf else float(model.cdf(a))
            tot += fb - fa
        return tot

    def null_below(self, c, strict=True):
        return self._mass(self.null_model, self._level_set(c))

    def alt_above(self, c, strict=True):
        return self.alt_model.total_mass - self._mass(self.alt_model, self._level_set(c))

    def expected_ratio_band_null(self, c_lo, c_hi):
        return self._mass(self.alt_model, self._level_set(c_hi)) - self._mass(self.alt_model, self._level_set(c_lo))

    def _integral(self, fn, model, intervals):
        tot = 0.0
        for a, b in intervals:
            val, _ = integrate.quad(
                lambda x: float(fn(x)) * float(model.density(x)), a, b, epsabs=1e-11, epsrel=1e-10, limit=200
            )
            tot += val
        return tot

    def expected_clamp(self, c_lo, c_hi, model=None):
        below_lo, below_hi = self._level_set(c_lo), self._level_set(c_hi)
        if model is None:
            band = self.expected_ratio_band_null(c_lo, c_hi)
            model = self.null_model
        else:
            band = self._integral(self.ratio, model, below_hi) - self._integral(self.ratio, model, below_lo)
        return c_lo * self._mass(model, below_lo) + band + c_hi * (model.total_mass - self._mass(model, below_hi))

    def expected_log_clamp(self, c_lo, c_hi, model):
        below_lo, below_hi = self._level_set(c_lo), self._level_set(c_hi)
        band_hi = self._integral(self.log_ratio, model, below_hi)
        band_lo = self._integral(self.log_ratio, model, below_lo)
        m_lo, m_hi = self._mass(model, below_lo), self._mass(model, below_hi)
        return math.log(c_lo) * m_lo + (band_hi - band_lo) + math.log(c_hi) * (model.total_mass - m_hi)

    def upper_point(self, c_hi):
        above = self._lr_grid >= math.log(c_hi)
        if not above.any():
            raise ValueError("clamp has an empty upper region")
        return float(self._grid[np.flatnonzero(above)[len(np.flatnonzero(above)) // 2]])


# ---------------------------------------------------------------------------
# Constructors
# ---------------------------------------------------------------------------


def make_gaussian_location_pair(mu0: float, mu1: float, sigma: float = 1.0) -> GaussianLocationPair:
    return GaussianLocationPair(mu0, mu1, sigma)


def make_discrete_pair(support, probs0, probs1, *, allow_subprobability: bool = False) -> DiscretePair:
    return DiscretePair(support, probs0, probs1, allow_subprobability=allow_subprobability)


def make_pair(null_model: DensityModel, alt_model: DensityModel, null_mass: float = 1.0) -> LikelihoodRatioPair:
    """Pick the cheapest exact representation for ``(null_model, alt_model)``.

    Identical same-variance Gaussians are routed to :class:`GenericPair`
    (ratio identically 1); the solver then reports a degenerate pair.
    """
    if isinstance(null_model, DiscreteDist) and isinstance(alt_model, DiscreteDist):
        support = sorted(set(null_model.support) | set(alt_model.support))
        p0 = [null_model.prob_of(a) * null_mass if null_mass != 1 else null_model.prob_of(a) for a in support]
        p1 = [alt_model.prob_of(a) for a in support]
        return DiscretePair(support, p0, p1, allow_subprobability=null_mass != 1)
    if null_model.discrete or alt_model.discrete:
        raise ValueError("no mixed-type pairs: both models must share a reference measure")
    if (
        isinstance(null_model, Gaussian)
        and isinstance(alt_model, Gaussian)
        and null_model.sigma == alt_model.sigma
        and null_model.mu != alt_model.mu
    ):
        return GaussianLocationPair(null_model.mu, alt_model.mu, null_model.sigma, null_mass)
    if null_mass != 1:
        raise ValueError("sub-probability nulls are supported for Gaussian and discrete pairs only")
    return GenericPair(null_model, alt_model)


def kl_divergence(p: DensityModel, q: DensityModel) -> float:
    """KL(p, q) for same-variance Gaussians (closed form) or discrete laws."""
    if isinstance(p, Gaussian) and isinstance(q, Gaussian):
        return math.log(q.sigma / p.sigma) + (p.sigma**2 + (p.mu - q.mu) ** 2) / (2 * q.sigma**2) - 0.5
    if isinstance(p, DiscreteDist) and isinstance(q, DiscreteDist):
        tot = 0.0
        for a, pa in zip(p.support, p.probs):
            if pa > 0:
                qa = q.prob_of(a)
                if qa == 0:
                    return math.inf
                tot += float(pa) * math.log(float(pa) / float(qa))
        return tot
    raise TypeError("closed-form KL only for Gaussian or discrete pairs")


__all__ = [
    "Cauchy",
    "ContaminatedModel",
    "DensityModel",
    "DiscreteDist",
    "DiscretePair",
    "Gaussian",
    "GaussianLocationPair",
    "GenericPair",
    "LikelihoodRatioPair",
    "MixtureModel",
    "PointMass",
    "kl_divergence",
    "make_contaminated_sampler",
    "make_discrete_pair",
    "make_gaussian_location_pair",
    "make_pair",
    "make_rng",
]
