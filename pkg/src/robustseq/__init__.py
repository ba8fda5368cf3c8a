"""Robust anytime-valid sequential tests under epsilon-contamination."""

from .censoring import CensoredPair, solve_thresholds
from .dists import (
    Cauchy,
    ContaminatedModel,
    DiscreteDist,
    DiscretePair,
    Gaussian,
    GaussianLocationPair,
    GenericPair,
    MixtureModel,
    make_pair,
    make_rng,
)
from .eprocess import EProcess, anytime_p_value, run_eprocess
from .evalues import EFactor, make_simple_efactor
from .oracle import certify_efactor, exact_growth_rate
from .plugin import MedianEstimator, NonzeroMean, OutsideInterval, PluginTest
from .ripr import CombinedTest, CompositeNullSpec, gaussian_location_family, make_ripr_efactor
from .theory import asymptotic_sweep, theoretical_slope

__all__ = [
    "Cauchy", "CensoredPair", "CombinedTest", "CompositeNullSpec", "ContaminatedModel",
    "DiscreteDist", "DiscretePair", "EFactor", "EProcess", "Gaussian", "GaussianLocationPair",
    "GenericPair", "MedianEstimator", "MixtureModel", "NonzeroMean", "OutsideInterval",
    "PluginTest", "anytime_p_value", "asymptotic_sweep", "certify_efactor", "exact_growth_rate",
    "gaussian_location_family", "make_pair", "make_rng", "make_ripr_efactor",
    "make_simple_efactor", "run_eprocess", "solve_thresholds", "theoretical_slope",
]
