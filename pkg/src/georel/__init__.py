"""Reliability estimation for the two-parameter geometric lifetime model."""

from .combinat import SuffStats, brute_conditional, conditional_pmf, conditional_survival
from .estimators import (
    CensoredSample,
    EstimatorDomainError,
    censored_stats,
    mle_reliability,
    mle_stress_strength,
    suff_stats,
    ue_reliability,
    ue_stress_strength,
    ue_system_reliability,
)
from .geomdist import GeoParams, StressStrengthParams, SystemSpec, reliability, stress_strength, system_reliability

__version__ = "0.1.0"

__all__ = [
    "CensoredSample",
    "EstimatorDomainError",
    "GeoParams",
    "StressStrengthParams",
    "SuffStats",
    "SystemSpec",
    "brute_conditional",
    "censored_stats",
    "conditional_pmf",
    "conditional_survival",
    "mle_reliability",
    "mle_stress_strength",
    "reliability",
    "stress_strength",
    "suff_stats",
    "system_reliability",
    "ue_reliability",
    "ue_stress_strength",
    "ue_system_reliability",
]
