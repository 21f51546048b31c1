"""Two-parameter geometric lifetime distribution.

``X ~ Geo(r, theta)`` has mass ``(1 - theta) * theta**(x - r)`` on
``x = r, r + 1, ...``.  ``r`` is a minimum warranty life measured in cycles.
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass
from numbers import Integral, Real

import numpy as np

# Smallest positive normal double; anything below is reported as 0.
_LOG_TINY = math.log(sys.float_info.min)


@dataclass(frozen=True)
class GeoParams:
    """Warranty offset ``r`` and success probability ``theta``."""

    r: int
    theta: float

    def __post_init__(self):
        if not isinstance(self.r, Integral) or isinstance(self.r, bool) or self.r < 0:
            raise ValueError(f"r must be a nonnegative integer, got {self.r!r}")
        if not isinstance(self.theta, Real) or not 0 < self.theta < 1:
            raise ValueError(f"theta must lie in (0, 1), got {self.theta!r}")


@dataclass(frozen=True)
class SystemSpec:
    """A k-out-of-m system: works iff at least ``k`` of ``m`` components work."""

    k: int
    m: int

    def __post_init__(self):
        if not (isinstance(self.k, Integral) and isinstance(self.m, Integral)):
            raise ValueError("k and m must be integers")
        if not 1 <= self.k <= self.m:
            raise ValueError(f"need 1 <= k <= m, got k={self.k}, m={self.m}")


@dataclass(frozen=True)
class StressStrengthParams:
    stress: GeoParams
    strength: GeoParams

    @property
    def rho(self) -> float:
        t1, t2 = self.stress.theta, self.strength.theta
        return (1 - t1) / (1 - t1 * t2)

    @property
    def delta(self) -> int:
        return self.stress.r - self.strength.r


def _power(theta, k: int) -> float:
    """``theta**k`` for ``k >= 0`` with subnormal results flushed to 0."""
    if k == 0:
        return 1.0
    log_value = k * math.log(theta)
    if log_value < _LOG_TINY:
        return 0.0
    return float(theta**k)


def pmf(params: GeoParams, x: int) -> float:
    if x < params.r:
        return 0.0
    return (1 - params.theta) * _power(params.theta, x - params.r)


def reliability(params: GeoParams, t: int) -> float:
    """Survival probability ``P(X >= t)``; equal to 1 below the warranty offset."""
    if t <= params.r:
        return 1.0
    return _power(params.theta, t - params.r)


def system_reliability(component_r, spec: SystemSpec):
    """Reliability of a k-out-of-m system of identical components.

    Accepts a scalar or an array of component reliabilities.
    """
    if not isinstance(spec, SystemSpec):
        raise TypeError("spec must be a SystemSpec")
    p = np.asarray(component_r, dtype=float)
    if np.any((p < 0) | (p > 1)):
        raise ValueError("component reliability must lie in [0, 1]")
    q = 1.0 - p
    total = np.zeros_like(p)
    for i in range(spec.k, spec.m + 1):
        total = total + math.comb(spec.m, i) * p**i * q ** (spec.m - i)
    total = np.minimum(total, 1.0)
    if total.ndim == 0:
        return float(total)
    return total


def stress_strength(params: StressStrengthParams) -> float:
    """``P(X <= Y)`` for independent stress ``X`` and strength ``Y``.

    At ``delta = r1 - r2 = 0`` both branches reduce to ``rho``.
    """
    rho = params.rho
    delta = params.delta
    if delta > 0:
        return rho * _power(params.strength.theta, delta)
    if delta < 0:
        return 1.0 - (1.0 - rho) * _power(params.stress.theta, -delta)
    return rho


def population_mean(params: GeoParams) -> float:
    return params.r + params.theta / (1 - params.theta)


def sample(params: GeoParams, n: int, stream: np.random.Generator) -> np.ndarray:
    """Draw ``n`` i.i.d. lifetimes by inverse transform.

    ``x = r + floor(ln(u) / ln(theta))`` with ``u`` uniform on ``(0, 1]``.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    u = 1.0 - stream.random(n)
    return params.r + np.floor(np.log(u) / math.log(params.theta)).astype(np.int64)
