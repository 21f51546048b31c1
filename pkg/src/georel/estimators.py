"""Point estimators of R(t), R_s(t) and the stress-strength reliability R.

Complete samples are summarised by :class:`~georel.combinat.SuffStats`;
type-I censored samples by :class:`CensoredStats`.  Every estimator has a
scalar form here; :mod:`georel.simlab` reuses the array helpers
(``*_array``) so that Monte Carlo runs share the exact same formulas.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .combinat import SuffStats, conditional_survival, conditional_tables
from .geomdist import SystemSpec, system_reliability

METHODS = ("mle", "mle-censored", "ue", "naive", "as-published", "exact-rb")
TARGETS = ("R(t)", "Rs(t)", "R")
SS_VARIANTS = ("exact-rb", "as-published")


class EstimatorDomainError(ValueError):
    """An estimator is undefined for the supplied data or configuration."""


@dataclass(frozen=True)
class CensoredSample:
    """Units on test ``n``; failures observed at or before cycle ``c``."""

    c: int
    observed: tuple[int, ...]
    n: int

    def __post_init__(self):
        object.__setattr__(self, "observed", tuple(int(v) for v in self.observed))
        if len(self.observed) > self.n:
            raise ValueError("more observed failures than units on test")
        if any(v > self.c for v in self.observed):
            raise ValueError("observed failures must not exceed the censoring cycle")

    @classmethod
    def from_complete(cls, values: Sequence[int], c: int) -> "CensoredSample":
        values = [int(v) for v in values]
        return cls(c=c, observed=tuple(v for v in values if v <= c), n=len(values))

    @property
    def p(self) -> int:
        return len(self.observed)


@dataclass(frozen=True)
class CensoredStats:
    xmin: int
    p: int
    s_star: int

    def __post_init__(self):
        if self.p < 1:
            raise EstimatorDomainError("no failures observed")
        if self.s_star < 0:
            raise ValueError("s_star must be >= 0")


@dataclass(frozen=True)
class EstimateRecord:
    method: str
    target: str
    value: float
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}")
        if self.target not in TARGETS:
            raise ValueError(f"unknown target {self.target!r}")
        # The as-published stress-strength form is not a probability in general.
        if self.method != "as-published" and not -1e-12 <= self.value <= 1 + 1e-12:
            raise ValueError(f"estimate {self.value} outside [0, 1]")


# -- sufficient statistics ---------------------------------------------------


def suff_stats(values: Sequence[int]) -> SuffStats:
    x = np.asarray(values, dtype=np.int64)
    if x.size == 0:
        raise EstimatorDomainError("empty sample")
    lo = int(x.min())
    return SuffStats(xmin=lo, s=int((x - lo).sum()), n=int(x.size))


def censored_stats(sample: CensoredSample) -> CensoredStats:
    if sample.p == 0:
        raise EstimatorDomainError("no failures observed: MLE of r undefined")
    lo = min(sample.observed)
    s_star = sum(v - lo for v in sample.observed) + (sample.n - sample.p) * (sample.c + 1 - lo)
    return CensoredStats(xmin=lo, p=sample.p, s_star=s_star)


# -- maximum likelihood --------------------------------------------------------


def mle_params(stats: SuffStats) -> tuple[int, float]:
    return stats.xmin, stats.s / (stats.n + stats.s)


def mle_reliability_array(xmin, s, n, t):
    """``[s/(n+s)]**(t - xmin)`` beyond the minimum, 1 at or below it.

    Works elementwise; for censored data pass ``(xmin, s_star, p)``.
    """
    xmin = np.asarray(xmin)
    theta_hat = np.asarray(s, dtype=float) / (np.asarray(n) + np.asarray(s))
    k = np.maximum(t - xmin, 0)
    return np.where(t <= xmin, 1.0, theta_hat**k)


def mle_reliability(stats: SuffStats, t: int) -> float:
    if t <= stats.xmin:
        return 1.0
    return (stats.s / (stats.n + stats.s)) ** (t - stats.xmin)


def mle_system_reliability(stats: SuffStats, t: int, spec: SystemSpec) -> float:
    if not isinstance(spec, SystemSpec):
        raise TypeError("spec must be a SystemSpec")
    if t <= stats.xmin:
        return 1.0
    return system_reliability(mle_reliability(stats, t), spec)


def mle_reliability_censored(cstats: CensoredStats, t: int) -> float:
    if t <= cstats.xmin:
        return 1.0
    return (cstats.s_star / (cstats.p + cstats.s_star)) ** (t - cstats.xmin)


def mle_system_reliability_censored(cstats: CensoredStats, t: int, spec: SystemSpec) -> float:
    if not isinstance(spec, SystemSpec):
        raise TypeError("spec must be a SystemSpec")
    if t <= cstats.xmin:
        return 1.0
    return system_reliability(mle_reliability_censored(cstats, t), spec)


# -- Rao-Blackwellised estimators ----------------------------------------------


def ue_reliability(stats: SuffStats, t: int) -> float:
    """Conditional expectation of ``I(X_1 >= t)`` given ``(X(1), S)``.

    Covers ``n = 1`` (indicator of ``t <= X(1)``), ``n = 2`` (1/2 on
    ``X(1) < t <= X(1) + S``) and both ``n >= 3`` regimes.
    """
    return conditional_survival(stats, t)


def ue_system_reliability(stats: SuffStats, t: int, spec: SystemSpec) -> float:
    if not isinstance(spec, SystemSpec):
        raise TypeError("spec must be a SystemSpec")
    if not 2 <= spec.m < stats.n:
        raise EstimatorDomainError(f"unbiased R_s(t) needs 2 <= m < n, got m={spec.m}, n={stats.n}")
    if t <= stats.xmin:
        return 1.0
    if t > stats.xmin + stats.s:
        return 0.0
    return system_reliability(ue_reliability(stats, t), spec)


def naive_unbiased_reliability(values: Sequence[int], t: int) -> float:
    x = np.asarray(values)
    if x.size == 0:
        raise EstimatorDomainError("empty sample")
    return float(np.mean(x >= t))


# -- stress-strength -------------------------------------------------------------


def _ss_mle(xmin1, s1, n1, xmin2, s2, n2) -> float:
    delta = xmin1 - xmin2
    rho = (n1 * n2 + n1 * s2) / (n1 * n2 + n1 * s2 + n2 * s1)
    if delta > 0:
        return rho * (s2 / (n2 + s2)) ** delta
    if delta < 0:
        return 1.0 - (1.0 - rho) * (s1 / (n1 + s1)) ** (-delta)
    return rho


def mle_stress_strength(stats_x: SuffStats, stats_y: SuffStats) -> float:
    return _ss_mle(stats_x.xmin, stats_x.s, stats_x.n, stats_y.xmin, stats_y.s, stats_y.n)


def mle_stress_strength_censored(cstats_x: CensoredStats, cstats_y: CensoredStats) -> float:
    return _ss_mle(cstats_x.xmin, cstats_x.s_star, cstats_x.p, cstats_y.xmin, cstats_y.s_star, cstats_y.p)


def mle_stress_strength_array(xmin1, s1, n1, xmin2, s2, n2):
    xmin1, s1, xmin2, s2 = (np.asarray(a, dtype=float) for a in (xmin1, s1, xmin2, s2))
    delta = xmin1 - xmin2
    rho = (n1 * n2 + n1 * s2) / (n1 * n2 + n1 * s2 + n2 * s1)
    up = rho * (s2 / (n2 + s2)) ** np.maximum(delta, 0)
    down = 1.0 - (1.0 - rho) * (s1 / (n1 + s1)) ** np.maximum(-delta, 0)
    return np.where(delta > 0, up, np.where(delta < 0, down, rho))


def _survival_at(stats: SuffStats, x: np.ndarray) -> np.ndarray:
    """Vectorised ``conditional_survival(stats, x)``."""
    surv = conditional_tables(stats.n, stats.s)[1]
    d = x - stats.xmin
    inside = surv[np.clip(d, 0, stats.s)]
    return np.where(d <= 0, 1.0, np.where(d > stats.s, 0.0, inside))


def _exact_rb(stats_x: SuffStats, stats_y: SuffStats) -> float:
    f = conditional_tables(stats_x.n, stats_x.s)[0]
    xs = stats_x.xmin + np.arange(stats_x.s + 1)
    return float(min(1.0, max(0.0, np.dot(f, _survival_at(stats_y, xs)))))


def _as_published(stats_x: SuffStats, stats_y: SuffStats) -> float:
    # Every inner sum over y runs from some x >= Y(1) to W2, i.e. it is the
    # conditional survival of Y_1 at x.
    fx = conditional_tables(stats_x.n, stats_x.s)[0]
    x1, y1, n1 = stats_x.xmin, stats_y.xmin, stats_x.n
    xs = x1 + np.arange(stats_x.s + 1)
    weighted = fx * _survival_at(stats_y, xs)

    def tail_from(x_from):
        return float(weighted[max(x_from - x1, 0):].sum())

    if x1 < y1:
        between = float(fx[1:y1 - x1 + 1].sum())
        return 1 / n1 + between + tail_from(y1)
    if x1 == y1:
        return 1 / n1 + tail_from(x1)
    return float(_survival_at(stats_y, np.array([x1]))[0]) / n1 + tail_from(x1 + 1)


def ue_stress_strength(stats_x: SuffStats, stats_y: SuffStats, variant: str = "exact-rb") -> float:
    """Rao-Blackwellised estimator of ``P(X <= Y)``.

    ``exact-rb`` is ``sum_x f(x | X(1), S1) * P(Y_1 >= x | Y(1), S2)``, the
    exact conditional expectation of ``I(X_1 <= Y_1)``.  ``as-published``
    evaluates the three-case display with its leading ``1/n1`` terms verbatim;
    it is biased and may leave ``[0, 1]``.
    """
    if variant == "exact-rb":
        return _exact_rb(stats_x, stats_y)
    if variant == "as-published":
        return _as_published(stats_x, stats_y)
    raise ValueError(f"unknown variant {variant!r}; expected one of {SS_VARIANTS}")


def naive_unbiased_stress_strength(x_values, y_values, strict: bool = False) -> float:
    """Fraction of pairs with ``x <= y`` (``x < y`` when ``strict``)."""
    x = np.asarray(x_values)
    y = np.asarray(y_values)
    if x.size == 0 or y.size == 0:
        raise EstimatorDomainError("empty sample")
    cmp = np.less if strict else np.less_equal
    return float(cmp(x[:, None], y[None, :]).mean())
