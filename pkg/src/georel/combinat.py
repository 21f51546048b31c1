"""Exact conditional distribution of one observation given ``(X(1), S)``.

Given the sample minimum ``xmin`` and ``s = sum(x_i - xmin)``, every sample
consistent with ``(xmin, s)`` is equally likely, so the conditional law of
``X_1`` is a ratio of composition counts.  Counts are big integers; floats are
only produced at the very end.

The module also ships brute-force enumerators used as independent oracles.
"""

from __future__ import annotations

import itertools
import math
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np
from scipy.special import gammaln

from .geomdist import GeoParams

ENUMERATION_LIMIT = 10**7

# Above this n + s the float log-gamma path is used instead of big integers.
# Relative accuracy target of that path: 1e-10.
LOGGAMMA_THRESHOLD = 5000


class EnumerationTooLarge(ValueError):
    pass


@dataclass(frozen=True)
class SuffStats:
    """Sufficient summary of a complete sample: minimum, deviation sum, size."""

    xmin: int
    s: int
    n: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"n must be >= 1, got {self.n}")
        if self.s < 0:
            raise ValueError(f"s must be >= 0, got {self.s}")
        if self.n == 1 and self.s != 0:
            raise ValueError("a single observation has s = 0")


def binom(a: int, b: int) -> int:
    """``C(a, b)`` as an exact integer, zero outside ``0 <= b <= a``.

    A negative ``a`` also yields 0 (no compositions exist).
    """
    if a < 0 or b < 0 or b > a:
        return 0
    return math.comb(a, b)


def _formula_counts(n: int, s: int) -> tuple[list[int], int]:
    """Counts following the four displayed cases (n=1, n=2, n>=3 with S<n / S>=n)."""
    if n == 1:
        return [1], 1
    if n == 2:
        if s == 0:
            return [1], 1
        nums = [0] * (s + 1)
        nums[0] = nums[s] = 1
        return nums, 2
    if s < n:
        denom = binom(s + n - 1, s)
        return [binom(s - d + n - 2, s - d) for d in range(s + 1)], denom
    denom = binom(s + n - 1, s) - binom(s - 1, n - 1)
    nums = [binom(s + n - 2, s)]
    for d in range(1, s + 1):
        if d <= s - (n - 1):
            nums.append(binom(s - d + n - 2, s - d) - binom(s - d - 1, n - 2))
        else:
            nums.append(binom(s - d + n - 2, s - d))
    return nums, denom


def _fast_counts(n: int, s: int) -> tuple[list[int], int]:
    """Same counts as :func:`_formula_counts`, built by exact multiplicative recurrences.

    ``A(j) = C(j + n - 2, n - 2)`` and ``B(j) = C(j - 1, n - 2)`` are stepped in
    ``j = s - d`` so no large binomial is recomputed from scratch.
    """
    if n < 3:
        return _formula_counts(n, s)
    a = [1] * (s + 1)
    for j in range(1, s + 1):
        a[j] = a[j - 1] * (j + n - 2) // j
    b = [0] * (s + 1)
    if s >= n - 1:
        b[n - 1] = 1
        for j in range(n, s + 1):
            b[j] = b[j - 1] * (j - 1) // (j - n + 1)
    nums = [a[s]] + [a[s - d] - b[s - d] for d in range(1, s + 1)]
    denom = binom(s + n - 1, s) - binom(s - 1, n - 1)
    return nums, denom


def conditional_pmf_exact(stats: SuffStats, x: int) -> Fraction:
    d = x - stats.xmin
    if d < 0 or d > stats.s:
        return Fraction(0)
    nums, denom = _formula_counts(stats.n, stats.s)
    return Fraction(nums[d], denom)


def conditional_pmf(stats: SuffStats, x: int) -> float:
    _check(stats)
    d = x - stats.xmin
    if d < 0 or d > stats.s:
        return 0.0
    return float(_tables(stats.n, stats.s)[0][d])


def conditional_survival(stats: SuffStats, t: int) -> float:
    """``P(X_1 >= t | X(1), S)``."""
    _check(stats)
    d = t - stats.xmin
    if d <= 0:
        return 1.0
    if d > stats.s:
        return 0.0
    return float(_tables(stats.n, stats.s)[1][d])


def conditional_survival_exact(stats: SuffStats, t: int) -> Fraction:
    d = t - stats.xmin
    if d <= 0:
        return Fraction(1)
    if d > stats.s:
        return Fraction(0)
    nums, denom = _formula_counts(stats.n, stats.s)
    return Fraction(sum(nums[d:]), denom)


def conditional_tables(n: int, s: int) -> tuple[np.ndarray, np.ndarray]:
    """Cached ``(pmf, survival)`` arrays indexed by ``d = x - xmin``.

    ``survival[d] = P(X_1 - xmin >= d)``.  Both arrays are read-only.
    """
    return _tables(n, s)


@lru_cache(maxsize=8192)
def _tables(n: int, s: int) -> tuple[np.ndarray, np.ndarray]:
    if n + s > LOGGAMMA_THRESHOLD and n >= 3:
        pmf, surv = _tables_loggamma(n, s)
    else:
        nums, denom = _fast_counts(n, s)
        pmf = np.array([num / denom for num in nums])
        tail = list(itertools.accumulate(reversed(nums)))[::-1]
        surv = np.array([num / denom for num in tail])
    pmf.flags.writeable = False
    surv.flags.writeable = False
    return pmf, surv


def _log_comb(a, b):
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return gammaln(a + 1) - gammaln(b + 1) - gammaln(a - b + 1)


def _log_diff(log_a, log_b):
    """log(exp(log_a) - exp(log_b)) with ``log_b = -inf`` allowed."""
    with np.errstate(divide="ignore", invalid="ignore"):
        return log_a + np.log1p(-np.exp(log_b - log_a))


def _tables_loggamma(n: int, s: int) -> tuple[np.ndarray, np.ndarray]:
    d = np.arange(s + 1)
    rest = s - d
    log_first = _log_comb(rest + n - 2, rest)
    sub = np.full(s + 1, -np.inf)
    ok = rest - 1 >= n - 2
    sub[ok] = _log_comb(rest[ok] - 1, n - 2)
    sub[0] = -np.inf
    log_num = _log_diff(log_first, sub)
    log_den = float(_log_comb(s + n - 1, s))
    if s - 1 >= n - 1:
        log_den = float(_log_diff(log_den, float(_log_comb(s - 1, n - 1))))
    pmf = np.exp(log_num - log_den)
    surv = np.cumsum(pmf[::-1])[::-1]
    return pmf, np.minimum(surv, 1.0)


def conditional_survival_product_form(stats: SuffStats, t: int, as_printed: bool = False) -> float:
    """Survival of ``X_1`` given ``(X(1), S)`` as a sum of telescoped products.

    Only defined for ``n >= 3``, ``s < n`` and ``xmin < t <= xmin + s``.  The
    ratios are shift invariant: with ``as_printed=True`` the minimum is also
    added to the denominators, which agrees with the counting form only when
    ``xmin == 0``.
    """
    n, s, xmin = stats.n, stats.s, stats.xmin
    if n < 3 or s >= n:
        raise ValueError("product form requires n >= 3 and s < n")
    if not xmin < t <= xmin + s:
        raise ValueError("product form requires xmin < t <= xmin + s")
    base = xmin if as_printed else 0
    total = 0.0
    for x in range(t, xmin + s + 1):
        term = (n - 1) / (base + s + n - 1)
        for j in range(1, n - 1):
            term *= (xmin + s + n - x - 1 - j) / (base + s + n - 1 - j)
        total += term
    return total


def _check(stats: SuffStats) -> None:
    if not isinstance(stats, SuffStats):
        raise TypeError("expected SuffStats")


def brute_conditional(n: int, xmin: int, s: int) -> dict[int, Fraction]:
    """Law of the first coordinate over all n-tuples with minimum ``xmin`` and deviation sum ``s``.

    Every such tuple has the same likelihood, so the uniform distribution over
    them is the conditional distribution.
    """
    if n < 1 or s < 0:
        raise ValueError("need n >= 1 and s >= 0")
    total = binom(s + n - 1, n - 1)
    if total > ENUMERATION_LIMIT:
        raise EnumerationTooLarge(f"{total} compositions exceed the limit {ENUMERATION_LIMIT}")
    counts: Counter[int] = Counter()
    kept = 0
    for parts in _compositions(s, n):
        if min(parts) != 0:
            continue
        counts[xmin + parts[0]] += 1
        kept += 1
    return {x: Fraction(c, kept) for x, c in sorted(counts.items())}


def _compositions(total: int, parts: int):
    """All ``parts``-tuples of nonnegative integers summing to ``total`` (stars and bars)."""
    if parts == 1:
        yield (total,)
        return
    for bars in itertools.combinations(range(total + parts - 1), parts - 1):
        prev = -1
        out = []
        for b in bars:
            out.append(b - prev - 1)
            prev = b
        out.append(total + parts - 2 - prev)
        yield tuple(out)


@dataclass(frozen=True)
class JointEnumeration:
    """Joint law of ``(X(1), S)`` restricted to samples with every value <= cap.

    ``counts`` holds the number of enumerated tuples per ``(xmin, s)``;
    ``tail`` is the probability mass never enumerated.
    """

    n: int
    params: GeoParams
    cap: int
    masses: dict
    counts: dict
    tail: float

    def complete_cells(self):
        """Cells whose every tuple lies inside the enumeration window."""
        return [key for key in self.masses if key[0] + key[1] <= self.cap]


def _guard(n: int, params: GeoParams, cap: int) -> None:
    if cap < params.r:
        raise ValueError("cap must be >= r")
    size = (cap - params.r + 1) ** n
    if size > ENUMERATION_LIMIT:
        raise EnumerationTooLarge(f"{size} tuples exceed the limit {ENUMERATION_LIMIT}")


def enumerate_joint(n: int, params: GeoParams, cap: int) -> JointEnumeration:
    """Exact joint distribution of ``(X(1), S)`` by enumerating ``{r..cap}**n``.

    Tuple probabilities are ``(1-theta)**n * theta**(sum(x) - n*r)``.  Passing a
    :class:`fractions.Fraction` theta keeps every mass exact.
    """
    _guard(n, params, cap)
    counts: Counter[tuple[int, int]] = Counter()
    for tup in itertools.product(range(params.r, cap + 1), repeat=n):
        lo = min(tup)
        counts[(lo, sum(tup) - n * lo)] += 1
    theta = params.theta
    masses = {}
    for (lo, s), c in sorted(counts.items()):
        masses[(lo, s)] = c * (1 - theta) ** n * theta ** (s + n * (lo - params.r))
    if isinstance(theta, Fraction):
        tail = 1 - sum(masses.values())
    else:
        tail = 1.0 - math.fsum(masses.values())
    return JointEnumeration(n, params, cap, masses, dict(sorted(counts.items())), tail)


def enumerate_conditional_first(n: int, params: GeoParams, cap: int) -> dict:
    """Conditional law of ``X_1`` given ``(X(1), S)`` from enumerated probabilities.

    Only cells with ``xmin + s <= cap`` are returned, since every tuple in them
    is enumerated; each inner law is normalised within its cell.
    """
    _guard(n, params, cap)
    theta = params.theta
    joint: dict[tuple[int, int], Counter] = {}
    for tup in itertools.product(range(params.r, cap + 1), repeat=n):
        lo = min(tup)
        s = sum(tup) - n * lo
        if lo + s > cap:
            continue
        prob = (1 - theta) ** n * theta ** (sum(tup) - n * params.r)
        joint.setdefault((lo, s), Counter())[tup[0]] += prob
    out = {}
    for key, row in sorted(joint.items()):
        total = sum(row.values())
        out[key] = {x: p / total for x, p in sorted(row.items())}
    return out


@dataclass(frozen=True)
class CompletenessDiagnostic:
    """Expectation of the candidate zero estimator that is 1 at (r+2, 0) and -1 at (r+1, n)."""

    p_plus: float
    p_minus: float
    expectation: float
    claimed_cell_probability: float
    tuples_plus: int
    tuples_minus: int

    @property
    def is_zero(self) -> bool:
        return self.expectation == 0


def completeness_diagnostic(n: int, params: GeoParams, cap: int | None = None) -> CompletenessDiagnostic:
    """Compute ``E[g(X(1), S)]`` exactly by enumeration.

    ``g`` is +1 on ``{X(1) = r+2, S = 0}``, -1 on ``{X(1) = r+1, S = n}`` and 0
    elsewhere.  Both cells have per-tuple probability ``(1-theta)**n theta**(2n)``
    but different tuple counts, which this reports.
    """
    r = params.r
    if cap is None:
        cap = r + n + 1
    if cap < r + n + 1:
        raise ValueError("cap must reach r + n + 1 so both cells are fully enumerated")
    joint = enumerate_joint(n, params, cap)
    plus = (r + 2, 0)
    minus = (r + 1, n)
    p_plus = joint.masses.get(plus, 0)
    p_minus = joint.masses.get(minus, 0)
    theta = params.theta
    return CompletenessDiagnostic(
        p_plus=p_plus,
        p_minus=p_minus,
        expectation=p_plus - p_minus,
        claimed_cell_probability=(1 - theta) ** n * theta ** (2 * n),
        tuples_plus=joint.counts.get(plus, 0),
        tuples_minus=joint.counts.get(minus, 0),
    )
