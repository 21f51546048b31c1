"""Seeded Monte Carlo studies of the reliability estimators.

Every study is a pure function of its config: samples come from
:func:`georel.streams.draw_samples`, so identical configs (seed included)
give bit-identical results for any worker count.  Aggregates use
``math.fsum`` and do not depend on summation order.

Efficiency convention used throughout: ``pre_of(target, baseline)`` is
``100 * MSE(baseline) / MSE(target)``; values below 100 mean the target is
worse than the baseline.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np
from scipy import stats as sps

from . import estimators as est
from .combinat import SuffStats, conditional_tables
from .geomdist import GeoParams, StressStrengthParams, SystemSpec, reliability, stress_strength, system_reliability
from .streams import draw_samples

Z95 = 1.959963984540054


# -- metrics -------------------------------------------------------------------


def mse(values, truth: float) -> float:
    v = np.asarray(values, dtype=float)
    if v.size == 0:
        raise ValueError("mse of an empty sequence")
    return math.fsum((v - truth) ** 2) / v.size


def pre_of(target_mse: float, baseline_mse: float) -> float:
    """Percent relative efficiency of the target: ``100 * baseline / target``."""
    if target_mse == 0:
        return 100.0 if baseline_mse == 0 else math.inf
    return 100.0 * baseline_mse / target_mse


def histogram(values, bins: int = 20):
    """Equal-width bins spanning the data range (a subset of [0, 1]).

    Returns ``(edges, counts, bin_means)``; ``bin_means`` holds the average of
    the values falling in each bin (NaN for empty bins), so that
    ``sum(counts * bin_means) / sum(counts)`` recovers the sample mean.
    """
    v = np.asarray(values, dtype=float)
    if v.size == 0:
        raise ValueError("histogram of an empty sequence")
    if bins < 1:
        raise ValueError("bins must be >= 1")
    lo, hi = float(v.min()), float(v.max())
    if lo == hi:
        lo, hi = max(0.0, lo - 0.5 / bins), min(1.0, hi + 0.5 / bins)
        if lo == hi:
            lo, hi = lo - 0.5, hi + 0.5
    edges = np.linspace(lo, hi, bins + 1)
    idx = np.clip(np.searchsorted(edges, v, side="right") - 1, 0, bins - 1)
    counts = np.bincount(idx, minlength=bins)
    sums = np.bincount(idx, weights=v, minlength=bins)
    with np.errstate(invalid="ignore"):
        means = np.where(counts > 0, sums / np.maximum(counts, 1), np.nan)
    return edges, counts, means


def skewness(values) -> float:
    return float(sps.skew(np.asarray(values, dtype=float), bias=True))


@dataclass(frozen=True)
class EstimatorSummary:
    mean: float
    mse: float
    variance: float
    bias: float
    count: int

    @classmethod
    def of(cls, values, truth: float) -> "EstimatorSummary":
        v = np.asarray(values, dtype=float)
        if v.size == 0:
            return cls(math.nan, math.nan, math.nan, math.nan, 0)
        mean = math.fsum(v) / v.size
        var = math.fsum((v - mean) ** 2) / v.size
        return cls(mean, mse(v, truth), var, mean - truth, int(v.size))


@dataclass(frozen=True)
class MetricRow:
    true_value: float
    per_estimator: dict[str, EstimatorSummary]
    efficiencies: dict[str, float] = field(default_factory=dict)


# -- configs -------------------------------------------------------------------


@dataclass(frozen=True)
class SimConfig:
    """A single-population study; defaults are the baseline design point."""

    params: GeoParams = GeoParams(15, 0.8)
    n: int = 20
    t: int = 25
    c: int = 25
    spec: SystemSpec = SystemSpec(2, 8)
    reps: int = 10_000
    seed: int = 0

    def __post_init__(self):
        if self.reps < 1:
            raise ValueError("reps must be >= 1")
        if self.n < 1:
            raise ValueError("n must be >= 1")

    def with_value(self, name: str, value) -> "SimConfig":
        """Copy with one design variable changed (``t``, ``k``, ``m``, ``c``, ``n``, ``r``, ``theta``)."""
        if name in ("t", "c", "n", "reps", "seed"):
            return replace(self, **{name: int(value)})
        if name == "k":
            return replace(self, spec=SystemSpec(int(value), self.spec.m))
        if name == "m":
            return replace(self, spec=SystemSpec(self.spec.k, int(value)))
        if name == "r":
            return replace(self, params=GeoParams(int(value), self.params.theta))
        if name == "theta":
            return replace(self, params=GeoParams(self.params.r, float(value)))
        raise ValueError(f"unknown design variable {name!r}")


@dataclass(frozen=True)
class StressSimConfig:
    stress: GeoParams = GeoParams(5, 0.5)
    strength: GeoParams = GeoParams(10, 0.5)
    n1: int = 10
    n2: int = 10
    c1: int = 20
    c2: int = 20
    reps: int = 1000
    seed: int = 0

    def __post_init__(self):
        if self.reps < 1:
            raise ValueError("reps must be >= 1")
        if self.n1 < 1 or self.n2 < 1:
            raise ValueError("sample sizes must be >= 1")

    @property
    def model(self) -> StressStrengthParams:
        return StressStrengthParams(self.stress, self.strength)

    def with_r(self, r1: int, r2: int) -> "StressSimConfig":
        return replace(self, stress=GeoParams(r1, self.stress.theta), strength=GeoParams(r2, self.strength.theta))


# -- per-sample statistics -----------------------------------------------------


def _stats_arrays(x: np.ndarray):
    xmin = x.min(axis=1)
    return xmin, (x - xmin[:, None]).sum(axis=1)


def _censored_arrays(x: np.ndarray, c: int):
    """Per-row ``(xmin, p, s_star)`` of the type-I censored view at ``c``."""
    n = x.shape[1]
    observed = x <= c
    p = observed.sum(axis=1)
    big = np.iinfo(np.int64).max
    xmin = np.where(observed, x, big).min(axis=1)
    xmin = np.where(p > 0, xmin, 0)
    dev = np.where(observed, x - xmin[:, None], 0).sum(axis=1)
    s_star = dev + (n - p) * (c + 1 - xmin)
    return xmin, p, s_star


def ue_reliability_array(xmin: np.ndarray, s: np.ndarray, n: int, t: int) -> np.ndarray:
    """Elementwise :func:`georel.estimators.ue_reliability` for a fixed ``n``."""
    d = t - xmin
    out = np.where(d <= 0, 1.0, 0.0)
    mid = (d > 0) & (d <= s)
    for sv in np.unique(s[mid]):
        idx = mid & (s == sv)
        out[idx] = conditional_tables(n, int(sv))[1][d[idx]]
    return out


# -- R(t) and R_s(t) -----------------------------------------------------------


COMPONENT_ESTIMATORS = ("mle", "mle-censored", "ue", "naive")
SYSTEM_ESTIMATORS = ("mle", "mle-censored", "ue")


@dataclass(frozen=True)
class ReliabilityRow:
    """One grid point of a Tables 1-6 style study."""

    label: str
    grid_value: float
    config: SimConfig
    component: MetricRow
    system: MetricRow
    excluded: int

    COLUMNS = tuple(f"col{i}" for i in range(1, 13))

    def columns(self) -> list[float]:
        """Cols 1-12: truth, means and efficiencies for R(t), then R_s(t)."""
        out = []
        for row in (self.component, self.system):
            e = row.per_estimator
            out += [
                row.true_value,
                e["mle"].mean,
                e["mle-censored"].mean,
                row.efficiencies["complete_vs_censored"],
                e["ue"].mean,
                row.efficiencies["ue_vs_mle"],
            ]
        return out


def _sample_matrix(config: SimConfig) -> np.ndarray:
    return draw_samples(config.params, config.n, config.reps, config.seed, "sample")


def reliability_point(config: SimConfig, x: np.ndarray | None = None, label: str = "t", grid_value=None) -> ReliabilityRow:
    if not 2 <= config.spec.m < config.n:
        raise est.EstimatorDomainError(f"unbiased R_s(t) needs 2 <= m < n (m={config.spec.m}, n={config.n})")
    if x is None:
        x = _sample_matrix(config)
    t, c, n, spec = config.t, config.c, config.n, config.spec
    xmin, s = _stats_arrays(x)
    cx, p, s_star = _censored_arrays(x, c)
    ok = p > 0

    mle = est.mle_reliability_array(xmin, s, n, t)
    mle_c = est.mle_reliability_array(cx[ok], s_star[ok], p[ok], t)
    ue = ue_reliability_array(xmin, s, n, t)
    naive = (x >= t).mean(axis=1)

    sys_mle = system_reliability(mle, spec)
    sys_mle_c = system_reliability(mle_c, spec)
    sys_ue = np.where(t <= xmin, 1.0, np.where(t > xmin + s, 0.0, system_reliability(ue, spec)))

    truth = reliability(config.params, t)
    sys_truth = system_reliability(truth, spec)

    def metric(truth_value, named):
        summaries = {k: EstimatorSummary.of(v, truth_value) for k, v in named.items()}
        eff = {
            "complete_vs_censored": pre_of(summaries["mle"].mse, summaries["mle-censored"].mse),
            "ue_vs_mle": pre_of(summaries["ue"].mse, summaries["mle"].mse),
        }
        if "naive" in summaries:
            eff["ue_vs_naive"] = pre_of(summaries["ue"].mse, summaries["naive"].mse)
        return MetricRow(truth_value, summaries, eff)

    component = metric(truth, {"mle": mle, "mle-censored": mle_c, "ue": ue, "naive": naive})
    system = metric(sys_truth, {"mle": sys_mle, "mle-censored": sys_mle_c, "ue": sys_ue})
    gv = getattr(config, label, None) if grid_value is None else grid_value
    return ReliabilityRow(label, gv, config, component, system, int((~ok).sum()))


def run_reliability_study(config: SimConfig, vary: str = "t", values: Sequence = (16, 17, 18, 19, 20, 25, 30, 31, 35, 40, 45)) -> list[ReliabilityRow]:
    """Cols 1-12 of Tables 1-6 along one design variable.

    Grid points sharing ``(r, theta, n)`` reuse the same simulated samples;
    the censored MLE is always computed on the censored view of the complete
    sample it is compared with.  Replications with no failure before ``c`` are
    dropped from the censored aggregates and counted in ``excluded``.
    """
    cache: dict[tuple, np.ndarray] = {}
    rows = []
    for value in values:
        cfg = config.with_value(vary, value)
        key = (cfg.params, cfg.n)
        if key not in cache:
            cache[key] = _sample_matrix(cfg)
        rows.append(reliability_point(cfg, cache[key], vary, value))
    return rows


def ue_values(config: SimConfig, role: str = "hist") -> np.ndarray:
    """Per-replication UE of R(t) (the Figure 1 histogram data).

    Draws from its own stream role so histogram runs never share samples
    with the table studies.
    """
    x = draw_samples(config.params, config.n, config.reps, config.seed, role)
    xmin, s = _stats_arrays(x)
    return ue_reliability_array(xmin, s, config.n, config.t)


# -- confidence intervals ------------------------------------------------------


@dataclass(frozen=True)
class CoverageRow:
    """Wald-interval summary for one estimator at one grid point.

    ``lcl``/``ucl`` average the per-replication bounds after clipping to
    [0, 1]; ``coverage`` is evaluated on the unclipped intervals.
    """

    estimator: str
    grid_value: float
    true_value: float
    mean: float
    variance: float
    mse: float
    lcl: float
    ucl: float
    coverage: float

    def __post_init__(self):
        if not self.lcl <= self.ucl + 1e-15:
            raise ValueError("lcl > ucl")
        if not 0 <= self.coverage <= 1:
            raise ValueError("coverage outside [0, 1]")


def _coverage(name, grid_value, truth, values, half_width) -> CoverageRow:
    lo = values - half_width
    hi = values + half_width
    covered = (lo <= truth) & (truth <= hi)
    summary = EstimatorSummary.of(values, truth)
    return CoverageRow(
        estimator=name,
        grid_value=grid_value,
        true_value=truth,
        mean=summary.mean,
        variance=summary.variance,
        mse=summary.mse,
        lcl=math.fsum(np.clip(lo, 0, 1)) / lo.size,
        ucl=math.fsum(np.clip(hi, 0, 1)) / hi.size,
        coverage=float(covered.mean()),
    )


def run_ci_study(config: SimConfig, vary: str = "theta", values: Sequence = (0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 0.93, 0.96, 0.99)) -> list[tuple[CoverageRow, CoverageRow]]:
    """Table 9: 95% intervals ``R_hat +- 1.96 sqrt(R_hat (1 - R_hat) / (2n))``.

    Returns ``(ue_row, mle_row)`` per grid value.
    """
    out = []
    for value in values:
        cfg = config.with_value(vary, value)
        x = _sample_matrix(cfg)
        xmin, s = _stats_arrays(x)
        truth = reliability(cfg.params, cfg.t)
        rows = []
        for name, vals in (
            ("ue", ue_reliability_array(xmin, s, cfg.n, cfg.t)),
            ("mle", est.mle_reliability_array(xmin, s, cfg.n, cfg.t)),
        ):
            half = Z95 * np.sqrt(vals * (1 - vals) / (2 * cfg.n))
            rows.append(_coverage(name, value, truth, vals, half))
        out.append(tuple(rows))
    return out


def _leave_one_out(values: np.ndarray):
    """Distinct leave-one-out ``SuffStats`` with their multiplicities."""
    n = values.size
    total = int(values.sum())
    uniq, counts = np.unique(values, return_counts=True)
    out = []
    for i, (v, k) in enumerate(zip(uniq.tolist(), counts.tolist())):
        if i == 0 and k == 1:
            lo = int(uniq[1])
        else:
            lo = int(uniq[0])
        out.append((SuffStats(lo, total - v - (n - 1) * lo, n - 1), k))
    return out


def jackknife_variance(x: np.ndarray, y: np.ndarray, estimator) -> float:
    """Two-sample delete-one jackknife variance of ``estimator(stats_x, stats_y)``."""
    sx, sy = est.suff_stats(x), est.suff_stats(y)
    total = 0.0
    for sample, fixed, first in ((x, sy, True), (y, sx, False)):
        m = sample.size
        if m < 2:
            continue
        vals, weights = [], []
        for st, k in _leave_one_out(sample):
            vals.append(estimator(st, fixed) if first else estimator(fixed, st))
            weights.append(k)
        vals = np.array(vals)
        weights = np.array(weights)
        centre = math.fsum(vals * weights) / m
        total += (m - 1) / m * math.fsum(weights * (vals - centre) ** 2)
    return total


def _stress_samples(config: StressSimConfig):
    x = draw_samples(config.stress, config.n1, config.reps, config.seed, "stress")
    y = draw_samples(config.strength, config.n2, config.reps, config.seed, "strength")
    return x, y


def stress_estimates(config: StressSimConfig, x=None, y=None, ue_variant: str = "exact-rb"):
    """Per-replication ``(mle, ue, naive)`` arrays for a stress-strength config."""
    if x is None:
        x, y = _stress_samples(config)
    x1, s1 = _stats_arrays(x)
    y1, s2 = _stats_arrays(y)
    mle = est.mle_stress_strength_array(x1, s1, config.n1, y1, s2, config.n2)
    ue = np.array([
        est.ue_stress_strength(SuffStats(int(a), int(b), config.n1), SuffStats(int(c), int(d), config.n2), ue_variant)
        for a, b, c, d in zip(x1, s1, y1, s2)
    ])
    naive = (x[:, :, None] <= y[:, None, :]).mean(axis=(1, 2))
    return mle, ue, naive


STRESS_CI_PAIRS = ((20, 5), (15, 5), (10, 5), (5, 5), (5, 10), (5, 15), (5, 20))


def run_stress_ci_study(config: StressSimConfig, pairs: Sequence[tuple[int, int]] = STRESS_CI_PAIRS) -> list[tuple[CoverageRow, CoverageRow]]:
    """Table 19: Wald intervals for R with jackknife variance.

    ``pairs`` are ``(r1, r2)``; the default order runs the true R up from
    about 0.108 to 0.902.
    """
    ue_fn = est.ue_stress_strength
    mle_fn = est.mle_stress_strength
    out = []
    for r1, r2 in pairs:
        cfg = config.with_r(r1, r2)
        x, y = _stress_samples(cfg)
        mle, ue, _ = stress_estimates(cfg, x, y)
        v_ue = np.array([jackknife_variance(a, b, ue_fn) for a, b in zip(x, y)])
        v_mle = np.array([jackknife_variance(a, b, mle_fn) for a, b in zip(x, y)])
        truth = stress_strength(cfg.model)
        out.append((
            _coverage("ue", (r1, r2), truth, ue, Z95 * np.sqrt(v_ue)),
            _coverage("mle", (r1, r2), truth, mle, Z95 * np.sqrt(v_mle)),
        ))
    return out


# -- unbiased estimators of zero -----------------------------------------------


@dataclass(frozen=True)
class ZeroCovCell:
    coefficients: tuple[int, ...]
    grid_value: float
    mean_scaled_cov: float
    correlation: float
    p_value: float


@dataclass(frozen=True)
class ZeroCovTable:
    vary: str
    values: tuple
    batches: int
    batch_size: int
    reliabilities: tuple[float, ...]
    cells: tuple[ZeroCovCell, ...]

    @property
    def correlated_flag(self) -> bool:
        """True when any cell rejects zero mean covariance at the 5% level."""
        return any(c.p_value < 0.05 for c in self.cells)

    @property
    def bonferroni_flag(self) -> bool:
        return any(c.p_value < 0.05 / len(self.cells) for c in self.cells)

    def cell(self, coefficients, grid_value) -> ZeroCovCell:
        for c in self.cells:
            if c.coefficients == tuple(coefficients) and c.grid_value == grid_value:
                return c
        raise KeyError((coefficients, grid_value))


def _check_coefficients(vectors, n: int) -> list[tuple[int, ...]]:
    out = []
    for vec in vectors:
        vec = tuple(int(v) for v in vec)
        if len(vec) != n:
            raise ValueError(f"coefficient vector {vec} has length {len(vec)}, expected {n}")
        if sum(vec) != 0:
            raise ValueError(f"coefficients {vec} sum to {sum(vec)}; an unbiased estimator of zero needs sum 0")
        out.append(vec)
    return out


def _pooled_correlation(a: np.ndarray, b: np.ndarray) -> float:
    if np.std(a) == 0 or np.std(b) == 0:
        return 0.0
    return float(np.corrcoef(a, b)[0, 1])


def _zero_mean_test(covs: np.ndarray) -> float:
    """Two-sided one-sample t-test p-value of mean batch covariance = 0.

    U0 and UE are uncorrelated but not independent, so a Pearson test on the
    pooled draws is anti-conservative; the batch covariances are iid with mean
    exactly 0 under the null.
    """
    if covs.size < 2 or np.all(covs == covs[0]):
        return 1.0
    return float(sps.ttest_1samp(covs, 0.0).pvalue)


def run_zero_covariance_study(
    config: SimConfig,
    coefficient_sets: Sequence[Sequence[int]],
    vary: str = "t",
    values: Sequence = (20, 25, 30, 35, 40),
    batch_size: int = 100,
) -> ZeroCovTable:
    """Tables 7-8: average within-batch ``cov(1000 U0, 1000 UE)`` over ``config.reps`` batches.

    ``U0 = sum(c_i X_i)`` with integer coefficients summing to 0.  Also reports
    the pooled correlation over all batches and a t-test p-value for a zero
    mean batch covariance.
    """
    vectors = _check_coefficients(coefficient_sets, config.n)
    coef = np.array(vectors, dtype=float).T if vectors else np.zeros((config.n, 0))
    cache: dict[tuple, np.ndarray] = {}
    cells = []
    rel = []
    for value in values:
        cfg = config.with_value(vary, value)
        key = (cfg.params, cfg.n)
        if key not in cache:
            cache[key] = draw_samples(cfg.params, cfg.n, cfg.reps * batch_size, cfg.seed, "zero-cov")
        x = cache[key]
        xmin, s = _stats_arrays(x)
        ue = 1000.0 * ue_reliability_array(xmin, s, cfg.n, cfg.t)
        u0 = 1000.0 * (x @ coef)
        rel.append(reliability(cfg.params, cfg.t))
        ue_b = ue.reshape(cfg.reps, batch_size)
        for j, vec in enumerate(vectors):
            u_b = u0[:, j].reshape(cfg.reps, batch_size)
            if batch_size > 1:
                covs = ((u_b - u_b.mean(1, keepdims=True)) * (ue_b - ue_b.mean(1, keepdims=True))).sum(1) / (batch_size - 1)
            else:
                covs = np.zeros(cfg.reps)
            r = _pooled_correlation(u0[:, j], ue)
            cells.append(ZeroCovCell(vec, value, math.fsum(covs) / cfg.reps, r, _zero_mean_test(covs)))
    return ZeroCovTable(vary, tuple(values), config.reps, batch_size, tuple(rel), tuple(cells))


# -- stress-strength studies ---------------------------------------------------


@dataclass(frozen=True)
class CensoringEfficiencyTable:
    config: StressSimConfig
    true_value: float
    c1_grid: tuple[int, ...]
    c2_grid: tuple[int, ...]
    efficiency: np.ndarray
    excluded: np.ndarray
    complete_mse: float


def run_censoring_efficiency_study(config: StressSimConfig, c1_grid: Sequence[int], c2_grid: Sequence[int]) -> CensoringEfficiencyTable:
    """Tables 10-13: ``100 * MSE(censored MLE) / MSE(complete MLE)`` per ``(c1, c2)``.

    All cells share the same simulated samples; each cell censors them at its
    own cycles.  Replications where either sample has no failure are dropped
    from that cell's censored MSE and counted.
    """
    x, y = _stress_samples(config)
    truth = stress_strength(config.model)
    x1, s1 = _stats_arrays(x)
    y1, s2 = _stats_arrays(y)
    complete = est.mle_stress_strength_array(x1, s1, config.n1, y1, s2, config.n2)
    complete_mse = mse(complete, truth)
    eff = np.empty((len(c1_grid), len(c2_grid)))
    excl = np.zeros((len(c1_grid), len(c2_grid)), dtype=int)
    for i, c1 in enumerate(c1_grid):
        cx, p1, sx = _censored_arrays(x, c1)
        for j, c2 in enumerate(c2_grid):
            cy, p2, sy = _censored_arrays(y, c2)
            ok = (p1 > 0) & (p2 > 0)
            excl[i, j] = int((~ok).sum())
            cens = est.mle_stress_strength_array(cx[ok], sx[ok], p1[ok], cy[ok], sy[ok], p2[ok])
            eff[i, j] = pre_of(complete_mse, mse(cens, truth)) if ok.any() else math.nan
    return CensoringEfficiencyTable(config, truth, tuple(c1_grid), tuple(c2_grid), eff, excl, complete_mse)


@dataclass(frozen=True)
class StressCell:
    r1: int
    r2: int
    true_value: float
    mle: EstimatorSummary
    ue: EstimatorSummary
    as_published: EstimatorSummary

    def rows(self) -> list[float]:
        """True R, mean MLE, mean UE, MSE(MLE), MSE(UE)."""
        return [self.true_value, self.mle.mean, self.ue.mean, self.mle.mse, self.ue.mse]


def run_stress_mse_study(config: StressSimConfig, r1_grid: Sequence[int] = (5, 10, 15, 20), r2_grid: Sequence[int] = (5, 10, 15, 20), ue_variant: str = "exact-rb") -> list[StressCell]:
    """Tables 14-18, one cell per ``(r2, r1)`` in row-major order.

    The ``as-published`` UE is evaluated alongside so its bias can be
    reported next to the exact Rao-Blackwell estimator.
    """
    cells = []
    for r2 in r2_grid:
        for r1 in r1_grid:
            cfg = config.with_r(r1, r2)
            x, y = _stress_samples(cfg)
            truth = stress_strength(cfg.model)
            mle, ue, _ = stress_estimates(cfg, x, y, ue_variant)
            _, pub, _ = stress_estimates(cfg, x, y, "as-published")
            cells.append(StressCell(
                r1, r2, truth,
                EstimatorSummary.of(mle, truth),
                EstimatorSummary.of(ue, truth),
                EstimatorSummary.of(pub, truth),
            ))
    return cells
