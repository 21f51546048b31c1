"""Definitions of the nineteen study tables and their CSV rendering.

A table id fixes the layout and the design grid; callers may only change the
replication count and the seed.  Every float is written with 17 significant
digits so the CSV parses back to the exact doubles.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Callable

from . import simlab
from .geomdist import GeoParams, SystemSpec
from .simlab import SimConfig, StressSimConfig

CONVENTIONS = (
    "efficiency = 100 * MSE(baseline) / MSE(target); < 100 means the target is worse",
    "col4/col10: target = complete-sample MLE, baseline = censored MLE",
    "col6/col12: target = UE, baseline = complete-sample MLE",
)

ZERO_COV_VECTORS = (
    (1, -1, 1, -1, 1, -1, 1, -1, 1, -1),
    (1, 1, 1, 1, 1, -1, -1, -1, -1, -1),
    (1, 1, 0, 0, 0, 0, 0, 0, -1, -1),
    (1, 0, 0, 0, 0, 0, 0, 0, 0, -1),
)

THETA_GRID = (0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 0.93, 0.96, 0.99)


def fmt(value) -> str:
    if isinstance(value, (int,)) and not isinstance(value, bool):
        return str(value)
    return format(float(value), ".17g")


class CsvWriter:
    def __init__(self, meta: list[tuple[str, object]]):
        self.buf = io.StringIO()
        for key, value in meta:
            self.buf.write(f"# {key}: {value}\n")
        self.csv = csv.writer(self.buf, lineterminator="\n")

    def row(self, cells) -> None:
        self.csv.writerow([c if isinstance(c, str) else fmt(c) for c in cells])

    def text(self) -> str:
        return self.buf.getvalue()


def _cfg_meta(config) -> str:
    if isinstance(config, SimConfig):
        return (f"n={config.n} r={config.params.r} theta={config.params.theta} t={config.t} "
                f"c={config.c} k={config.spec.k} m={config.spec.m}")
    return (f"n1={config.n1} n2={config.n2} r1={config.stress.r} r2={config.strength.r} "
            f"theta1={config.stress.theta} theta2={config.strength.theta}")


# -- renderers -------------------------------------------------------------------


def reliability_csv(rows: list[simlab.ReliabilityRow], meta: list) -> str:
    label = rows[0].label if rows else "t"
    w = CsvWriter(meta + [("conventions", c) for c in CONVENTIONS]
                + [("excluded (no failure before c)", " ".join(f"{label}={fmt(r.grid_value)}:{r.excluded}" for r in rows))])
    w.row([label, *simlab.ReliabilityRow.COLUMNS])
    for r in rows:
        w.row([r.grid_value, *r.columns()])
    return w.text()


def coverage_csv(rows, meta: list, grid_names=("theta",)) -> str:
    w = CsvWriter(meta + [
        ("interval", "R_hat +- 1.96 sqrt(v_hat), coverage on unclipped bounds"),
        ("lcl/ucl", "averages of per-replication bounds clipped to [0, 1]"),
    ])
    w.row([*grid_names, "reliability", "ue_mean", "ue_variance", "ue_lcl_avg", "ue_ucl_avg", "ue_cp",
           "mle_mean", "mle_mse", "mle_lcl_avg", "mle_ucl_avg", "mle_cp"])
    for ue, mle in rows:
        grid = ue.grid_value if isinstance(ue.grid_value, tuple) else (ue.grid_value,)
        w.row([*grid, ue.true_value, ue.mean, ue.variance, ue.lcl, ue.ucl, ue.coverage,
               mle.mean, mle.mse, mle.lcl, mle.ucl, mle.coverage])
    return w.text()


def _signed(vec) -> str:
    return "".join(f"{v:+d}" if v else "0" for v in vec)


def zero_cov_csv(table: simlab.ZeroCovTable, meta: list) -> str:
    w = CsvWriter(meta + [
        ("statistic", f"mean over {table.batches} batches of cov(1000*U0, 1000*UE), batch size {table.batch_size}"),
        ("pvalue", "two-sided one-sample t-test of zero mean batch covariance"),
        ("correlated_flag", table.correlated_flag),
        ("bonferroni_flag", table.bonferroni_flag),
    ])
    w.row(["combination", *[f"{table.vary}={fmt(v)}" for v in table.values]])
    vectors = list(dict.fromkeys(c.coefficients for c in table.cells))
    for vec in vectors:
        w.row([_signed(vec), *[table.cell(vec, v).mean_scaled_cov for v in table.values]])
    w.row(["reliability", *table.reliabilities])
    for vec in vectors:
        w.row([f"corr {_signed(vec)}", *[table.cell(vec, v).correlation for v in table.values]])
    for vec in vectors:
        w.row([f"pvalue {_signed(vec)}", *[table.cell(vec, v).p_value for v in table.values]])
    return w.text()


def censoring_csv(table: simlab.CensoringEfficiencyTable, meta: list) -> str:
    excl = " ".join(f"({c1},{c2}):{table.excluded[i, j]}"
                    for i, c1 in enumerate(table.c1_grid) for j, c2 in enumerate(table.c2_grid))
    w = CsvWriter(meta + [
        ("true R", fmt(table.true_value)),
        ("efficiency", "100 * MSE(censored MLE) / MSE(complete MLE)"),
        ("excluded (no failure before c)", excl),
    ])
    w.row(["c1", *[f"c2={c}" for c in table.c2_grid]])
    for i, c1 in enumerate(table.c1_grid):
        w.row([c1, *table.efficiency[i].tolist()])
    return w.text()


STRESS_QUANTITIES = ("true", "mle_mean", "ue_mean", "mle_mse", "ue_mse")


def stress_csv(cells: list[simlab.StressCell], meta: list) -> str:
    worst = max((abs(c.as_published.bias) for c in cells), default=0.0)
    w = CsvWriter(meta + [("as-published UE max |bias|", fmt(worst))])
    r1_grid = list(dict.fromkeys(c.r1 for c in cells))
    r2_grid = list(dict.fromkeys(c.r2 for c in cells))
    by_key = {(c.r2, c.r1): c for c in cells}
    w.row(["r2", "quantity", *[f"r1={r}" for r in r1_grid]])
    for r2 in r2_grid:
        for q, name in enumerate(STRESS_QUANTITIES):
            w.row([r2, name, *[by_key[(r2, r1)].rows()[q] for r1 in r1_grid]])
    return w.text()


def parse_csv(text: str) -> tuple[dict[str, str], list[str], list[list[str]]]:
    """Split emitted CSV into ``(metadata, header, rows)``."""
    meta, body = {}, []
    for line in text.splitlines():
        if line.startswith("# "):
            key, _, value = line[2:].partition(": ")
            meta[key] = value
        elif line:
            body.append(line)
    rows = list(csv.reader(body))
    return meta, rows[0], rows[1:]


# -- registry ------------------------------------------------------------------


@dataclass(frozen=True)
class TableDef:
    id: int
    title: str
    default_reps: int
    run: Callable[[int, int], tuple[str, object]]


def _reliability(vary, values, base=SimConfig()):
    def run(reps, seed):
        cfg = SimConfig(base.params, base.n, base.t, base.c, base.spec, reps, seed)
        rows = simlab.run_reliability_study(cfg, vary, values)
        return rows, lambda meta: reliability_csv(rows, meta + [("config", _cfg_meta(cfg))])
    return run


def _zero_cov(vary, values):
    def run(reps, seed):
        cfg = SimConfig(GeoParams(15, 0.8), n=10, t=25, c=25, reps=reps, seed=seed)
        table = simlab.run_zero_covariance_study(cfg, ZERO_COV_VECTORS, vary, values)
        return table, lambda meta: zero_cov_csv(table, meta + [("config", _cfg_meta(cfg))])
    return run


def _ci(reps, seed):
    cfg = SimConfig(GeoParams(15, 0.8), n=20, t=25, c=25, reps=reps, seed=seed)
    rows = simlab.run_ci_study(cfg, "theta", THETA_GRID)
    return rows, lambda meta: coverage_csv(rows, meta + [("config", _cfg_meta(cfg)), ("v_hat", "R_hat(1-R_hat)/(2n)")])


def _censoring(stress, strength, c1_grid, c2_grid):
    def run(reps, seed):
        cfg = StressSimConfig(stress, strength, 10, 10, reps=reps, seed=seed)
        table = simlab.run_censoring_efficiency_study(cfg, c1_grid, c2_grid)
        return table, lambda meta: censoring_csv(table, meta + [("config", _cfg_meta(cfg))])
    return run


def _stress_mse(theta1, theta2):
    def run(reps, seed):
        cfg = StressSimConfig(GeoParams(5, theta1), GeoParams(5, theta2), 10, 10, reps=reps, seed=seed)
        cells = simlab.run_stress_mse_study(cfg)
        return cells, lambda meta: stress_csv(cells, meta + [("config", f"n1=10 n2=10 theta1={theta1} theta2={theta2}")])
    return run


def _stress_ci(reps, seed):
    cfg = StressSimConfig(GeoParams(5, 0.9), GeoParams(5, 0.9), 10, 10, reps=reps, seed=seed)
    rows = simlab.run_stress_ci_study(cfg)
    return rows, lambda meta: coverage_csv(rows, meta + [("config", "n1=10 n2=10 theta1=0.9 theta2=0.9"),
                                                        ("v_hat", "two-sample delete-one jackknife")], ("r1", "r2"))


def _reg(*defs: TableDef) -> dict[int, TableDef]:
    return {d.id: d for d in defs}


TABLES = _reg(
    TableDef(1, "R(t) and R_s(t) against t", 10_000, _reliability("t", (16, 17, 18, 19, 20, 25, 30, 31, 35, 40, 45))),
    TableDef(2, "R(t) and R_s(t) against k", 10_000, _reliability("k", (1, 3, 6, 8))),
    TableDef(3, "R(t) and R_s(t) against c", 10_000, _reliability("c", (20, 25, 30, 35, 40, 45))),
    TableDef(4, "R(t) and R_s(t) against n", 10_000, _reliability("n", (10, 15, 20, 25, 50, 100, 200))),
    TableDef(5, "R(t) and R_s(t) against r", 10_000, _reliability("r", (0, 5, 10, 15, 20))),
    TableDef(6, "R(t) and R_s(t) against theta", 10_000, _reliability("theta", THETA_GRID)),
    TableDef(7, "UE against estimators of zero, by t", 1000, _zero_cov("t", (20, 25, 30, 35, 40))),
    TableDef(8, "UE against estimators of zero, by theta", 1000, _zero_cov("theta", THETA_GRID)),
    TableDef(9, "Confidence intervals and coverage of R(t)", 10_000, _ci),
    # True R = 0.8543644 with these c-grids needs r1=5, r2=10,
    # theta1=theta2=0.8 (not Table 12's parameters).
    TableDef(10, "Censored vs complete MLE of R", 1000,
             _censoring(GeoParams(5, 0.8), GeoParams(10, 0.8), (10, 15, 20, 25), (15, 20, 25, 30))),
    TableDef(11, "Censored vs complete MLE of R", 1000,
             _censoring(GeoParams(5, 0.8), GeoParams(10, 0.7), (10, 15, 20, 25), (15, 20, 25, 30))),
    TableDef(12, "Censored vs complete MLE of R", 1000,
             _censoring(GeoParams(10, 0.7), GeoParams(5, 0.8), (15, 20, 25, 30), (10, 15, 20, 25))),
    TableDef(13, "Censored vs complete MLE of R", 1000,
             _censoring(GeoParams(10, 0.8), GeoParams(5, 0.7), (15, 20, 25, 30), (10, 15, 20, 25))),
    TableDef(14, "MSEs of estimators of R", 1000, _stress_mse(0.1, 0.1)),
    TableDef(15, "MSEs of estimators of R", 1000, _stress_mse(0.5, 0.5)),
    TableDef(16, "MSEs of estimators of R", 1000, _stress_mse(0.8, 0.2)),
    TableDef(17, "MSEs of estimators of R", 1000, _stress_mse(0.9, 0.9)),
    TableDef(18, "MSEs of estimators of R", 1000, _stress_mse(0.2, 0.8)),
    TableDef(19, "Confidence intervals and coverage of R", 10_000, _stress_ci),
)


def render_table(table_id: int, reps: int | None = None, seed: int = 0) -> tuple[str, object]:
    """Run one table and return ``(csv_text, study_result)``."""
    if table_id not in TABLES:
        raise KeyError(f"unknown table id {table_id}; expected 1-19")
    tdef = TABLES[table_id]
    reps = tdef.default_reps if reps is None else reps
    if reps < 1:
        raise ValueError("reps must be >= 1")
    result, render = tdef.run(reps, seed)
    meta = [("table", table_id), ("title", tdef.title), ("reps", reps), ("seed", seed)]
    return render(meta), result


def histogram_csv(values, bins: int, meta: list) -> str:
    edges, counts, means = simlab.histogram(values, bins)
    w = CsvWriter(meta + [
        ("count", len(values)),
        ("mean", fmt(math.fsum(values) / len(values))),
        ("skewness", fmt(simlab.skewness(values))),
        ("bin_mean", "average of the estimates inside each bin; nan when empty"),
    ])
    w.row(["bin_lo", "bin_hi", "count", "bin_mean"])
    for i in range(len(counts)):
        w.row([edges[i], edges[i + 1], int(counts[i]), means[i]])
    return w.text()
