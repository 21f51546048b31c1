"""Declarative study specs: JSON validated against the shipped schema, then run.

A spec names a study kind, the design, ``reps``, ``seed`` and an output
path.  Validation collects every schema violation before anything runs.
"""

from __future__ import annotations

import json
from importlib import resources

from jsonschema import Draft202012Validator

from . import simlab, tables
from .geomdist import GeoParams, SystemSpec
from .simlab import SimConfig, StressSimConfig


def load_schema() -> dict:
    text = resources.files("georel").joinpath("data/study.schema.json").read_text(encoding="utf-8")
    return json.loads(text)


def validation_errors(spec) -> list[str]:
    """Every schema violation as ``"<json path>: <message>"``, sorted by path."""
    validator = Draft202012Validator(load_schema())
    out = []
    for err in validator.iter_errors(spec):
        path = "/".join(str(p) for p in err.absolute_path) or "<root>"
        message = err.message
        if err.validator == "not" and err.validator_value == {}:
            message = f"not allowed for study kind {spec.get('study') if isinstance(spec, dict) else None!r}"
        out.append(f"{path}: {message}")
    return sorted(out)


def _sim_config(spec: dict, base: SimConfig) -> SimConfig:
    p = spec.get("params", {})
    return SimConfig(
        params=GeoParams(p.get("r", base.params.r), float(p.get("theta", base.params.theta))),
        n=p.get("n", base.n),
        t=p.get("t", base.t),
        c=p.get("c", base.c),
        spec=SystemSpec(p.get("k", base.spec.k), p.get("m", base.spec.m)),
        reps=spec["reps"],
        seed=spec["seed"],
    )


def _grid(spec: dict, vary: str, values) -> tuple[str, tuple]:
    grid = spec.get("grid")
    if grid is None:
        return vary, tuple(values)
    cast = float if grid["vary"] == "theta" else int
    return grid["vary"], tuple(cast(v) for v in grid["values"])


def _stress_config(spec: dict, default_r1: int = 5, default_r2: int = 5) -> StressSimConfig:
    x, y = spec["stress"], spec["strength"]
    return StressSimConfig(
        stress=GeoParams(x.get("r", default_r1), float(x["theta"])),
        strength=GeoParams(y.get("r", default_r2), float(y["theta"])),
        n1=spec.get("n1", 10),
        n2=spec.get("n2", 10),
        reps=spec["reps"],
        seed=spec["seed"],
    )


def _meta(spec: dict, config) -> list:
    return [("study", spec["study"]), ("reps", spec["reps"]), ("seed", spec["seed"]),
            ("config", tables._cfg_meta(config))]


def run_spec(spec: dict) -> tuple[str, object]:
    """Run a validated spec; returns ``(csv_text, config)``."""
    kind = spec["study"]
    if kind == "reliability":
        cfg = _sim_config(spec, SimConfig())
        vary, values = _grid(spec, "t", (16, 17, 18, 19, 20, 25, 30, 31, 35, 40, 45))
        rows = simlab.run_reliability_study(cfg, vary, values)
        return tables.reliability_csv(rows, _meta(spec, cfg)), cfg
    if kind == "ci":
        cfg = _sim_config(spec, SimConfig())
        vary, values = _grid(spec, "theta", tables.THETA_GRID)
        rows = simlab.run_ci_study(cfg, vary, values)
        meta = _meta(spec, cfg) + [("v_hat", "R_hat(1-R_hat)/(2n)")]
        return tables.coverage_csv(rows, meta, (vary,)), cfg
    if kind == "zero-covariance":
        cfg = _sim_config(spec, SimConfig(n=10))
        vary, values = _grid(spec, "t", (20, 25, 30, 35, 40))
        batch = spec.get("params", {}).get("batch_size", 100)
        table = simlab.run_zero_covariance_study(cfg, spec["coefficients"], vary, values, batch)
        return tables.zero_cov_csv(table, _meta(spec, cfg)), cfg
    if kind == "histogram":
        cfg = _sim_config(spec, SimConfig(params=GeoParams(15, 0.96)))
        bins = spec.get("params", {}).get("bins", 20)
        values = simlab.ue_values(cfg)
        return tables.histogram_csv(values, bins, _meta(spec, cfg)), cfg
    if kind == "censoring-efficiency":
        cfg = _stress_config(spec, 5, 10)
        table = simlab.run_censoring_efficiency_study(cfg, spec["c1_grid"], spec["c2_grid"])
        return tables.censoring_csv(table, _meta(spec, cfg)), cfg
    if kind == "stress-mse":
        cfg = _stress_config(spec)
        cells = simlab.run_stress_mse_study(
            cfg,
            spec.get("r1_grid", (5, 10, 15, 20)),
            spec.get("r2_grid", (5, 10, 15, 20)),
            spec.get("ue_variant", "exact-rb"),
        )
        return tables.stress_csv(cells, _meta(spec, cfg)), cfg
    if kind == "stress-ci":
        cfg = _stress_config(spec)
        pairs = [tuple(p) for p in spec.get("pairs", simlab.STRESS_CI_PAIRS)]
        rows = simlab.run_stress_ci_study(cfg, pairs)
        meta = _meta(spec, cfg) + [("v_hat", "two-sample delete-one jackknife")]
        return tables.coverage_csv(rows, meta, ("r1", "r2")), cfg
    raise ValueError(f"unknown study kind {kind!r}")
