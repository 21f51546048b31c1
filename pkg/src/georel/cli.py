"""``georel`` command line: estimate on data files, reproduce tables, emit histograms, run study specs.

Exit codes are shared by every command: 0 success, 2 input or configuration
error, 3 an estimator is undefined for the data (for example no failures
before the censoring cycle, or ``m >= n`` for the unbiased system estimator).
"""

from __future__ import annotations

import argparse
import dataclasses
import hashlib
import json
import subprocess
import sys
import time
from dataclasses import dataclass
from pathlib import Path

from . import __version__, simlab, studyspec, tables
from . import estimators as est
from .geomdist import GeoParams, SystemSpec
from .simlab import SimConfig

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_DOMAIN = 3


class InputError(ValueError):
    """Bad input file, flag combination or config; maps to exit code 2."""


# -- sample files ----------------------------------------------------------------


@dataclass(frozen=True)
class SampleFile:
    """Integers read from a sample file; ``c``/``n`` set for censored files."""

    values: tuple[int, ...]
    c: int | None = None
    n: int | None = None

    @property
    def censored(self) -> bool:
        return self.c is not None


def _tokens(line: str):
    """``(column, token)`` pairs with 1-based columns, ignoring ``#`` comments."""
    body = line.split("#", 1)[0]
    col = 0
    for tok in body.split():
        col = body.index(tok, col)
        yield col + 1, tok
        col += len(tok)


def parse_sample(text: str, source: str = "<input>") -> SampleFile:
    """Parse whitespace separated nonnegative integers with ``#`` comments.

    A censored file starts with a header line ``c=<int> n=<int>``; the
    observed failure cycles follow.
    """
    values: list[int] = []
    header: dict[str, int] = {}
    seen_data = False
    for lineno, line in enumerate(text.splitlines(), start=1):
        toks = list(_tokens(line))
        if not toks:
            continue
        if "=" in toks[0][1]:
            if seen_data or header:
                raise InputError(f"{source}:{lineno}:{toks[0][0]}: header must be the first non-comment line")
            for col, tok in toks:
                key, _, raw = tok.partition("=")
                if key not in ("c", "n") or key in header:
                    raise InputError(f"{source}:{lineno}:{col}: expected header 'c=<int> n=<int>', got {tok!r}")
                try:
                    header[key] = int(raw)
                except ValueError:
                    raise InputError(f"{source}:{lineno}:{col + len(key) + 1}: {key} must be an integer, got {raw!r}") from None
            if set(header) != {"c", "n"}:
                raise InputError(f"{source}:{lineno}:1: censored header needs both c and n")
            continue
        seen_data = True
        for col, tok in toks:
            try:
                v = int(tok)
            except ValueError:
                raise InputError(f"{source}:{lineno}:{col}: expected an integer, got {tok!r}") from None
            if v < 0:
                raise InputError(f"{source}:{lineno}:{col}: lifetimes must be nonnegative, got {v}")
            if header and v > header["c"]:
                raise InputError(f"{source}:{lineno}:{col}: observed failure {v} exceeds c={header['c']}")
            values.append(v)
    if not header and not values:
        raise InputError(f"{source}: no observations")
    if header:
        if header["n"] < 1 or len(values) > header["n"]:
            raise InputError(f"{source}: n={header['n']} must be >= 1 and at least the {len(values)} observed failures")
        return SampleFile(tuple(values), header["c"], header["n"])
    return SampleFile(tuple(values))


def read_sample(path: str) -> SampleFile:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror}") from None
    return parse_sample(text, path)


# -- estimate --------------------------------------------------------------------


TARGET_NAMES = {"rt": "R(t)", "rst": "Rs(t)", "r": "R"}
METHOD_CHOICES = ("all", "mle", "mle-censored", "ue", "naive", "exact-rb", "as-published")


def _censored_view(sample: SampleFile, c: int | None):
    """CensoredSample for the file, or for a complete sample cut at ``c``."""
    if sample.censored:
        return est.CensoredSample(sample.c, sample.values, sample.n)
    if c is not None:
        return est.CensoredSample.from_complete(sample.values, c)
    return None


def _complete_only(sample: SampleFile, method: str) -> None:
    if sample.censored:
        raise est.EstimatorDomainError(f"{method} needs a complete sample; the file is censored")


def _methods(args, censored: bool, complete: bool) -> list[str]:
    base = {
        "rt": ["mle", "ue", "naive"],
        "rst": ["mle", "ue"],
        "r": ["mle", "exact-rb", "naive"],
    }[args.target]
    if args.method == "all":
        out = base if complete else []
        return out + (["mle-censored"] if censored else [])
    method = args.method
    if args.target == "r" and method == "ue":
        method = "exact-rb"
    if method == "mle" and censored and not complete:
        method = "mle-censored"
    allowed = base + ["mle-censored"] + (["as-published"] if args.target == "r" else [])
    if method not in allowed:
        raise InputError(f"method {args.method!r} does not apply to target {args.target!r}")
    if method == "mle-censored" and not censored:
        raise InputError("mle-censored needs a censored file or --c")
    return [method]


def estimate_records(args) -> list[est.EstimateRecord]:
    target = TARGET_NAMES[args.target]
    x = read_sample(args.sample)
    if args.target in ("rt", "rst") and args.t is None:
        raise InputError(f"--t is required for target {args.target}")
    if args.target == "rst":
        if args.k is None or args.m is None:
            raise InputError("--k and --m are required for target rst")
        spec = SystemSpec(args.k, args.m)
    if args.target == "r":
        if args.strength is None:
            raise InputError("--strength is required for target r")
        y = read_sample(args.strength)
        cx, cy = _censored_view(x, args.c), _censored_view(y, args.c2)
        censored = cx is not None or cy is not None
        # The uncensored side of a mixed pair is its own censored view with p = n.
        if censored:
            cx = cx or est.CensoredSample.from_complete(x.values, max(x.values))
            cy = cy or est.CensoredSample.from_complete(y.values, max(y.values))
        complete = not (x.censored or y.censored)
        methods = _methods(args, censored, complete)
    else:
        cx = _censored_view(x, args.c)
        methods = _methods(args, cx is not None, not x.censored)

    records = []
    for method in methods:
        meta = {}
        if args.target == "r":
            if method == "mle-censored":
                value = est.mle_stress_strength_censored(est.censored_stats(cx), est.censored_stats(cy))
            else:
                _complete_only(x, method)
                _complete_only(y, method)
                sx, sy = est.suff_stats(x.values), est.suff_stats(y.values)
                if method == "mle":
                    value = est.mle_stress_strength(sx, sy)
                elif method == "naive":
                    value = est.naive_unbiased_stress_strength(x.values, y.values)
                else:
                    value = est.ue_stress_strength(sx, sy, method)
        elif method == "mle-censored":
            cs = est.censored_stats(cx)
            meta = {"p": cs.p, "c": cx.c}
            if args.target == "rt":
                value = est.mle_reliability_censored(cs, args.t)
            else:
                value = est.mle_system_reliability_censored(cs, args.t, spec)
        else:
            _complete_only(x, method)
            stats = est.suff_stats(x.values)
            if args.target == "rt":
                value = {
                    "mle": lambda: est.mle_reliability(stats, args.t),
                    "ue": lambda: est.ue_reliability(stats, args.t),
                    "naive": lambda: est.naive_unbiased_reliability(x.values, args.t),
                }[method]()
            elif method == "mle":
                value = est.mle_system_reliability(stats, args.t, spec)
            else:
                value = est.ue_system_reliability(stats, args.t, spec)
        records.append(est.EstimateRecord(method, target, float(value), meta))
    return records


def cmd_estimate(args) -> int:
    records = estimate_records(args)
    meta = [("target", TARGET_NAMES[args.target])]
    if args.t is not None:
        meta.append(("t", args.t))
    if args.target == "rst":
        meta.append(("system", f"k={args.k} m={args.m}"))
    w = tables.CsvWriter(meta)
    w.row(["method", "target", "value"])
    for rec in records:
        w.row([rec.method, rec.target, rec.value])
    _emit(w.text(), None)
    return EXIT_OK


# -- table / hist / simulate -------------------------------------------------------


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
        return
    try:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise InputError(f"{out}: {exc.strerror}") from None


def cmd_table(args) -> int:
    if args.id not in tables.TABLES:
        raise InputError(f"unknown table id {args.id}; expected 1-19")
    if args.reps is not None and args.reps < 1:
        raise InputError("--reps must be >= 1")
    text, _ = tables.render_table(args.id, args.reps, args.seed)
    _emit(text, args.out)
    return EXIT_OK


def cmd_hist(args) -> int:
    if args.reps < 1 or args.bins < 1:
        raise InputError("--reps and --bins must be >= 1")
    cfg = SimConfig(params=GeoParams(args.r, args.theta), n=args.n, t=args.t, reps=args.reps, seed=args.seed)
    values = simlab.ue_values(cfg)
    meta = [("figure", "histogram of the unbiased estimates of R(t)"), ("reps", args.reps), ("seed", args.seed),
            ("config", f"n={args.n} r={args.r} theta={args.theta} t={args.t}")]
    _emit(tables.histogram_csv(values, args.bins, meta), args.out)
    return EXIT_OK


def version_string() -> str:
    """``git describe``-style version; falls back to the package version."""
    try:
        out = subprocess.run(
            ["git", "describe", "--tags", "--long", "--always", "--dirty"],
            cwd=Path(__file__).resolve().parent, capture_output=True, text=True, timeout=10,
        )
    except (OSError, subprocess.SubprocessError):
        out = None
    desc = out.stdout.strip() if out is not None and out.returncode == 0 else ""
    if not desc:
        return f"v{__version__}"
    if desc.startswith("v") or "-g" in desc:
        return desc
    return f"v{__version__}-0-g{desc}"


def _load_spec(path: str) -> dict:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}:{exc.lineno}:{exc.colno}: invalid JSON: {exc.msg}") from None


def cmd_simulate(args) -> int:
    spec = _load_spec(args.spec)
    errors = studyspec.validation_errors(spec)
    if errors:
        raise InputError(f"{args.spec}: {len(errors)} schema violation(s):\n" + "\n".join(f"  {e}" for e in errors))
    start = time.perf_counter()
    text, config = studyspec.run_spec(spec)
    wall = time.perf_counter() - start
    out = Path(spec["output"])
    _emit(text, str(out))
    manifest = {
        "spec": spec,
        "config": dataclasses.asdict(config),
        "seed": spec["seed"],
        "version": version_string(),
        "wall_time_seconds": wall,
        "output": str(out),
        "output_sha256": hashlib.sha256(text.encode("utf-8")).hexdigest(),
    }
    _emit(json.dumps(manifest, indent=2, sort_keys=True) + "\n", str(out.with_suffix(".manifest.json")))
    print(f"wrote {out} and {out.with_suffix('.manifest.json')}")
    return EXIT_OK


# -- entry point -------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="georel", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("estimate", help="estimate R(t), Rs(t) or R from sample files")
    p.add_argument("sample", help="sample file (the stress sample X for --target r)")
    p.add_argument("--target", choices=sorted(TARGET_NAMES), default="rt")
    p.add_argument("--method", choices=METHOD_CHOICES, default="all")
    p.add_argument("--t", type=int, help="mission time in cycles")
    p.add_argument("--k", type=int, help="components that must work")
    p.add_argument("--m", type=int, help="components in the system")
    p.add_argument("--c", type=int, help="censoring cycle applied to a complete sample")
    p.add_argument("--strength", help="strength sample file Y (target r)")
    p.add_argument("--c2", type=int, help="censoring cycle applied to a complete strength sample")
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("table", help="reproduce one of the 19 study tables as CSV")
    p.add_argument("--id", type=int, required=True)
    p.add_argument("--reps", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_table)

    p = sub.add_parser("hist", help="histogram data of the unbiased R(t) estimates")
    p.add_argument("--n", type=int, default=20)
    p.add_argument("--r", type=int, default=15)
    p.add_argument("--t", type=int, default=25)
    p.add_argument("--theta", type=float, default=0.96)
    p.add_argument("--reps", type=int, default=10_000)
    p.add_argument("--bins", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_hist)

    p = sub.add_parser("simulate", help="run a JSON study spec")
    p.add_argument("spec", help="study spec file (see study.schema.json)")
    p.set_defaults(func=cmd_simulate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except est.EstimatorDomainError as exc:
        print(f"georel: estimator domain error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except (InputError, ValueError, KeyError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"georel: error: {msg}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
