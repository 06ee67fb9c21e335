"""Command-line front end.

Subcommands: ``drift``, ``attribute``, ``synth``, ``axioms``. Exit status is
0 on success, 2 on bad input (unreadable files, bad flags, invalid specs) and
1 on an internal failure.

Any subcommand accepts ``--config FILE``: ``key = value`` lines using the long
flag names (``metric = w1``, ``bootstrap = 500,200,0.95``). Blank lines and
lines starting with ``#`` are ignored; ``true``/``false`` toggle switches.
Flags given on the command line override the file.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

from . import synth
from .alignment import Policy
from .api import EXPECTED, METHODS, attribute, drift_between, timeseries
from .axioms import MISMATCH, check_metric, format_table
from .bootstrap import BootstrapConfig, bootstrap_drift, proportion_diagnostic
from .core import DriftError, Metric, validate_pair
from .groups import label_column, parse_group_spec
from .io import TableSchema, _json, load_table, write_report, write_table
from .metrics import HistogramConfig, drift
from .model import ModelFn, builtin_names, resolve_model
from .shapley import EXACT_LIMIT, TRANSFORMS, apply_transforms, resolve_transforms

log = logging.getLogger("groupdrift")

EXIT_OK, EXIT_INTERNAL, EXIT_INPUT = 0, 1, 2


class ConfigError(DriftError):
    pass


# ---------------------------------------------------------------- config file

def read_config(path) -> list[str]:
    """Turn ``key = value`` lines into command-line tokens."""
    tokens = []
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip().replace("_", "-"), value.strip()
        if not sep or not key:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
        if key == "config":
            raise ConfigError(f"{path}:{lineno}: config files cannot include others")
        if value.lower() == "true":
            tokens.append(f"--{key}")
        elif value.lower() != "false":
            tokens += [f"--{key}", value]
    return tokens


def _expand_config(argv: list[str]) -> list[str]:
    if not argv or argv[0].startswith("-"):
        return argv
    rest = argv[1:]
    for i, tok in enumerate(rest):
        if tok == "--":
            break
        if tok == "--config" and i + 1 < len(rest):
            path, rest = rest[i + 1], rest[:i] + rest[i + 2:]
            return [argv[0]] + read_config(path) + rest
        if tok.startswith("--config="):
            path, rest = tok.split("=", 1)[1], rest[:i] + rest[i + 1:]
            return [argv[0]] + read_config(path) + rest
    return argv


# ---------------------------------------------------------------- parsing

def _bootstrap_arg(text: str) -> tuple[Optional[int], int, float]:
    parts = text.split(",")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("expected k,R,level (k may be 'auto')")
    try:
        k = None if parts[0].strip() in ("", "auto") else int(parts[0])
        return k, int(parts[1]), float(parts[2])
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad bootstrap spec {text!r}") from None


def _positive(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {value}")
    return value


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", metavar="FILE",
                   help="read 'key = value' defaults for these flags from FILE")
    p.add_argument("--explicand", metavar="PATH", required=True,
                   help="CSV file with the sample whose drift is explained")
    p.add_argument("--baseline", metavar="PATH",
                   help="CSV file with the reference sample (default: the explicand file)")
    p.add_argument("--model", metavar="MODEL",
                   help="built-in model (" + ", ".join(builtin_names())
                   + ") or an expression over the feature columns, e.g. 'x*z + y + z'")
    p.add_argument("--metric", default="w1", choices=[m.value for m in Metric],
                   help="drift function (default: w1)")
    p.add_argument("--seed", type=int, default=0, help="random seed (default: 0)")
    p.add_argument("--bins", type=_positive, default=10,
                   help="equal-width bins for jsd (default: 10)")
    p.add_argument("--exact-jsd", action="store_true",
                   help="compare exact empirical distributions in jsd instead of binning")
    p.add_argument("--schema", default="auto", metavar="auto|salary|FILE",
                   help="column schema: auto (numeric columns, first-seen codes for text), "
                   "salary (the synthetic salary layout) or a JSON file with keys features, "
                   "category_maps, categorical, closed, period_column, label_columns")
    p.add_argument("--period-column", metavar="COL", help="column holding the period label")
    p.add_argument("--explicand-period", metavar="P",
                   help="keep only explicand rows whose period label is P")
    p.add_argument("--baseline-period", metavar="P",
                   help="keep only baseline rows whose period label is P")
    p.add_argument("--prediction-column", metavar="COL",
                   help="column of precomputed predictions (drift only; replaces --model)")
    p.add_argument("--transform", action="append", default=[], choices=sorted(TRANSFORMS),
                   help="output transform applied before the drift function; repeatable, "
                   "applied in order")
    p.add_argument("--threads", type=_positive, default=1,
                   help="worker threads; results do not depend on it (default: 1)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="groupdrift",
        description="Measure prediction drift between two data samples and attribute it "
        "to groups of rows and features.",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("drift", help="measure drift between two samples",
                       description="Print D(G(F(explicand)), G(F(baseline))).")
    _common(p)
    p.add_argument("--bootstrap", type=_bootstrap_arg, metavar="k,R,level",
                   help="bootstrap with resample size k ('auto' = min(m1, m2, 1000)), "
                   "R repetitions and CI level; required for samples of unequal size")
    p.add_argument("--json", metavar="PATH", help="also write the result as JSON ('-' = stdout)")
    p.add_argument("--timeseries", action="store_true",
                   help="emit drift of every period against --reference-period under all "
                   "four metrics as JSON; needs --period-column")
    p.add_argument("--reference-period", metavar="P",
                   help="reference period for --timeseries (default: the first)")
    p.set_defaults(func=cmd_drift)

    p = sub.add_parser("attribute", help="attribute drift to groups",
                       description="Attribute the drift value to groups of (rows x features).")
    _common(p)
    p.add_argument("--method", default="shapley", choices=list(METHODS),
                   help="exact GroupShapley, sampled GroupShapley or GroupIG (default: shapley)")
    p.add_argument("--groups", default="features", metavar="SPEC",
                   help="'features', 'rows:COL', 'features*rows:COL' or a CSV file with "
                   "columns name,rows,features (default: features)")
    p.add_argument("--permutations", type=_positive, default=1000,
                   help="orderings for shapley-sampled (default: 1000)")
    p.add_argument("--steps", type=_positive, default=64, help="path nodes for ig (default: 64)")
    p.add_argument("--rule", default="midpoint", choices=["midpoint", "trapezoid"],
                   help="path quadrature for ig (default: midpoint)")
    p.add_argument("--alignment", choices=["sorted", "identity", "sampled", EXPECTED],
                   help="row pairing (default: sorted for w1, identity otherwise); "
                   "'expected' averages over --alignment-samples sampled pairings")
    p.add_argument("--alignment-samples", type=_positive, default=30,
                   help="pairings averaged by --alignment expected (default: 30)")
    p.add_argument("--exact-limit", type=_positive, default=EXACT_LIMIT,
                   help=f"largest group count for exact shapley (default: {EXACT_LIMIT})")
    p.add_argument("--level", type=float, default=0.95,
                   help="interval level for shapley-sampled (default: 0.95)")
    p.add_argument("--format", default="json", choices=["json", "csv"],
                   help="report format (default: json)")
    p.add_argument("--out", metavar="PATH", help="write the report here instead of stdout")
    p.set_defaults(func=cmd_attribute)

    p = sub.add_parser("synth", help="generate the synthetic salary data set",
                       description="Write salary records with a period column 'day'. A sidecar "
                       "OUT.meta.json records the configuration and category maps.")
    p.add_argument("--config", metavar="FILE", help="read 'key = value' defaults from FILE")
    p.add_argument("--rows-per-period", type=_positive, default=2000,
                   help="rows per period (default: 2000)")
    p.add_argument("--periods", type=_positive, default=3, help="number of periods (default: 3)")
    p.add_argument("--seed", type=int, default=0, help="random seed (default: 0)")
    p.add_argument("--inject", action="append", default=[], metavar="SPEC",
                   help="drift injection, repeatable: location_case_bug@P or "
                   "feature_spike:FEATURE:MULT@P[-Q] (0-indexed periods, Q inclusive)")
    p.add_argument("--out", metavar="PATH", required=True, help="output CSV file")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("axioms", help="check drift-function axioms by random search",
                       description="Search for counterexamples to sensitivity, "
                       "differentiability, symmetry, identity of indiscernibles and "
                       "directionality, and compare with each metric's declared properties.")
    p.add_argument("--config", metavar="FILE", help="read 'key = value' defaults from FILE")
    p.add_argument("--metric", default="all", choices=["all"] + [m.value for m in Metric],
                   help="metric to check (default: all)")
    p.add_argument("--trials", type=_positive, default=1000,
                   help="random cases per axiom (default: 1000)")
    p.add_argument("--seed", type=int, default=0, help="random seed (default: 0)")
    p.add_argument("--bins", type=_positive,
                   help="check binned jsd with this many bins instead of exact jsd")
    p.set_defaults(func=cmd_axioms)
    return parser


# ---------------------------------------------------------------- loading

def _schema(args, extra_labels: Sequence[str] = ()) -> TableSchema:
    choice = args.schema
    if choice == "auto" and args.model == "salary":
        choice = "salary"
    if choice == "salary":
        schema = TableSchema(features=list(synth.FEATURES), category_maps=synth.CATEGORY_MAPS,
                             closed=False, fallback_code=synth.FALLBACK_CODE,
                             period_column=args.period_column or synth.PERIOD)
    elif choice == "auto":
        schema = TableSchema(period_column=args.period_column)
    else:
        try:
            obj = json.loads(Path(choice).read_text(encoding="utf-8"))
        except OSError as exc:
            raise ConfigError(f"cannot read schema {choice}: {exc.strerror}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"schema {choice} is not valid JSON: {exc}") from None
        known = {"features", "category_maps", "categorical", "closed", "period_column",
                 "label_columns", "fallback_code"}
        if not isinstance(obj, dict) or set(obj) - known:
            raise ConfigError(f"schema keys must be among {sorted(known)}")
        schema = TableSchema(**obj)
        if args.period_column:
            schema.period_column = args.period_column
    schema.prediction_column = args.prediction_column
    labels = set(schema.label_columns) | {c for c in extra_labels if c}
    if schema.period_column:
        labels.discard(schema.period_column)
    schema.label_columns = sorted(labels)
    if schema.features is not None:
        schema.features = [f for f in schema.features if f not in labels]
    return schema


def _load(path, schema: TableSchema, period: Optional[str]):
    try:
        table = load_table(path, schema)
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from None
    if period is None:
        return table, None
    if not schema.period_column:
        raise ConfigError("selecting a period needs --period-column")
    rows = [i for i, p in enumerate(table.periods) if p == period]
    if not rows:
        raise ConfigError(f"no rows with period {period!r} in {path}")
    return table, rows


class _Loaded:
    """A table restricted to an optional period selection."""

    def __init__(self, table, rows):
        self.table = table
        rows = rows if rows is not None else list(range(table.sample.m))
        self.rows = rows
        self.sample = table.sample.take_rows(rows)
        self.labels = {k: [v[i] for i in rows] for k, v in table.labels.items()}
        self.predictions = table.predictions[rows] if table.predictions is not None else None


def _load_pair(args, extra_labels=()):
    schema = _schema(args, extra_labels)
    e_table, e_rows = _load(args.explicand, schema, args.explicand_period)
    b_path = args.baseline or args.explicand
    if b_path == args.explicand:
        b_table = e_table
        _, b_rows = (None, None) if args.baseline_period is None else _load(
            b_path, schema, args.baseline_period)
    else:
        b_table, b_rows = _load(b_path, schema, args.baseline_period)
    return _Loaded(e_table, e_rows), _Loaded(b_table, b_rows)


def _model(args, sample) -> ModelFn:
    if not args.model:
        raise ConfigError("--model is required")
    return resolve_model(args.model, sample.feature_names)


def _hist(args) -> HistogramConfig:
    return HistogramConfig(bin_count=None if args.exact_jsd else args.bins)


def _write_text(path: Optional[str], data: bytes, out) -> None:
    if path is None or path == "-":
        if hasattr(out, "buffer"):
            out.flush()
            out.buffer.write(data)
        else:
            out.write(data.decode("utf-8"))
        out.flush()
        return
    try:
        Path(path).write_bytes(data)
    except OSError as exc:
        raise ConfigError(f"cannot write {path}: {exc.strerror}") from None


# ---------------------------------------------------------------- commands

def cmd_drift(args, out) -> int:
    metric = Metric.parse(args.metric)
    transforms = resolve_transforms(args.transform)
    hist = _hist(args)
    if args.timeseries:
        return _timeseries(args, transforms, hist, out)
    expl, base = _load_pair(args)
    if args.prediction_column and not args.model:
        pe = apply_transforms(expl.predictions, transforms)
        pb = apply_transforms(base.predictions, transforms)
        model = ModelFn.lookup([expl.sample, base.sample], [expl.predictions, base.predictions])
    else:
        model = _model(args, expl.sample)
        pe = pb = None

    result = {"metric": metric.value}
    if args.bootstrap:
        k, reps, level = args.bootstrap
        cfg = BootstrapConfig(resample_size=k, repetitions=reps, level=level, seed=args.seed)
        res = bootstrap_drift(expl.sample, base.sample, model, metric, cfg, transforms, hist,
                              args.threads)
        result.update(drift=res.mean, ci_low=res.ci[0], ci_high=res.ci[1], level=level,
                      resample_size=res.resample_size, repetitions=reps, seed=args.seed,
                      low_confidence=res.low_confidence)
        line = (f"{metric.value} drift = {res.mean!r} (bootstrap k={res.resample_size}, "
                f"R={reps}); {level:g} CI [{res.ci[0]!r}, {res.ci[1]!r}]")
        if res.low_confidence:
            print("warning: too few repetitions for this level; the interval is the range "
                  "of the draws", file=sys.stderr)
    else:
        if expl.sample.m != base.sample.m:
            raise DriftError(
                f"samples have {expl.sample.m} and {base.sample.m} rows; "
                "use --bootstrap to compare unequal samples"
            )
        if pe is not None:
            value = drift(metric, pe, pb, hist)
        else:
            validate_pair(expl.sample, base.sample)
            value = drift_between(expl.sample, base.sample, model, metric, transforms, hist)
        result["drift"] = value
        line = f"{metric.value} drift = {value!r}"
    print(line, file=out)
    for label, values in expl.labels.items():
        if label == expl.table.period_column:
            continue
        for w in proportion_diagnostic(values, base.labels.get(label, [])):
            print(f"warning: {label} {w}", file=sys.stderr)
    if args.json:
        _write_text(args.json, (_json(result) + "\n").encode(), out)
    return EXIT_OK


def _timeseries(args, transforms, hist, out) -> int:
    schema = _schema(args)
    if not schema.period_column:
        raise ConfigError("--timeseries needs --period-column")
    table, _ = _load(args.explicand, schema, None)
    model = _model(args, table.sample)
    parts = table.split_periods()
    labels = list(parts)
    ref = 0
    if args.reference_period is not None:
        if args.reference_period not in parts:
            raise ConfigError(f"no period {args.reference_period!r}")
        ref = labels.index(args.reference_period)
    result = timeseries(list(parts.values()), model, ref, labels, transforms, hist)
    result["jsd_bins"] = hist.bin_count
    _write_text(args.json, (_json(result) + "\n").encode(), out)
    return EXIT_OK


def cmd_attribute(args, out) -> int:
    col = label_column(args.groups)
    expl, base = _load_pair(args, extra_labels=[col] if col else [])
    if args.prediction_column and not args.model:
        raise ConfigError("attribution evaluates the model on hybrid samples; pass --model")
    model = _model(args, expl.sample)
    spec = parse_group_spec(args.groups, expl.sample, expl.labels)
    alignment = args.alignment
    if alignment not in (None, EXPECTED):
        alignment = Policy.parse(alignment)
    report = attribute(
        expl.sample, base.sample, model, args.metric, spec, method=args.method,
        alignment=alignment, seed=args.seed, permutations=args.permutations, steps=args.steps,
        rule=args.rule, alignment_samples=args.alignment_samples,
        transforms=resolve_transforms(args.transform), hist=_hist(args),
        exact_limit=args.exact_limit, threads=args.threads, level=args.level,
    )
    meta = dict(report.estimator_meta)
    if expl.table.category_maps:
        meta["category_maps"] = expl.table.category_maps
    if args.transform:
        meta["transforms"] = list(args.transform)
    report = dataclasses.replace(report, estimator_meta=meta)
    _write_text(args.out, write_report(report, args.format), out)
    return EXIT_OK


def cmd_synth(args, out) -> int:
    schedule = tuple(synth.DriftInjection.parse(s) for s in args.inject)
    cfg = synth.SalaryGenConfig(args.rows_per_period, args.periods, args.seed, schedule)
    data = synth.generate(cfg)
    columns = {name: list(data.raw[name]) for name in synth.FEATURES}
    columns[synth.PERIOD] = [int(p) for p in data.periods]
    try:
        write_table(args.out, columns)
    except OSError as exc:
        raise ConfigError(f"cannot write {args.out}: {exc.strerror}") from None
    sidecar = {
        "config": cfg.as_dict(),
        "category_maps": synth.CATEGORY_MAPS,
        "fallback_code": synth.FALLBACK_CODE,
        "period_column": synth.PERIOD,
        "features": list(synth.FEATURES),
    }
    _write_text(str(args.out) + ".meta.json", (_json(sidecar) + "\n").encode(), out)
    print(f"wrote {len(data.periods)} rows to {args.out}", file=out)
    return EXIT_OK


def cmd_axioms(args, out) -> int:
    metrics = list(Metric) if args.metric == "all" else [Metric.parse(args.metric)]
    cfg = HistogramConfig(bin_count=args.bins) if args.bins else None
    results = []
    for m in metrics:
        results += check_metric(m, args.trials, args.seed, cfg)
    print(format_table(results), file=out)
    return EXIT_INTERNAL if any(r.status == MISMATCH for r in results) else EXIT_OK


# ---------------------------------------------------------------- entry point

def main(argv: Optional[Sequence[str]] = None, out=None) -> int:
    out = out or sys.stdout
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        # the subcommand may follow global flags
        lead = [a for a in argv if a in ("-v", "--verbose")]
        rest = [a for a in argv if a not in ("-v", "--verbose")]
        argv = lead + _expand_config(rest)
    except ConfigError as exc:
        print(f"groupdrift: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        return args.func(args, out)
    except (DriftError, OSError) as exc:
        print(f"groupdrift: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except Exception as exc:  # noqa: BLE001
        print(f"groupdrift: internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
