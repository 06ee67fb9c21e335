"""CSV ingestion and report serialization.

Input files are UTF-8 comma-separated text with a mandatory header row and
'.' as decimal separator. Reports are written as one JSON object or as CSV
with one row per group.

JSON report fields, in order: ``method``, ``metric``, ``total_drift``,
``ci_level``, ``groups`` (list of ``{name, attribution[, ci_low, ci_high]}``)
and ``estimator_meta``. CSV report columns: ``group``, ``attribution`` and,
when intervals exist, ``ci_low``, ``ci_high``.
"""

from __future__ import annotations

import csv
import io as _io
import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .core import AttributionReport, DriftError, Sample

log = logging.getLogger(__name__)


class TableError(DriftError):
    pass


@dataclass
class TableSchema:
    """How to turn text columns into a numeric sample.

    Columns listed in ``category_maps`` are categorical. With ``closed`` set,
    a value missing from its map is an error; otherwise it encodes to
    ``fallback_code`` with a warning. Categorical columns without a map get
    integer codes in first-seen order.
    """

    features: Optional[list[str]] = None
    category_maps: dict = field(default_factory=dict)
    categorical: list[str] = field(default_factory=list)
    closed: bool = True
    fallback_code: int = 0
    period_column: Optional[str] = None
    prediction_column: Optional[str] = None
    label_columns: list[str] = field(default_factory=list)


@dataclass
class Table:
    sample: Sample
    category_maps: dict
    labels: dict
    predictions: Optional[np.ndarray] = None
    period_column: Optional[str] = None

    @property
    def periods(self) -> Optional[list]:
        return self.labels.get(self.period_column) if self.period_column else None

    def split_periods(self) -> dict:
        """One sample per distinct period value, in first-seen order."""
        if not self.period_column:
            raise TableError("no period column configured")
        periods = self.labels[self.period_column]
        out = {}
        for p in dict.fromkeys(periods):
            rows = [i for i, x in enumerate(periods) if x == p]
            out[p] = self.sample.take_rows(rows)
        return out


def _read_rows(source) -> tuple[list[str], list[list[str]]]:
    if isinstance(source, (str, Path)):
        with open(source, newline="", encoding="utf-8") as fh:
            rows = list(csv.reader(fh))
    else:
        rows = list(csv.reader(source))
    rows = [r for r in rows if r]
    if not rows:
        raise TableError("file has no header row")
    header = [h.strip() for h in rows[0]]
    if len(set(header)) != len(header):
        raise TableError("duplicate column names in header")
    body = rows[1:]
    for k, row in enumerate(body, start=1):
        if len(row) != len(header):
            raise TableError(
                f"ragged row {k}: {len(row)} fields, header has {len(header)}"
            )
    if not body:
        raise TableError("empty sample: file has no data rows")
    return header, body


def _parse_float(text: str) -> Optional[float]:
    try:
        value = float(text)
    except ValueError:
        return None
    return value if math.isfinite(value) else None


def load_table(source, schema: Optional[TableSchema] = None) -> Table:
    """Read a CSV file (path or text stream) into an encoded sample."""
    schema = schema or TableSchema()
    header, body = _read_rows(source)
    columns = {name: [row[j].strip() for row in body] for j, name in enumerate(header)}

    reserved = set(schema.label_columns)
    for col in (schema.period_column, schema.prediction_column):
        if col:
            reserved.add(col)
    for col in reserved:
        if col not in columns:
            raise TableError(f"column {col!r} not found")
    features = schema.features or [h for h in header if h not in reserved]
    for name in features:
        if name not in columns:
            raise TableError(f"feature column {name!r} not found")

    maps: dict = {}
    encoded = []
    for j, name in enumerate(features):
        col = columns[name]
        if name in schema.category_maps:
            maps[name] = dict(schema.category_maps[name])
            encoded.append(_encode_closed(name, col, maps[name], schema))
            continue
        values = [_parse_float(v) for v in col]
        if name not in schema.categorical and all(v is not None for v in values):
            encoded.append(np.array(values, dtype=float))
            continue
        if schema.features is not None and name not in schema.categorical:
            k = next(i for i, v in enumerate(values) if v is None)
            raise TableError(f"unparseable cell {col[k]!r} at data row {k + 1}, column {name!r}")
        mapping = {v: i for i, v in enumerate(dict.fromkeys(col))}
        maps[name] = mapping
        log.info("column %s encoded as %s", name, mapping)
        encoded.append(np.array([mapping[v] for v in col], dtype=float))

    predictions = None
    if schema.prediction_column:
        col = columns[schema.prediction_column]
        values = [_parse_float(v) for v in col]
        if any(v is None for v in values):
            k = next(i for i, v in enumerate(values) if v is None)
            raise TableError(
                f"unparseable cell {col[k]!r} at data row {k + 1}, "
                f"column {schema.prediction_column!r}"
            )
        predictions = np.array(values)

    labels = {c: columns[c] for c in reserved if c != schema.prediction_column}
    sample = Sample(np.column_stack(encoded), features)
    return Table(sample, maps, labels, predictions, schema.period_column)


def _encode_closed(name: str, col: Sequence[str], mapping: dict, schema: TableSchema) -> np.ndarray:
    unknown = [i for i, v in enumerate(col) if v not in mapping]
    if unknown and schema.closed:
        shown = ", ".join(f"{i + 1} ({col[i]!r})" for i in unknown[:10])
        more = f" and {len(unknown) - 10} more" if len(unknown) > 10 else ""
        raise TableError(f"unknown category in column {name!r} at data rows {shown}{more}")
    if unknown:
        log.warning("%s: %d rows with unknown categories encoded as %d",
                    name, len(unknown), schema.fallback_code)
    return np.array([mapping.get(v, schema.fallback_code) for v in col], dtype=float)


def format_float(x: float) -> str:
    return format(float(x), ".17g")


def write_table(dest, columns: dict) -> None:
    """Write equal-length columns as CSV; floats keep 17 significant digits."""
    names = list(columns)
    n = len(columns[names[0]]) if names else 0
    own = isinstance(dest, (str, Path))
    fh = open(dest, "w", newline="", encoding="utf-8") if own else dest
    try:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(names)
        for i in range(n):
            writer.writerow(_cell(columns[c][i]) for c in names)
    finally:
        if own:
            fh.close()


def _cell(value) -> str:
    if isinstance(value, (float, np.floating)):
        return format_float(value)
    return str(value)


def _json(obj) -> str:
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, (float, np.floating)):
        if not math.isfinite(obj):
            return json.dumps(None)
        return format_float(obj)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {_json(v)}" for k, v in obj.items()) + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        return "[" + ", ".join(_json(v) for v in obj) + "]"
    if hasattr(obj, "value"):
        return _json(obj.value)
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def report_to_dict(report: AttributionReport) -> dict:
    groups = []
    for k, (name, value) in enumerate(report.per_group):
        entry = {"name": name, "attribution": value}
        if report.ci is not None:
            entry["ci_low"], entry["ci_high"] = report.ci[k]
        groups.append(entry)
    return {
        "method": report.method.value,
        "metric": report.metric.value,
        "total_drift": report.total_drift,
        "ci_level": report.ci_level,
        "groups": groups,
        "estimator_meta": dict(sorted(report.estimator_meta.items())),
    }


def write_report(report: AttributionReport, fmt: str = "json") -> bytes:
    if fmt == "json":
        return (_json(report_to_dict(report)) + "\n").encode("utf-8")
    if fmt != "csv":
        raise DriftError(f"unknown report format {fmt!r}")
    buf = _io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    has_ci = report.ci is not None
    writer.writerow(["group", "attribution"] + (["ci_low", "ci_high"] if has_ci else []))
    for k, (name, value) in enumerate(report.per_group):
        row = [name, format_float(value)]
        if has_ci:
            row += [format_float(v) for v in report.ci[k]]
        writer.writerow(row)
    return buf.getvalue().encode("utf-8")


def read_report(data: bytes) -> AttributionReport:
    obj = json.loads(data)
    groups = obj["groups"]
    ci = None
    if groups and "ci_low" in groups[0]:
        ci = tuple((g["ci_low"], g["ci_high"]) for g in groups)
    return AttributionReport(
        groups=tuple(g["name"] for g in groups),
        attributions=tuple(g["attribution"] for g in groups),
        total_drift=obj["total_drift"],
        metric=obj["metric"],
        method=obj["method"],
        estimator_meta=obj["estimator_meta"],
        ci=ci,
        ci_level=obj["ci_level"],
    )
