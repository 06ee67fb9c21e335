"""Group specifications from text.

Accepted forms:

``features``
    one group per feature, all rows
``rows:COL``
    one group per distinct value of label column COL, all features
``features*rows:COL``
    cross product, groups named ``feature@value``
path to a CSV file
    columns ``name,rows,features``; ``rows`` is ``*`` or ``;``-separated
    inclusive ranges such as ``0-99;150``; ``features`` is ``*`` or
    ``;``-separated feature names
"""

from __future__ import annotations

import csv
from pathlib import Path
from typing import Mapping, Optional, Sequence

from .core import Group, GroupSpec, GroupSpecError, Sample


def label_column(text: str) -> Optional[str]:
    """The row-label column a spec string refers to, if any."""
    for prefix in ("rows:", "features*rows:"):
        if text.startswith(prefix):
            return text[len(prefix):]
    return None


def parse_group_spec(text: str, sample: Sample, labels: Optional[Mapping[str, Sequence]] = None
                     ) -> GroupSpec:
    labels = labels or {}
    if text == "features":
        return GroupSpec.per_feature(sample)
    col = label_column(text)
    if col is not None:
        if col not in labels:
            raise GroupSpecError(f"row label column {col!r} not loaded")
        values = list(labels[col])
        if len(values) != sample.m:
            raise GroupSpecError(f"column {col!r} has {len(values)} labels for {sample.m} rows")
        if text.startswith("rows:"):
            return GroupSpec.per_row_block(values, sample.n)
        return GroupSpec.features_by_rows(values, sample.feature_names)
    path = Path(text)
    if path.is_file():
        return read_group_file(path, sample)
    raise GroupSpecError(
        f"bad group spec {text!r}; expected features, rows:COL, features*rows:COL or a file"
    )


def _rows(text: str, m: int) -> frozenset[int]:
    text = text.strip()
    if text == "*":
        return frozenset(range(m))
    rows = set()
    for part in text.split(";"):
        lo, _, hi = part.strip().partition("-")
        try:
            a, b = int(lo), int(hi) if hi else int(lo)
        except ValueError:
            raise GroupSpecError(f"bad row range {part!r}") from None
        rows.update(range(a, b + 1))
    return frozenset(rows)


def _features(text: str, names: Sequence[str]) -> frozenset[int]:
    text = text.strip()
    if text == "*":
        return frozenset(range(len(names)))
    out = set()
    for name in text.split(";"):
        name = name.strip()
        if name not in names:
            raise GroupSpecError(f"unknown feature {name!r} in group file")
        out.add(list(names).index(name))
    return frozenset(out)


def read_group_file(path, sample: Sample) -> GroupSpec:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = [r for r in csv.reader(fh) if r and not r[0].startswith("#")]
    if not rows or [c.strip() for c in rows[0]] != ["name", "rows", "features"]:
        raise GroupSpecError("group file needs the header name,rows,features")
    groups = []
    for r in rows[1:]:
        if len(r) != 3:
            raise GroupSpecError(f"group file row {r!r} needs 3 fields")
        groups.append(Group(r[0].strip(), _rows(r[1], sample.m), _features(r[2], sample.feature_names)))
    return GroupSpec(tuple(groups), sample.shape)
