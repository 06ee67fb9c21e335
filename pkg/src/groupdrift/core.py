"""Domain types shared across the package.

Everything here is immutable after construction; arrays are copied and
marked read-only so instances can be shared between workers.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Hashable, Optional, Sequence

import numpy as np


class DriftError(ValueError):
    """Base class for user-facing input errors."""


class ShapeMismatchError(DriftError):
    pass


class FeatureNameError(DriftError):
    pass


class NonFiniteError(DriftError):
    pass


class GroupSpecError(DriftError):
    pass


def _frozen(values, dtype=float) -> np.ndarray:
    arr = np.array(values, dtype=dtype, copy=True)
    arr.setflags(write=False)
    return arr


def _check_finite(values: np.ndarray, what: str) -> None:
    bad = np.argwhere(~np.isfinite(values))
    if len(bad):
        idx = tuple(int(i) for i in bad[0])
        raise NonFiniteError(f"{what} has a non-finite value at index {idx}")


@dataclass(frozen=True, eq=False)
class Sample:
    """An m x n block of feature values with names and row identifiers."""

    values: np.ndarray
    feature_names: tuple[str, ...]
    row_ids: tuple[Hashable, ...] = ()

    def __post_init__(self):
        values = _frozen(self.values)
        if values.ndim != 2:
            raise ShapeMismatchError(f"sample must be 2-D, got shape {values.shape}")
        m, n = values.shape
        if m < 1 or n < 1:
            raise ShapeMismatchError(f"empty sample: shape {values.shape}")
        _check_finite(values, "sample")
        names = tuple(str(s) for s in self.feature_names)
        if len(names) != n:
            raise FeatureNameError(f"expected {n} feature names, got {len(names)}")
        if len(set(names)) != n:
            dup = next(s for s in names if names.count(s) > 1)
            raise FeatureNameError(f"duplicate feature name {dup!r}")
        row_ids = tuple(self.row_ids) if len(self.row_ids) else tuple(range(m))
        if len(row_ids) != m:
            raise ShapeMismatchError(f"expected {m} row ids, got {len(row_ids)}")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "feature_names", names)
        object.__setattr__(self, "row_ids", row_ids)

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape

    @property
    def m(self) -> int:
        return self.values.shape[0]

    @property
    def n(self) -> int:
        return self.values.shape[1]

    def take_rows(self, rows: Sequence[int]) -> "Sample":
        rows = np.asarray(rows, dtype=int)
        return Sample(self.values[rows], self.feature_names, tuple(self.row_ids[i] for i in rows))

    def with_values(self, values: np.ndarray) -> "Sample":
        return Sample(values, self.feature_names, self.row_ids)

    def __eq__(self, other):
        if not isinstance(other, Sample):
            return NotImplemented
        return (
            self.feature_names == other.feature_names
            and self.row_ids == other.row_ids
            and np.array_equal(self.values, other.values)
        )

    __hash__ = None


class Source(str, enum.Enum):
    EXPLICAND = "explicand"
    BASELINE = "baseline"
    HYBRID = "hybrid"


@dataclass(frozen=True, eq=False)
class PredictionVector:
    values: np.ndarray
    source: Source = Source.HYBRID

    def __post_init__(self):
        values = _frozen(self.values)
        if values.ndim != 1:
            raise ShapeMismatchError(f"predictions must be 1-D, got shape {values.shape}")
        _check_finite(values, "predictions")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "source", Source(self.source))

    def __len__(self):
        return len(self.values)

    def __array__(self, dtype=None, copy=None):
        return self.values if dtype is None else self.values.astype(dtype)


class Capability(enum.Flag):
    NONE = 0
    SENSITIVE = enum.auto()
    DIFFERENTIABLE = enum.auto()
    SYMMETRIC = enum.auto()
    IDENTITY = enum.auto()
    DIRECTIONAL = enum.auto()


class Metric(str, enum.Enum):
    """Distributional drift functions and the axioms each one satisfies."""

    W1 = "w1"
    EVD = "evd"
    JSD = "jsd"
    KS = "ks"

    @property
    def capabilities(self) -> Capability:
        return _CAPABILITIES[self]

    def has(self, cap: Capability) -> bool:
        return bool(self.capabilities & cap)

    @classmethod
    def parse(cls, name: "str | Metric") -> "Metric":
        if isinstance(name, Metric):
            return name
        try:
            return cls(str(name).lower())
        except ValueError:
            choices = ", ".join(m.value for m in cls)
            raise DriftError(f"unknown metric {name!r} (choose from {choices})") from None


_C = Capability
_CAPABILITIES = {
    Metric.W1: _C.SENSITIVE | _C.DIFFERENTIABLE | _C.SYMMETRIC | _C.IDENTITY,
    Metric.EVD: _C.SENSITIVE | _C.DIFFERENTIABLE | _C.DIRECTIONAL,
    Metric.JSD: _C.SYMMETRIC | _C.IDENTITY,
    Metric.KS: _C.SYMMETRIC | _C.IDENTITY,
}


@dataclass(frozen=True)
class Group:
    name: str
    rows: frozenset[int]
    features: frozenset[int]

    @property
    def size(self) -> int:
        return len(self.rows) * len(self.features)


@dataclass(frozen=True, eq=False)
class GroupSpec:
    """A partition of the m x n cells into named rows x features blocks.

    Construction fails unless the blocks are non-empty, pairwise disjoint and
    together cover every cell.
    """

    groups: tuple[Group, ...]
    shape: tuple[int, int]

    def __post_init__(self):
        groups = tuple(
            g if isinstance(g, Group) else Group(str(g[0]), frozenset(g[1]), frozenset(g[2]))
            for g in self.groups
        )
        m, n = self.shape
        if not groups:
            raise GroupSpecError("group spec is empty")
        owner = np.full((m, n), -1, dtype=int)
        names = set()
        for k, g in enumerate(groups):
            if g.name in names:
                raise GroupSpecError(f"duplicate group name {g.name!r}")
            names.add(g.name)
            if not g.rows or not g.features:
                raise GroupSpecError(f"group {g.name!r} has no cells")
            rows, feats = sorted(g.rows), sorted(g.features)
            if rows[0] < 0 or rows[-1] >= m or feats[0] < 0 or feats[-1] >= n:
                raise GroupSpecError(f"group {g.name!r} indexes outside a {m}x{n} sample")
            block = owner[np.ix_(rows, feats)]
            clash = block[block >= 0]
            if clash.size:
                raise GroupSpecError(
                    f"groups {groups[clash[0]].name!r} and {g.name!r} overlap"
                )
            owner[np.ix_(rows, feats)] = k
        missing = np.argwhere(owner < 0)
        if len(missing):
            i, j = missing[0]
            raise GroupSpecError(
                f"groups do not cover the sample: cell ({i}, {j}) and "
                f"{len(missing) - 1} others unassigned"
            )
        owner.setflags(write=False)
        object.__setattr__(self, "groups", groups)
        object.__setattr__(self, "shape", (int(m), int(n)))
        object.__setattr__(self, "_owner", owner)

    def __len__(self):
        return len(self.groups)

    def __iter__(self):
        return iter(self.groups)

    @property
    def names(self) -> list[str]:
        return [g.name for g in self.groups]

    @property
    def owner(self) -> np.ndarray:
        """(m, n) array giving the group index of each cell."""
        return self._owner

    def masks(self) -> np.ndarray:
        """Boolean array of shape (G, m, n), one cell mask per group."""
        return self._owner[None, :, :] == np.arange(len(self.groups))[:, None, None]

    @classmethod
    def per_feature(cls, sample_or_shape, names: Optional[Sequence[str]] = None) -> "GroupSpec":
        m, n = _shape_of(sample_or_shape)
        if names is None:
            names = getattr(sample_or_shape, "feature_names", [f"f{j}" for j in range(n)])
        rows = frozenset(range(m))
        return cls(tuple(Group(names[j], rows, frozenset([j])) for j in range(n)), (m, n))

    @classmethod
    def per_row_block(cls, labels: Sequence, n: int, name_fmt: str = "{}") -> "GroupSpec":
        """One group per distinct label, spanning all features of those rows."""
        order = list(dict.fromkeys(labels))
        groups = tuple(
            Group(name_fmt.format(lab), frozenset(i for i, x in enumerate(labels) if x == lab),
                  frozenset(range(n)))
            for lab in order
        )
        return cls(groups, (len(labels), n))

    @classmethod
    def features_by_rows(cls, labels: Sequence, feature_names: Sequence[str]) -> "GroupSpec":
        """Cross product of features and row blocks, named ``feature@label``."""
        order = list(dict.fromkeys(labels))
        groups = []
        for lab in order:
            rows = frozenset(i for i, x in enumerate(labels) if x == lab)
            for j, f in enumerate(feature_names):
                groups.append(Group(f"{f}@{lab}", rows, frozenset([j])))
        return cls(tuple(groups), (len(labels), len(feature_names)))


def _shape_of(obj) -> tuple[int, int]:
    if isinstance(obj, Sample):
        return obj.shape
    m, n = obj
    return int(m), int(n)


class Method(str, enum.Enum):
    SHAPLEY_EXACT = "shapley_exact"
    SHAPLEY_SAMPLED = "shapley_sampled"
    GROUP_IG = "group_ig"


@dataclass(frozen=True)
class AttributionReport:
    """Per-group attributions of a drift value."""

    groups: tuple[str, ...]
    attributions: tuple[float, ...]
    total_drift: float
    metric: Metric
    method: Method
    estimator_meta: dict = field(default_factory=dict)
    ci: Optional[tuple[tuple[float, float], ...]] = None
    ci_level: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, "groups", tuple(self.groups))
        object.__setattr__(self, "attributions", tuple(float(a) for a in self.attributions))
        object.__setattr__(self, "total_drift", float(self.total_drift))
        object.__setattr__(self, "metric", Metric.parse(self.metric))
        object.__setattr__(self, "method", Method(self.method))
        if len(self.groups) != len(self.attributions):
            raise ShapeMismatchError("one attribution per group required")
        if self.ci is not None:
            ci = tuple((float(lo), float(hi)) for lo, hi in self.ci)
            if len(ci) != len(self.groups):
                raise ShapeMismatchError("one confidence interval per group required")
            object.__setattr__(self, "ci", ci)

    @property
    def per_group(self) -> list[tuple[str, float]]:
        return list(zip(self.groups, self.attributions))

    def as_array(self) -> np.ndarray:
        return np.array(self.attributions)

    def efficiency_residual(self) -> float:
        return abs(sum(self.attributions) - self.total_drift)

    def __getitem__(self, name: str) -> float:
        return self.attributions[self.groups.index(name)]


def validate_pair(explicand: Sample, baseline: Sample) -> tuple[Sample, Sample]:
    """Check that two samples can be compared cell for cell."""
    if explicand.shape != baseline.shape:
        axis = 0 if explicand.m != baseline.m else 1
        raise ShapeMismatchError(
            f"explicand shape {explicand.shape} != baseline shape {baseline.shape} "
            f"(axis {axis})"
        )
    for j, (a, b) in enumerate(zip(explicand.feature_names, baseline.feature_names)):
        if a != b:
            raise FeatureNameError(f"feature {j}: explicand has {a!r}, baseline has {b!r}")
    return explicand, baseline
