"""Attribute prediction drift between two data samples to groups of rows and features."""

from .alignment import Alignment, Policy, align
from .api import attribute, drift_between, timeseries
from .bootstrap import BootstrapConfig, bootstrap_attributions, bootstrap_drift
from .core import (
    AttributionReport,
    DriftError,
    Group,
    GroupSpec,
    Method,
    Metric,
    Sample,
)
from .ig import PathConfig, group_ig
from .metrics import (
    HistogramConfig,
    drift,
    expected_value_difference,
    jensen_shannon,
    ks_statistic,
    wasserstein1,
)
from .model import ModelFn, resolve_model
from .shapley import ValueFunctionContext, shapley_exact, shapley_sampled

__all__ = [
    "Alignment",
    "AttributionReport",
    "BootstrapConfig",
    "DriftError",
    "Group",
    "GroupSpec",
    "HistogramConfig",
    "Method",
    "Metric",
    "ModelFn",
    "PathConfig",
    "Policy",
    "Sample",
    "ValueFunctionContext",
    "align",
    "attribute",
    "bootstrap_attributions",
    "bootstrap_drift",
    "drift",
    "drift_between",
    "expected_value_difference",
    "group_ig",
    "jensen_shannon",
    "ks_statistic",
    "resolve_model",
    "shapley_exact",
    "shapley_sampled",
    "timeseries",
    "wasserstein1",
]
