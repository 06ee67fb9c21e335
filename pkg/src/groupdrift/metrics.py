"""Drift functions comparing two equal-length 1-D prediction samples."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import DriftError, Metric, PredictionVector


class MetricInputError(DriftError):
    pass


@dataclass(frozen=True)
class HistogramConfig:
    """Discretization used by the Jensen-Shannon divergence.

    Bins are equal width over the joint min..max of both samples. With
    ``bin_count=None`` every distinct value is its own bin, i.e. the exact
    empirical distributions are compared. Fixed-width bins cannot tell apart
    samples whose points fall into the same bins.
    """

    bin_count: Optional[int] = 10
    range_policy: str = "joint_min_max"
    log_base: float = 2.0

    def __post_init__(self):
        if self.bin_count is None:
            pass
        elif int(self.bin_count) != self.bin_count or self.bin_count < 2:
            raise MetricInputError(f"bin_count must be an integer >= 2, got {self.bin_count}")
        if self.range_policy != "joint_min_max":
            raise MetricInputError(f"unsupported range policy {self.range_policy!r}")
        if self.log_base <= 1:
            raise MetricInputError("log_base must exceed 1")


def _pair(a, b) -> tuple[np.ndarray, np.ndarray]:
    a = np.asarray(a.values if isinstance(a, PredictionVector) else a, dtype=float)
    b = np.asarray(b.values if isinstance(b, PredictionVector) else b, dtype=float)
    if a.ndim != 1 or b.ndim != 1:
        raise MetricInputError("drift functions take 1-D samples")
    if len(a) == 0 or len(b) == 0:
        raise MetricInputError("empty sample")
    if len(a) != len(b):
        raise MetricInputError(f"length mismatch: {len(a)} vs {len(b)}")
    return a, b


def wasserstein1(a, b) -> float:
    """Earth mover's distance between two equal-size empirical samples.

    For 1-D samples the optimal plan pairs order statistics, so this is the
    mean absolute difference of the sorted samples.
    """
    a, b = _pair(a, b)
    if np.array_equal(a, b):
        return 0.0
    return float(np.mean(np.abs(np.sort(a) - np.sort(b))))


def expected_value_difference(a, b) -> float:
    """mean(a) - mean(b). Signed: swapping the arguments flips the sign."""
    a, b = _pair(a, b)
    if np.array_equal(a, b):
        return 0.0
    return float(np.mean(a - b))


def jensen_shannon(a, b, cfg: HistogramConfig | None = None) -> float:
    """Jensen-Shannon divergence of the two binned empirical distributions."""
    cfg = cfg or HistogramConfig()
    a, b = _pair(a, b)
    if np.array_equal(a, b):
        return 0.0
    lo = min(a.min(), b.min())
    hi = max(a.max(), b.max())
    if lo == hi:
        return 0.0
    if cfg.bin_count is None:
        support, codes = np.unique(np.concatenate([a, b]), return_inverse=True)
        p = np.bincount(codes[: len(a)], minlength=len(support))
        q = np.bincount(codes[len(a):], minlength=len(support))
    else:
        p, _ = np.histogram(a, bins=cfg.bin_count, range=(lo, hi))
        q, _ = np.histogram(b, bins=cfg.bin_count, range=(lo, hi))
    p = p / p.sum()
    q = q / q.sum()
    mix = 0.5 * (p + q)
    return float(max(0.5 * (_kl(p, mix) + _kl(q, mix)) / np.log(cfg.log_base), 0.0))


def _kl(p: np.ndarray, q: np.ndarray) -> float:
    nz = p > 0
    return float(np.sum(p[nz] * np.log(p[nz] / q[nz])))


def ks_statistic(a, b) -> float:
    """Two-sample Kolmogorov-Smirnov statistic (no p-value)."""
    a, b = _pair(a, b)
    if np.array_equal(a, b):
        return 0.0
    a = np.sort(a)
    b = np.sort(b)
    grid = np.concatenate([a, b])
    cdf_a = np.searchsorted(a, grid, side="right") / len(a)
    cdf_b = np.searchsorted(b, grid, side="right") / len(b)
    return float(np.max(np.abs(cdf_a - cdf_b)))


def drift(metric, a, b, cfg: HistogramConfig | None = None) -> float:
    metric = Metric.parse(metric)
    if metric is Metric.W1:
        return wasserstein1(a, b)
    if metric is Metric.EVD:
        return expected_value_difference(a, b)
    if metric is Metric.JSD:
        return jensen_shannon(a, b, cfg)
    return ks_statistic(a, b)


def drift_rows(metric, batch: np.ndarray, reference: np.ndarray) -> np.ndarray:
    """Vectorized drift of every row of ``batch`` against one reference sample.

    Only the differentiable metrics are supported; it is the workhorse of the
    path-integral gradients.
    """
    metric = Metric.parse(metric)
    batch = np.atleast_2d(np.asarray(batch, dtype=float))
    reference = np.asarray(reference, dtype=float)
    if batch.shape[1] != len(reference):
        raise MetricInputError(f"length mismatch: {batch.shape[1]} vs {len(reference)}")
    if metric is Metric.EVD:
        return batch.mean(axis=1) - reference.mean()
    if metric is Metric.W1:
        return np.mean(np.abs(np.sort(batch, axis=1) - np.sort(reference)), axis=1)
    raise MetricInputError(f"batched drift not available for {metric.value}")
