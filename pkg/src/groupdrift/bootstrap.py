"""Bootstrap estimates of drift and attributions for unequal or large samples.

Each repetition draws ``k`` rows with replacement from both samples, giving
an equal-shaped pair. Intervals are percentile intervals over repetitions,
taken at order statistics (R+1)*tail and rounded outward (with two
repetitions the interval is the min and max of the two draws).

Slices compared this way should contain each segment in similar proportions
or the aggregate can reverse the per-segment picture (Simpson's paradox);
:func:`proportion_diagnostic` flags large imbalances.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .alignment import align, default_policy
from .core import DriftError, GroupSpec, Metric, Sample
from .metrics import HistogramConfig, drift
from .shapley import ValueFunctionContext, apply_transforms, shapley_sampled

MAX_RESAMPLE = 1_000_000


@dataclass(frozen=True)
class BootstrapConfig:
    resample_size: Optional[int] = None
    repetitions: int = 100
    level: float = 0.95
    seed: Optional[int] = None
    deterministic: bool = True
    max_resample: int = MAX_RESAMPLE

    def __post_init__(self):
        if self.repetitions < 2:
            raise DriftError("bootstrap needs at least 2 repetitions")
        if not 0 < self.level < 1:
            raise DriftError("confidence level must lie in (0, 1)")
        if self.resample_size is not None:
            if self.resample_size < 1:
                raise DriftError("resample size must be >= 1")
            if self.resample_size > self.max_resample:
                raise DriftError(
                    f"resample size {self.resample_size} exceeds the ceiling {self.max_resample}"
                )
        if self.deterministic and self.seed is None:
            raise DriftError("a seed is required in deterministic mode")

    def size_for(self, m1: int, m2: int) -> int:
        return self.resample_size or min(m1, m2, 1000)


@dataclass
class BootstrapResult:
    mean: float
    ci: tuple[float, float]
    level: float
    draws: np.ndarray
    resample_size: int
    repetitions: int
    meta: dict = field(default_factory=dict)

    @property
    def low_confidence(self) -> bool:
        return bool(self.meta.get("low_confidence"))


def _order_indices(repetitions: int, level: float) -> tuple[int, int]:
    # 1-based order statistics at (R+1)*tail and (R+1)*(1-tail), clamped to the draws
    tail = (1 - level) / 2
    lo = math.floor((repetitions + 1) * tail + 1e-9)
    hi = math.ceil((repetitions + 1) * (1 - tail) - 1e-9)
    return min(max(lo, 1), repetitions), max(min(hi, repetitions), 1)


def percentile_interval(draws, level: float) -> tuple[float, float]:
    """Percentile interval from the sorted draws at ranks (R+1)*tail and (R+1)*(1-tail).

    Ranks are rounded outward; with too few draws for the level the interval
    is the full range of the draws.
    """
    draws = np.sort(np.asarray(draws, dtype=float))
    lo, hi = _order_indices(len(draws), level)
    return float(draws[lo - 1]), float(draws[hi - 1])


def _low_confidence(repetitions: int, level: float) -> bool:
    # the lower rank had to be clamped to the smallest draw
    return (repetitions + 1) * (1 - level) / 2 < 1


def _streams(seed, repetitions: int) -> list[np.random.Generator]:
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(repetitions)]


def _resample(rng, explicand: Sample, baseline: Sample, k: int) -> tuple[np.ndarray, np.ndarray]:
    return rng.integers(0, explicand.m, k), rng.integers(0, baseline.m, k)


def _run(fn, items, threads: int) -> list:
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(fn, items))
    return [fn(i) for i in items]


def bootstrap_drift(raw_explicand: Sample, raw_baseline: Sample, model, metric,
                    cfg: BootstrapConfig, transforms=(), hist: HistogramConfig | None = None,
                    threads: int = 1) -> BootstrapResult:
    """Mean drift over bootstrap repetitions and its percentile interval."""
    if raw_explicand.feature_names != raw_baseline.feature_names:
        raise DriftError("explicand and baseline have different features")
    k = cfg.size_for(raw_explicand.m, raw_baseline.m)
    metric = Metric.parse(metric)
    out_e = apply_transforms(model(raw_explicand.values), transforms)
    out_b = apply_transforms(model(raw_baseline.values), transforms)
    rngs = _streams(cfg.seed, cfg.repetitions)

    def one(rng):
        ie, ib = _resample(rng, raw_explicand, raw_baseline, k)
        return drift(metric, out_e[ie], out_b[ib], hist)

    draws = np.array(_run(one, rngs, threads))
    low = _low_confidence(cfg.repetitions, cfg.level)
    return BootstrapResult(
        mean=float(draws.mean()),
        ci=percentile_interval(draws, cfg.level),
        level=cfg.level,
        draws=draws,
        resample_size=k,
        repetitions=cfg.repetitions,
        meta={
            "seed": cfg.seed,
            "metric": metric.value,
            "low_confidence": low,
            "mean_standard_error": float(draws.std(ddof=1) / math.sqrt(len(draws))),
        },
    )


@dataclass
class BootstrapAttribution:
    groups: list[str]
    mean: np.ndarray
    ci: list[tuple[float, float]]
    drift: BootstrapResult
    draws: np.ndarray


def bootstrap_attributions(
    raw_explicand: Sample,
    raw_baseline: Sample,
    model,
    metric,
    cfg: BootstrapConfig,
    group_fn: Optional[Callable[[Sample, np.ndarray], GroupSpec]] = None,
    permutations: int = 200,
    policy=None,
    transforms=(),
    hist: HistogramConfig | None = None,
    threads: int = 1,
) -> BootstrapAttribution:
    """Sampled Shapley attributions averaged over bootstrap repetitions.

    ``group_fn(resampled_explicand, explicand_row_indices)`` builds the group
    spec for each repetition; it defaults to one group per feature. Group
    names must be the same in every repetition.
    """
    k = cfg.size_for(raw_explicand.m, raw_baseline.m)
    policy = policy or default_policy(metric)
    group_fn = group_fn or (lambda s, rows: GroupSpec.per_feature(s))
    rngs = _streams(cfg.seed, cfg.repetitions)

    def one(rng):
        ie, ib = _resample(rng, raw_explicand, raw_baseline, k)
        # drawn rows repeat, so fresh row ids are assigned
        expl = Sample(raw_explicand.values[ie], raw_explicand.feature_names)
        base = Sample(raw_baseline.values[ib], raw_baseline.feature_names)
        seed = int(rng.integers(2**63))
        alignment = align(expl, base, model, policy, seed=seed)
        ctx = ValueFunctionContext(expl, alignment.apply(base), model, metric, transforms, hist)
        spec = group_fn(expl, ie)
        report = shapley_sampled(ctx, spec, permutations, seed=seed)
        return report.groups, report.as_array(), report.total_drift

    results = _run(one, rngs, threads)
    names = results[0][0]
    if any(r[0] != names for r in results):
        raise DriftError("group names differ between bootstrap repetitions")
    draws = np.array([r[1] for r in results])
    totals = np.array([r[2] for r in results])
    drift_result = BootstrapResult(
        mean=float(totals.mean()),
        ci=percentile_interval(totals, cfg.level),
        level=cfg.level,
        draws=totals,
        resample_size=k,
        repetitions=cfg.repetitions,
        meta={"seed": cfg.seed, "low_confidence": _low_confidence(cfg.repetitions, cfg.level)},
    )
    return BootstrapAttribution(
        groups=list(names),
        mean=draws.mean(axis=0),
        ci=[percentile_interval(draws[:, g], cfg.level) for g in range(draws.shape[1])],
        drift=drift_result,
        draws=draws,
    )


def proportion_diagnostic(labels_explicand: Sequence, labels_baseline: Sequence,
                          threshold: float = 0.10) -> list[str]:
    """Segments whose row share differs between the samples by more than ``threshold``."""
    a = np.asarray(labels_explicand, dtype=object)
    b = np.asarray(labels_baseline, dtype=object)
    warnings = []
    for lab in dict.fromkeys(list(a) + list(b)):
        fa = float(np.mean(a == lab)) if len(a) else 0.0
        fb = float(np.mean(b == lab)) if len(b) else 0.0
        if abs(fa - fb) > threshold + 1e-12:
            warnings.append(
                f"segment {lab!r}: {fa:.1%} of explicand rows vs {fb:.1%} of baseline rows"
            )
    return warnings

