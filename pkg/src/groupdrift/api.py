"""One-call entry points: measure drift, attribute it, trace it over periods."""

from __future__ import annotations

from typing import Optional, Sequence

import numpy as np

from .alignment import Alignment, Policy, align, default_policy, sampled_alignments
from .core import AttributionReport, DriftError, GroupSpec, Metric, Method, Sample, validate_pair
from .ig import PathConfig, group_ig
from .metrics import HistogramConfig, drift
from .model import ModelFn
from .shapley import EXACT_LIMIT, ValueFunctionContext, apply_transforms, shapley_exact, \
    shapley_sampled

METHODS = {
    "shapley": Method.SHAPLEY_EXACT,
    "shapley-sampled": Method.SHAPLEY_SAMPLED,
    "ig": Method.GROUP_IG,
}

EXPECTED = "expected"
DEFAULT_ALIGNMENT_SAMPLES = 30


def parse_method(name) -> Method:
    if isinstance(name, Method):
        return name
    if name in METHODS:
        return METHODS[name]
    try:
        return Method(name)
    except ValueError:
        raise DriftError(
            f"unknown method {name!r}; choose one of {', '.join(METHODS)}"
        ) from None


def drift_between(explicand: Sample, baseline: Sample, model: ModelFn, metric,
                  transforms=(), hist: HistogramConfig | None = None) -> float:
    """D(G(F(explicand)), G(F(baseline))) with no alignment (metrics are order-free)."""
    validate_pair(explicand, baseline)
    a = apply_transforms(model(explicand.values), transforms)
    b = apply_transforms(model(baseline.values), transforms)
    return drift(metric, a, b, hist)


def _one(explicand, baseline, alignment: Alignment, model, metric, spec, method, *,
         transforms, hist, seed, permutations, path, exact_limit, threads, level):
    meta = {"alignment": alignment.policy.value}
    ctx = ValueFunctionContext(explicand, alignment.apply(baseline), model, metric,
                               transforms, hist, meta)
    if method is Method.SHAPLEY_EXACT:
        return shapley_exact(ctx, spec, exact_limit, threads)
    if method is Method.SHAPLEY_SAMPLED:
        return shapley_sampled(ctx, spec, permutations, seed, level, threads)
    return group_ig(ctx, spec, path)


def attribute(
    explicand: Sample,
    baseline: Sample,
    model: ModelFn,
    metric,
    groups: GroupSpec | str = "features",
    method="shapley",
    alignment=None,
    seed: Optional[int] = 0,
    permutations: int = 1000,
    steps: int = 64,
    rule: str = "midpoint",
    alignment_samples: int = DEFAULT_ALIGNMENT_SAMPLES,
    transforms=(),
    hist: HistogramConfig | None = None,
    exact_limit: int = EXACT_LIMIT,
    threads: int = 1,
    level: float = 0.95,
) -> AttributionReport:
    """Attribute the drift between two equal-shaped samples to groups of cells.

    ``alignment`` is a policy name (``sorted``, ``identity``, ``sampled``), an
    :class:`Alignment`, or ``"expected"``: the average report over
    ``alignment_samples`` uniformly sampled pairings. It defaults to sorted
    pairing for W1 and identity otherwise.
    """
    validate_pair(explicand, baseline)
    metric = Metric.parse(metric)
    method = parse_method(method)
    if isinstance(groups, str):
        if groups != "features":
            raise DriftError("only the 'features' group shorthand is accepted here; "
                             "build other specs with GroupSpec or parse_group_spec")
        groups = GroupSpec.per_feature(explicand)
    opts = dict(transforms=transforms, hist=hist, seed=seed, permutations=permutations,
                path=PathConfig(steps=steps, rule=rule), exact_limit=exact_limit,
                threads=threads, level=level)

    if alignment == EXPECTED:
        if alignment_samples < 1:
            raise DriftError("alignment_samples must be >= 1")
        if seed is None:
            raise DriftError("expected alignment needs a seed")
        pairings = sampled_alignments(explicand.m, alignment_samples, seed)
        reports = [_one(explicand, baseline, a, model, metric, groups, method, **opts)
                   for a in pairings]
        attr = np.mean([r.as_array() for r in reports], axis=0)
        spread = np.std([r.as_array() for r in reports], axis=0, ddof=1) \
            if len(reports) > 1 else np.zeros(len(groups))
        return AttributionReport(
            groups=groups.names,
            attributions=attr,
            total_drift=float(np.mean([r.total_drift for r in reports])),
            metric=metric,
            method=method,
            estimator_meta={
                "alignment": EXPECTED,
                "alignment_samples": alignment_samples,
                "seed": seed,
                "alignment_spread": [float(s) for s in spread],
            },
        )

    if isinstance(alignment, Alignment):
        pairing = alignment
    else:
        policy = Policy.parse(alignment) if alignment is not None else default_policy(metric)
        pairing = align(explicand, baseline, model, policy, seed=seed)
    return _one(explicand, baseline, pairing, model, metric, groups, method, **opts)


def timeseries(periods: Sequence[Sample], model: ModelFn, reference: int = 0,
               labels: Optional[Sequence] = None, transforms=(),
               hist: HistogramConfig | None = None) -> dict:
    """Drift of every period against one reference period under all four metrics.

    Periods must have equal row counts; the output is plain data for plotting.
    """
    if not periods:
        raise DriftError("no periods")
    if not 0 <= reference < len(periods):
        raise DriftError(f"reference period {reference} out of range")
    labels = list(labels) if labels is not None else list(range(len(periods)))
    ref = periods[reference]
    sizes = {p.m for p in periods}
    if len(sizes) != 1:
        raise DriftError(f"periods have unequal row counts {sorted(sizes)}")
    series = {m.value: [drift_between(p, ref, model, m, transforms, hist) for p in periods]
              for m in Metric}
    return {"periods": labels, "reference": labels[reference], "drift": series}
