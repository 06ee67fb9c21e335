"""Shapley attribution of a drift value to groups of cells.

The value of a coalition is the drift between predictions on a hybrid sample
(coalition cells from the explicand, all other cells from the aligned
baseline) and predictions on the aligned baseline itself.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from statistics import NormalDist
from typing import Callable, Optional, Sequence

import numpy as np

from .core import (
    AttributionReport,
    DriftError,
    GroupSpec,
    Method,
    Metric,
    Sample,
    ShapeMismatchError,
    validate_pair,
)
from .metrics import HistogramConfig, drift
from .model import ModelFn

EXACT_LIMIT = 20


def _sigmoid(p):
    return 0.5 * (1.0 + np.tanh(0.5 * np.asarray(p, dtype=float)))


TRANSFORMS: dict[str, Callable[[np.ndarray], np.ndarray]] = {
    "identity": lambda p: p,
    "sigmoid": _sigmoid,
    "tanh": np.tanh,
    "exp": np.exp,
    "neg": np.negative,
}


def resolve_transforms(names: Sequence[str]) -> tuple:
    try:
        return tuple(TRANSFORMS[n] for n in names if n != "identity")
    except KeyError as exc:
        raise DriftError(f"unknown transform {exc.args[0]!r}; known: {', '.join(TRANSFORMS)}") from None


def apply_transforms(preds, transforms) -> np.ndarray:
    out = np.asarray(preds, dtype=float)
    for g in transforms:
        new = np.asarray(g(out), dtype=float)
        if new.shape != out.shape:
            raise ShapeMismatchError(f"transform changed shape {out.shape} -> {new.shape}")
        out = new
    return out


class ExactLimitError(DriftError):
    pass


@dataclass(frozen=True, eq=False)
class ValueFunctionContext:
    """Everything a coalition evaluation needs, frozen for the whole run.

    ``transforms`` is applied left to right to the model output of both
    samples before the drift function.
    """

    explicand: Sample
    aligned_baseline: Sample
    model: ModelFn
    metric: Metric
    transforms: tuple = ()
    cfg: Optional[HistogramConfig] = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        validate_pair(self.explicand, self.aligned_baseline)
        object.__setattr__(self, "metric", Metric.parse(self.metric))
        object.__setattr__(self, "transforms", tuple(self.transforms))
        ref = self.output(self.aligned_baseline.values)
        object.__setattr__(self, "_reference", ref)
        object.__setattr__(self, "_reference_sorted", np.sort(ref))

    @property
    def reference(self) -> np.ndarray:
        """G(F(aligned baseline))."""
        return self._reference

    def transform(self, preds: np.ndarray) -> np.ndarray:
        return apply_transforms(preds, self.transforms)

    def output(self, X: np.ndarray) -> np.ndarray:
        return self.transform(self.model(X))

    def value_of(self, X: np.ndarray) -> float:
        out = self.output(X)
        if self.metric is Metric.W1:
            if len(out) != len(self._reference_sorted):
                raise ShapeMismatchError("model output length changed")
            return float(np.mean(np.abs(np.sort(out) - self._reference_sorted)))
        return drift(self.metric, out, self.reference, self.cfg)

    def total_drift(self) -> float:
        return self.value_of(self.explicand.values)


def hybrid(ctx: ValueFunctionContext, cell_mask: np.ndarray) -> np.ndarray:
    return np.where(cell_mask, ctx.explicand.values, ctx.aligned_baseline.values)


def coalition_value(ctx: ValueFunctionContext, coalition, spec: GroupSpec) -> float:
    """Drift of the hybrid sample in which ``coalition`` groups are present."""
    members = sorted(set(coalition))
    if members and (members[0] < 0 or members[-1] >= len(spec)):
        raise DriftError(f"coalition {members} references groups outside 0..{len(spec) - 1}")
    if tuple(spec.shape) != ctx.explicand.shape:
        raise ShapeMismatchError(f"group spec shape {spec.shape} != sample {ctx.explicand.shape}")
    present = np.zeros(len(spec), dtype=bool)
    present[members] = True
    return ctx.value_of(hybrid(ctx, present[spec.owner]))


class CoalitionCache:
    """Memoized coalition values keyed by membership bitmask."""

    def __init__(self, ctx: ValueFunctionContext, spec: GroupSpec):
        if tuple(spec.shape) != ctx.explicand.shape:
            raise ShapeMismatchError(
                f"group spec shape {spec.shape} != sample {ctx.explicand.shape}"
            )
        self.ctx = ctx
        self.spec = spec
        self.owner = spec.owner
        self.values: dict[int, float] = {0: 0.0}
        self.evaluations = 0

    def members(self, bits: int) -> list[int]:
        return [g for g in range(len(self.spec)) if bits >> g & 1]

    def __call__(self, bits: int) -> float:
        # dict reads/writes are atomic; a racing duplicate evaluation is harmless
        try:
            return self.values[bits]
        except KeyError:
            pass
        present = np.zeros(len(self.spec), dtype=bool)
        present[self.members(bits)] = True
        value = self.ctx.value_of(hybrid(self.ctx, present[self.owner]))
        self.values[bits] = value
        self.evaluations += 1
        return value

    def fill(self, keys, threads: int = 1) -> None:
        todo = [k for k in dict.fromkeys(keys) if k not in self.values]
        if threads > 1 and len(todo) > 1:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                list(pool.map(self, todo))
        else:
            for k in todo:
                self(k)


def _meta(ctx: ValueFunctionContext, **extra) -> dict:
    meta = dict(ctx.meta)
    meta.update(extra)
    return meta


def shapley_exact(ctx: ValueFunctionContext, spec: GroupSpec, exact_limit: int = EXACT_LIMIT,
                  threads: int = 1) -> AttributionReport:
    """Exact Shapley values over all 2^G coalitions."""
    G = len(spec)
    if G > exact_limit:
        raise ExactLimitError(
            f"{G} groups exceed the exact limit of {exact_limit}; "
            "use the sampled estimator (shapley_sampled) instead"
        )
    cache = CoalitionCache(ctx, spec)
    size = 1 << G
    cache.fill(range(size), threads)
    v = np.array([cache.values[b] for b in range(size)])
    idx = np.arange(size)
    popcount = np.array([bin(b).count("1") for b in range(size)])
    weight = np.array(
        [math.factorial(s) * math.factorial(G - s - 1) / math.factorial(G) for s in range(G)]
    )
    phi = np.empty(G)
    for g in range(G):
        without = idx[(idx >> g) & 1 == 0]
        phi[g] = np.sum(weight[popcount[without]] * (v[without | (1 << g)] - v[without]))
    total = float(v[size - 1])
    return AttributionReport(
        groups=spec.names,
        attributions=phi,
        total_drift=total,
        metric=ctx.metric,
        method=Method.SHAPLEY_EXACT,
        estimator_meta=_meta(ctx, coalitions_evaluated=cache.evaluations),
    )


def shapley_sampled(ctx: ValueFunctionContext, spec: GroupSpec, permutations: int = 1000,
                    seed=0, level: float = 0.95, threads: int = 1) -> AttributionReport:
    """Monte Carlo Shapley values from uniformly random group orderings.

    Every ordering's marginal contributions sum to the total drift, so the
    mean estimate is efficient up to rounding. Any residual is spread over
    groups in proportion to their standard errors; the raw residual is kept
    in ``estimator_meta``.
    """
    if permutations < 1:
        raise DriftError("permutations must be >= 1")
    G = len(spec)
    rng = np.random.default_rng(seed)
    orders = np.array([rng.permutation(G) for _ in range(permutations)])
    prefixes = np.zeros((permutations, G + 1), dtype=object)
    for p, order in enumerate(orders):
        bits = 0
        for k, g in enumerate(order):
            bits |= 1 << int(g)
            prefixes[p, k + 1] = bits
    cache = CoalitionCache(ctx, spec)
    cache.fill((int(b) for b in prefixes.ravel()), threads)
    values = np.vectorize(lambda b: cache.values[int(b)], otypes=[float])(prefixes)
    marginals = np.empty((permutations, G))
    rows = np.arange(permutations)[:, None]
    marginals[rows, orders] = np.diff(values, axis=1)

    total = cache(int((1 << G) - 1))
    phi = marginals.mean(axis=0)
    if permutations > 1:
        se = marginals.std(axis=0, ddof=1) / math.sqrt(permutations)
    else:
        se = np.zeros(G)
    residual = float(total - phi.sum())
    share = se / se.sum() if se.sum() > 0 else np.full(G, 1.0 / G)
    phi = phi + residual * share
    z = NormalDist().inv_cdf(0.5 + level / 2)
    ci = tuple((float(p - z * s), float(p + z * s)) for p, s in zip(phi, se))
    return AttributionReport(
        groups=spec.names,
        attributions=phi,
        total_drift=total,
        metric=ctx.metric,
        method=Method.SHAPLEY_SAMPLED,
        estimator_meta=_meta(
            ctx,
            permutations=int(permutations),
            seed=seed,
            efficiency_residual=residual,
            standard_errors=[float(s) for s in se],
            coalitions_evaluated=cache.evaluations,
        ),
        ci=ci,
        ci_level=level,
    )
