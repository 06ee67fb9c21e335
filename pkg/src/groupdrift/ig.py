"""Path-integrated gradients of a drift value, summed over groups.

The path is the straight line X(a) = B + a (S - B) from the aligned baseline
B to the explicand S, moving every cell at once. Partial derivatives of
H(X) = D(G(F(X)), G(F(B))) are central finite differences.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import AttributionReport, DriftError, GroupSpec, Method, Metric, ShapeMismatchError
from .metrics import drift_rows
from .shapley import ValueFunctionContext

# rows of perturbed prediction vectors held in memory at once
_CHUNK_CELLS = 2_000_000


class NonDifferentiableMetricError(DriftError):
    pass


@dataclass(frozen=True)
class PathConfig:
    """Discretization of the path integral.

    ``rule`` is ``"midpoint"`` (nodes at (k + 1/2)/steps) or ``"trapezoid"``
    (nodes at k/steps, half weight at both ends). The trapezoid evaluates the
    gradient at the baseline itself, where W1 is never differentiable.
    """

    steps: int = 64
    rule: str = "midpoint"
    fd_epsilon: float = 1e-5
    fd_floor: float = 1e-8

    def __post_init__(self):
        if int(self.steps) != self.steps or self.steps < 1:
            raise DriftError(f"steps must be a positive integer, got {self.steps}")
        if self.rule not in ("midpoint", "trapezoid"):
            raise DriftError(f"unknown integration rule {self.rule!r}")
        if not self.fd_epsilon > 0 or not self.fd_floor > 0:
            raise DriftError("finite-difference steps must be positive")

    def nodes(self) -> tuple[np.ndarray, np.ndarray]:
        n = self.steps
        if self.rule == "midpoint":
            return (np.arange(n) + 0.5) / n, np.full(n, 1.0 / n)
        weights = np.full(n + 1, 1.0 / n)
        weights[[0, -1]] *= 0.5
        return np.arange(n + 1) / n, weights


def _require_differentiable(metric: Metric) -> None:
    if metric not in (Metric.W1, Metric.EVD):
        raise NonDifferentiableMetricError(
            f"{metric.value} is not differentiable in the sample points (its value is "
            "piecewise constant with jumps), so path gradients are undefined; "
            "use w1 or evd with integrated gradients, or a Shapley method"
        )


def fd_steps(ctx: ValueFunctionContext, cfg: PathConfig) -> np.ndarray:
    scale = np.maximum(np.abs(ctx.explicand.values), np.abs(ctx.aligned_baseline.values))
    return np.maximum(cfg.fd_epsilon * scale, cfg.fd_floor)


def gradient(ctx: ValueFunctionContext, X: np.ndarray, cells, h: np.ndarray) -> np.ndarray:
    """Central-difference partials of H at X for the given (row, col) cells."""
    rows, cols = cells
    preds = ctx.model(X)
    ref = ctx.reference
    out = np.empty(len(rows))
    m = X.shape[0]
    chunk = max(1, _CHUNK_CELLS // max(m, 1))
    for start in range(0, len(rows), chunk):
        r = rows[start:start + chunk]
        c = cols[start:start + chunk]
        step = h[r, c]
        k = len(r)
        probe = np.repeat(X[r], 2, axis=0)
        probe[0::2, :][np.arange(k), c] += step
        probe[1::2, :][np.arange(k), c] -= step
        probe_preds = ctx.model(probe)
        batch = np.repeat(preds[None, :], 2 * k, axis=0)
        batch[np.arange(2 * k), np.repeat(r, 2)] = probe_preds
        values = drift_rows(ctx.metric, ctx.transform(batch), ref)
        out[start:start + k] = (values[0::2] - values[1::2]) / (2 * step)
    return out


def _analytic_gradient(ctx: ValueFunctionContext, X: np.ndarray, cells) -> np.ndarray:
    rows, cols = cells
    grad_f = np.asarray(ctx.model.gradient(X), dtype=float)
    m = X.shape[0]
    if ctx.metric is Metric.EVD:
        dD = np.full(m, 1.0 / m)
    else:
        preds = ctx.model(X)
        order = np.argsort(preds, kind="stable")
        dD = np.empty(m)
        dD[order] = np.sign(preds[order] - np.sort(ctx.reference)) / m
    return dD[rows] * grad_f[rows, cols]


def group_ig(ctx: ValueFunctionContext, spec: GroupSpec, cfg: PathConfig | None = None
             ) -> AttributionReport:
    """Integrated-gradients attribution of the drift value to each group."""
    cfg = cfg or PathConfig()
    _require_differentiable(ctx.metric)
    if tuple(spec.shape) != ctx.explicand.shape:
        raise ShapeMismatchError(f"group spec shape {spec.shape} != sample {ctx.explicand.shape}")
    S = ctx.explicand.values
    B = ctx.aligned_baseline.values
    delta = S - B
    # cells that do not move contribute exactly zero
    cells = np.nonzero(delta != 0)
    h = fd_steps(ctx, cfg)
    analytic = ctx.model.gradient is not None and not ctx.transforms
    alphas, weights = cfg.nodes()
    avg = np.zeros(len(cells[0]))
    for a, w in zip(alphas, weights):
        X = B + a * delta
        g = _analytic_gradient(ctx, X, cells) if analytic else gradient(ctx, X, cells, h)
        avg += w * g
    cell_attr = np.zeros(S.shape)
    cell_attr[cells] = delta[cells] * avg
    owner = spec.owner
    phi = np.array([cell_attr[owner == g].sum() for g in range(len(spec))])
    total = ctx.total_drift()
    return AttributionReport(
        groups=spec.names,
        attributions=phi,
        total_drift=total,
        metric=ctx.metric,
        method=Method.GROUP_IG,
        estimator_meta={
            **ctx.meta,
            "steps": cfg.steps,
            "rule": cfg.rule,
            "fd_epsilon": cfg.fd_epsilon,
            "gradient": "analytic" if analytic else "central_difference",
            "completeness_residual": abs(float(phi.sum()) - total),
        },
    )


def completeness_check(report: AttributionReport, ctx: ValueFunctionContext) -> float:
    """|sum of attributions - D(G(F(S)), G(F(B)))|."""
    return abs(sum(report.attributions) - ctx.total_drift())
