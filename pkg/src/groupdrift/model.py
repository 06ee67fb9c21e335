"""Batch-evaluable scalar models.

A :class:`ModelFn` maps an (m, n) matrix to m predictions. It can wrap any
callable, a parsed expression, or a lookup table of precomputed predictions.
"""

from __future__ import annotations

from typing import Callable, Optional, Sequence

import numpy as np

from .core import DriftError, Sample
from .expr import EvalError, Expr, eval_expr, parse_expr, to_source

Evaluator = Callable[[np.ndarray], np.ndarray]


class ModelFn:
    """Scalar-output batch model.

    Args:
        evaluator: maps an (m, n) array to m outputs, or to (m, k) outputs when
            ``output_selector`` picks one column.
        n_features: expected column count; checked when given.
        output_selector: column of a multi-output evaluator to explain.
        gradient: optional analytic gradient hook, (m, n) -> (m, n).
        name: label used in reports.
    """

    def __init__(
        self,
        evaluator: Evaluator,
        n_features: Optional[int] = None,
        output_selector: Optional[int] = None,
        gradient: Optional[Evaluator] = None,
        name: str = "model",
    ):
        self.evaluator = evaluator
        self.n_features = n_features
        self.output_selector = output_selector
        self.gradient = gradient
        self.name = name

    def __call__(self, batch) -> np.ndarray:
        if isinstance(batch, Sample):
            batch = batch.values
        batch = np.asarray(batch, dtype=float)
        if batch.ndim != 2:
            raise EvalError(f"model input must be 2-D, got shape {batch.shape}")
        if self.n_features is not None and batch.shape[1] != self.n_features:
            raise EvalError(
                f"{self.name} expects {self.n_features} columns, got {batch.shape[1]}"
            )
        out = np.asarray(self.evaluator(batch), dtype=float)
        if self.output_selector is not None:
            if out.ndim != 2:
                raise EvalError(f"{self.name}: output selector needs 2-D model output")
            out = out[:, self.output_selector]
        out = out.reshape(-1) if out.ndim == 2 and out.shape[1] == 1 else out
        if out.shape != (batch.shape[0],):
            raise EvalError(
                f"{self.name} returned shape {out.shape} for {batch.shape[0]} rows"
            )
        bad = np.flatnonzero(~np.isfinite(out))
        if len(bad):
            raise EvalError(f"{self.name} produced a non-finite prediction", int(bad[0]))
        return out

    @classmethod
    def from_expr(cls, source: str, feature_names: Sequence[str]) -> "ModelFn":
        expr = parse_expr(source, feature_names)
        model = cls(lambda X: eval_expr(expr, X), len(feature_names), name=source)
        model.expr = expr
        return model

    @classmethod
    def lookup(cls, samples: Sequence[Sample], predictions: Sequence[np.ndarray]) -> "ModelFn":
        """Model backed by precomputed predictions for known rows.

        Rows absent from the table raise :class:`EvalError`, so this adapter
        supports drift measurement but not attribution over hybrid samples.
        """
        table: dict[bytes, float] = {}
        n = samples[0].n
        for sample, preds in zip(samples, predictions):
            preds = np.asarray(preds, dtype=float)
            for row, p in zip(sample.values, preds):
                key = row.tobytes()
                if key in table and table[key] != p:
                    raise DriftError("identical feature rows carry different predictions")
                table[key] = float(p)

        def evaluate(X: np.ndarray) -> np.ndarray:
            out = np.empty(len(X))
            for i, row in enumerate(np.ascontiguousarray(X, dtype=float)):
                try:
                    out[i] = table[row.tobytes()]
                except KeyError:
                    raise EvalError("no precomputed prediction for this row", i) from None
            return out

        return cls(evaluate, n, name="precomputed")

    def __repr__(self):
        return f"ModelFn({self.name!r})"


XYZ = ("x", "y", "z")

# benchmark functions of three inputs, addressable as table2:<key>
BENCHMARKS = {
    "xy": "x*y",
    "x-y": "x - y",
    "x+y-z": "x + y - z",
    "xy-z^2": "x*y - z^2",
    "min": "min(x, y)",
    "abs": "abs(x - y)",
}


def builtin_names() -> list[str]:
    return ["salary", "joint"] + [f"table2:{k}" for k in BENCHMARKS]


def resolve_model(spec: str, feature_names: Sequence[str]) -> ModelFn:
    """Turn a built-in model name or an expression string into a model."""
    if spec == "salary":
        from .synth import FEATURES, salary_model

        if tuple(feature_names) != FEATURES:
            raise DriftError(f"salary model needs columns {list(FEATURES)}")
        return salary_model()
    if spec == "joint":
        return ModelFn.from_expr("x*z + y + z", feature_names)
    if spec.startswith("table2:"):
        key = spec.split(":", 1)[1]
        if key not in BENCHMARKS:
            raise DriftError(f"unknown built-in {spec!r}; known: {', '.join(builtin_names())}")
        return ModelFn.from_expr(BENCHMARKS[key], feature_names)
    return ModelFn.from_expr(spec, feature_names)


__all__ = [
    "ModelFn",
    "Expr",
    "BENCHMARKS",
    "builtin_names",
    "resolve_model",
    "to_source",
]
