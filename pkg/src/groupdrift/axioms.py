"""Randomized checks of the drift-function axioms.

Each check searches for a counterexample. Besides generic random samples the
probes include the two classic families: a constant sample against one split
evenly below and above it (equal means, different samples), and a pair of
non-overlapping samples whose second member is translated further away.

The checks run on the exact empirical form of each metric by default. Pass a
binned :class:`HistogramConfig` to see that fixed-width bins cost JSD its
identity of indiscernibles.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .core import Capability, Metric
from .metrics import HistogramConfig, drift

AXIOMS = {
    "sensitivity": Capability.SENSITIVE,
    "differentiability": Capability.DIFFERENTIABLE,
    "symmetry": Capability.SYMMETRIC,
    "identity": Capability.IDENTITY,
    "directionality": Capability.DIRECTIONAL,
}

EXACT = HistogramConfig(bin_count=None)

PASS = "PASS"
FAIL_EXPECTED = "FAIL-expected"
NOT_APPLICABLE = "N/A"
MISMATCH = "MISMATCH"


@dataclass(frozen=True)
class AxiomResult:
    metric: Metric
    axiom: str
    expected: bool
    observed: bool
    status: str
    counterexample: Optional[str] = None

    @property
    def ok(self) -> bool:
        return self.status != MISMATCH


def _fmt(x: np.ndarray) -> str:
    x = np.asarray(x)
    shown = ", ".join(f"{v:.4g}" for v in x[:6])
    return f"[{shown}{', ...' if len(x) > 6 else ''}]"


def _random_pair(rng) -> tuple[np.ndarray, np.ndarray]:
    n = int(rng.integers(2, 31))
    kind = rng.integers(3)
    if kind == 0:
        a = rng.normal(0, 1, n)
        b = rng.normal(rng.normal(0, 1), rng.uniform(0.5, 2), n)
    elif kind == 1:
        a = rng.uniform(-2, 2, n)
        b = rng.exponential(1, n)
    else:
        a = rng.standard_t(3, n)
        b = rng.normal(0.5, 1, n)
    return a, b


def _close(x: float, y: float) -> bool:
    return abs(x - y) <= 1e-12 * max(1.0, abs(x), abs(y))


class _Checker:
    def __init__(self, metric: Metric, cfg: HistogramConfig):
        self.metric = metric
        self.cfg = cfg

    def D(self, a, b) -> float:
        return drift(self.metric, a, b, self.cfg)

    def symmetry(self, rng) -> Optional[str]:
        a, b = _random_pair(rng)
        d1, d2 = self.D(a, b), self.D(b, a)
        if not _close(d1, d2):
            return f"D(a,b)={d1:.6g} but D(b,a)={d2:.6g} for a={_fmt(a)}, b={_fmt(b)}"
        return None

    def directionality(self, rng) -> Optional[str]:
        a, b = _random_pair(rng)
        d1, d2 = self.D(a, b), self.D(b, a)
        if d1 == 0 or not _close(d1, -d2):
            return f"D(a,b)={d1:.6g}, D(b,a)={d2:.6g} for a={_fmt(a)}, b={_fmt(b)}"
        return None

    def identity(self, rng) -> Optional[str]:
        # equal-mean family: constant c against c-d and c+d in equal numbers
        half = int(rng.integers(1, 11))
        c = float(rng.integers(-5, 6))
        d = float(rng.integers(1, 6))
        const = np.full(2 * half, c)
        split = np.concatenate([np.full(half, c - d), np.full(half, c + d)])
        if self.D(const, split) == 0:
            return f"D(a,b)=0 for a={_fmt(const)}, b={_fmt(split)}"
        a, b = _random_pair(rng)
        if self.D(a, a) != 0:
            return f"D(a,a)={self.D(a, a):.6g} for a={_fmt(a)}"
        if self.D(a, b) == 0:
            return f"D(a,b)=0 for distinct a={_fmt(a)}, b={_fmt(b)}"
        return None

    def sensitivity(self, rng) -> Optional[str]:
        a, b = _random_pair(rng)
        n = len(a)
        # non-overlapping samples, then translate the second further away
        left = rng.uniform(0, 1, n)
        gap = rng.uniform(0.5, 5)
        right = rng.uniform(0, 1, n) + 1 + gap
        shift = rng.uniform(0.5, 5)
        d1, d2 = self.D(left, right), self.D(left, right + shift)
        if d1 == d2:
            return (f"translating disjoint b by {shift:.3g} leaves D={d1:.6g} "
                    f"for a={_fmt(left)}, b={_fmt(right)}")
        base = self.D(a, b)
        eps = 1e-3 * (np.ptp(np.concatenate([a, b])) or 1.0)
        k = int(rng.integers(n))
        a2 = a.copy()
        a2[k] += eps
        if self.D(a2, b) == base:
            return f"moving a[{k}] by {eps:.3g} leaves D={base:.6g} for a={_fmt(a)}, b={_fmt(b)}"
        return None

    def differentiability(self, rng) -> Optional[str]:
        a, b = _random_pair(rng)
        lo, hi = min(a.min(), b.min()), max(a.max(), b.max())
        bins = self.cfg.bin_count or 10
        edges = np.linspace(lo, hi, bins + 1)[1:-1]
        interior = [i for i in range(len(a)) if lo < a[i] < hi]
        if not interior:
            return None
        k = interior[int(rng.integers(len(interior)))]
        # sweep a[k] across break points of every metric: other sample points and bin edges
        candidates = np.concatenate([b, edges])
        candidates = candidates[(candidates > lo) & (candidates < hi)]
        for t in rng.choice(candidates, size=min(4, len(candidates)), replace=False):
            delta = 1e-7 * (1 + abs(t))
            lo_a, hi_a = a.copy(), a.copy()
            at_a = a.copy()
            lo_a[k], hi_a[k], at_a[k] = t - delta, t + delta, t
            d_at = self.D(at_a, b)
            # a jump either across t or at t itself (isolated discontinuity)
            jump = max(abs(self.D(hi_a, b) - self.D(lo_a, b)),
                       abs(self.D(hi_a, b) - d_at))
            if jump > 1e-4:
                return (f"D jumps by {jump:.4g} as a[{k}] crosses {t:.6g} "
                        f"for a={_fmt(a)}, b={_fmt(b)}")
        return None


def check_metric(metric, trials: int = 1000, seed: int = 0,
                 cfg: HistogramConfig | None = None) -> list[AxiomResult]:
    """Search ``trials`` random cases per axiom and compare with the declared capabilities."""
    metric = Metric.parse(metric)
    checker = _Checker(metric, cfg or EXACT)
    results = []
    for axiom, cap in AXIOMS.items():
        rng = np.random.default_rng([seed, list(AXIOMS).index(axiom)])
        probe: Callable = getattr(checker, axiom)
        found = None
        for _ in range(trials):
            found = probe(rng)
            if found is not None:
                break
        expected = metric.has(cap)
        observed = found is None
        if expected != observed:
            status = MISMATCH
        elif expected:
            status = PASS
        elif (axiom == "directionality" and metric.has(Capability.SYMMETRIC)) or (
            axiom == "symmetry" and metric.has(Capability.DIRECTIONAL)
        ):
            status = NOT_APPLICABLE
        else:
            status = FAIL_EXPECTED
        results.append(AxiomResult(metric, axiom, expected, observed, status, found))
    return results


def format_table(results: list[AxiomResult]) -> str:
    lines = [f"{'metric':<7}{'axiom':<19}{'expected':<10}{'observed':<10}status"]
    for r in results:
        lines.append(
            f"{r.metric.value:<7}{r.axiom:<19}{('yes' if r.expected else 'no'):<10}"
            f"{('yes' if r.observed else 'no'):<10}{r.status}"
        )
    notes = [f"  {r.metric.value} {r.axiom}: {r.counterexample}"
             for r in results if r.counterexample]
    if notes:
        lines.append("counterexamples:")
        lines.extend(notes)
    return "\n".join(lines)
