"""Row pairing between explicand and baseline.

The aligned baseline supplies the values of "absent" groups in coalition
evaluation and the origin of the integration path. It is computed once per
run and then held fixed.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .core import DriftError, Metric, Sample, validate_pair


class Policy(str, enum.Enum):
    SORTED = "sorted_prediction"
    IDENTITY = "identity"
    SAMPLED = "sampled"

    @classmethod
    def parse(cls, name) -> "Policy":
        if isinstance(name, Policy):
            return name
        aliases = {"sorted": cls.SORTED, "identity": cls.IDENTITY, "sampled": cls.SAMPLED}
        if name in aliases:
            return aliases[name]
        try:
            return cls(name)
        except ValueError:
            raise DriftError(f"unknown alignment policy {name!r}") from None


def default_policy(metric) -> Policy:
    return Policy.SORTED if Metric.parse(metric) is Metric.W1 else Policy.IDENTITY


@dataclass(frozen=True)
class Alignment:
    """``permutation[i]`` is the baseline row paired with explicand row ``i``."""

    permutation: tuple[int, ...]
    policy: Policy

    def __post_init__(self):
        perm = tuple(int(p) for p in self.permutation)
        if sorted(perm) != list(range(len(perm))):
            raise DriftError("alignment must be a permutation of 0..m-1")
        object.__setattr__(self, "permutation", perm)
        object.__setattr__(self, "policy", Policy.parse(self.policy))

    def apply(self, baseline: Sample) -> Sample:
        return baseline.take_rows(self.permutation)


def align_predictions(pred_explicand, pred_baseline) -> tuple[int, ...]:
    """Pair equal prediction ranks; ties are broken by row index."""
    pe = np.asarray(pred_explicand, dtype=float)
    pb = np.asarray(pred_baseline, dtype=float)
    if pe.shape != pb.shape:
        raise DriftError(f"prediction lengths differ: {len(pe)} vs {len(pb)}")
    perm = np.empty(len(pe), dtype=int)
    perm[np.argsort(pe, kind="stable")] = np.argsort(pb, kind="stable")
    return tuple(int(p) for p in perm)


def align(explicand: Sample, baseline: Sample, model=None, policy="sorted_prediction",
          seed=None) -> Alignment:
    validate_pair(explicand, baseline)
    policy = Policy.parse(policy)
    m = explicand.m
    if policy is Policy.IDENTITY:
        return Alignment(tuple(range(m)), policy)
    if policy is Policy.SAMPLED:
        if seed is None:
            raise DriftError("sampled alignment needs a seed")
        return Alignment(tuple(np.random.default_rng(seed).permutation(m)), policy)
    if model is None:
        raise DriftError("sorted alignment needs a model")
    return Alignment(align_predictions(model(explicand.values), model(baseline.values)), policy)


def sampled_alignments(m: int, count: int, seed) -> list[Alignment]:
    """``count`` independent uniform permutations, one child seed each."""
    children = np.random.SeedSequence(seed).spawn(count)
    return [
        Alignment(tuple(np.random.default_rng(c).permutation(m)), Policy.SAMPLED)
        for c in children
    ]
