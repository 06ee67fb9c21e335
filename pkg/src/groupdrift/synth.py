"""Synthetic salary data with controllable drift injection.

Five features per row:

=====================  ====================================  ===========
column                 raw values                            encoding
=====================  ====================================  ===========
location               Springfield / Centerville, 70:30      1 / 0
education              GRAD / POST_GRAD, 80:20               0 / 1
experience             years, normal(15, 10) on [0, 50]      as is
engineer_type          Software / Hardware, 85:15            1 / 0
relevant_experience    years, capped at experience           as is
=====================  ====================================  ===========

Unknown category strings encode to 0 with a logged warning. That is exactly
how the lower-case ``"springfield"`` bug turns every row into Centerville.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .core import DriftError, Sample
from .model import ModelFn

log = logging.getLogger(__name__)

FEATURES = ("location", "education", "experience", "engineer_type", "relevant_experience")
CATEGORICAL = ("location", "education", "engineer_type")
NUMERIC = ("experience", "relevant_experience")
PERIOD = "day"

CATEGORY_MAPS = {
    "location": {"Springfield": 1, "Centerville": 0},
    "education": {"GRAD": 0, "POST_GRAD": 1},
    "engineer_type": {"Software": 1, "Hardware": 0},
}
FALLBACK_CODE = 0

COEFFICIENTS = np.array([20_000.0, 20_000.0, 100.0, 10_000.0, 5_000.0])
INTERCEPT = 50_000.0

EXPERIENCE_MEAN = 15.0
EXPERIENCE_SD = 10.0
EXPERIENCE_RANGE = (0.0, 50.0)


@dataclass(frozen=True)
class DriftInjection:
    """``location_case_bug`` or ``feature_spike`` of a numeric feature."""

    kind: str
    feature: Optional[str] = None
    multiplier: float = 1.0

    def __post_init__(self):
        if self.kind == "location_case_bug":
            return
        if self.kind != "feature_spike":
            raise DriftError(f"unknown drift kind {self.kind!r}")
        if self.feature not in NUMERIC:
            raise DriftError(f"feature_spike needs a numeric feature {NUMERIC}, got {self.feature!r}")
        if not self.multiplier > 0:
            raise DriftError("spike multiplier must be positive")

    @classmethod
    def parse(cls, text: str) -> tuple[int, int, "DriftInjection"]:
        """Parse ``KIND[:FEATURE:MULT]@START[-STOP]`` (periods are 0-indexed, STOP inclusive)."""
        try:
            what, when = text.rsplit("@", 1)
            parts = what.split(":")
            if parts[0] == "location_case_bug" and len(parts) == 1:
                inj = cls("location_case_bug")
            elif parts[0] == "feature_spike" and len(parts) == 3:
                inj = cls("feature_spike", parts[1], float(parts[2]))
            else:
                raise ValueError(what)
            lo, _, hi = when.partition("-")
            start = int(lo)
            stop = int(hi) + 1 if hi else start + 1
        except ValueError:
            raise DriftError(
                f"bad injection {text!r}; expected location_case_bug@P or "
                "feature_spike:FEATURE:MULT@P[-Q]"
            ) from None
        return start, stop, inj


@dataclass(frozen=True)
class SalaryGenConfig:
    rows_per_period: int = 2000
    periods: int = 3
    seed: int = 0
    drift_schedule: tuple = ()

    def __post_init__(self):
        if self.rows_per_period < 1 or self.periods < 1:
            raise DriftError("rows_per_period and periods must be >= 1")
        schedule = []
        for start, stop, inj in self.drift_schedule:
            if not 0 <= start < stop <= self.periods:
                raise DriftError(f"drift range [{start}, {stop}) outside 0..{self.periods}")
            schedule.append((int(start), int(stop), inj))
        object.__setattr__(self, "drift_schedule", tuple(schedule))

    def as_dict(self) -> dict:
        return {
            "rows_per_period": self.rows_per_period,
            "periods": self.periods,
            "seed": self.seed,
            "drift_schedule": [
                {"start": s, "stop": e, "kind": i.kind, "feature": i.feature,
                 "multiplier": i.multiplier}
                for s, e, i in self.drift_schedule
            ],
            "experience": {"mean": EXPERIENCE_MEAN, "sd": EXPERIENCE_SD,
                           "range": list(EXPERIENCE_RANGE)},
        }


@dataclass
class SalaryData:
    """Raw string-categorical columns plus the encoded samples."""

    raw: dict
    periods: np.ndarray
    sample: Sample
    config: SalaryGenConfig
    category_maps: dict = field(default_factory=lambda: CATEGORY_MAPS)

    def period_sample(self, p: int) -> Sample:
        return self.sample.take_rows(np.flatnonzero(self.periods == p))

    @property
    def period_samples(self) -> list[Sample]:
        return [self.period_sample(p) for p in range(self.config.periods)]


def _truncated_normal(rng, size) -> np.ndarray:
    lo, hi = EXPERIENCE_RANGE
    out = rng.normal(EXPERIENCE_MEAN, EXPERIENCE_SD, size)
    bad = (out < lo) | (out > hi)
    while bad.any():
        out[bad] = rng.normal(EXPERIENCE_MEAN, EXPERIENCE_SD, bad.sum())
        bad = (out < lo) | (out > hi)
    return out


def _choice(rng, labels, p_first, size) -> np.ndarray:
    return np.where(rng.random(size) < p_first, labels[0], labels[1]).astype(object)


def generate(cfg: SalaryGenConfig) -> SalaryData:
    rng = np.random.default_rng(cfg.seed)
    total = cfg.rows_per_period * cfg.periods
    periods = np.repeat(np.arange(cfg.periods), cfg.rows_per_period)
    raw = {
        "location": _choice(rng, ("Springfield", "Centerville"), 0.7, total),
        "education": _choice(rng, ("GRAD", "POST_GRAD"), 0.8, total),
        "experience": _truncated_normal(rng, total),
        "engineer_type": _choice(rng, ("Software", "Hardware"), 0.85, total),
        "relevant_experience": _truncated_normal(rng, total),
    }
    for start, stop, inj in cfg.drift_schedule:
        rows = (periods >= start) & (periods < stop)
        if inj.kind == "location_case_bug":
            hit = rows & (raw["location"] == "Springfield")
            raw["location"][hit] = "springfield"
        else:
            raw[inj.feature][rows] *= inj.multiplier
    raw["relevant_experience"] = np.minimum(raw["relevant_experience"], raw["experience"])
    values = encode(raw)
    return SalaryData(raw, periods, Sample(values, FEATURES), cfg)


def encode(raw: dict, maps: dict = CATEGORY_MAPS) -> np.ndarray:
    cols = []
    for name in FEATURES:
        col = raw[name]
        if name in maps:
            mapping = maps[name]
            codes = np.array([mapping.get(v, -1) for v in col], dtype=float)
            unknown = codes < 0
            if unknown.any():
                seen = sorted(set(np.asarray(col, dtype=object)[unknown]))
                log.warning("%s: %d rows with unknown categories %s encoded as %d",
                            name, int(unknown.sum()), seen, FALLBACK_CODE)
                codes[unknown] = FALLBACK_CODE
            cols.append(codes)
        else:
            cols.append(np.asarray(col, dtype=float))
    return np.column_stack(cols)


def salary(X: np.ndarray) -> np.ndarray:
    return INTERCEPT + np.asarray(X, dtype=float) @ COEFFICIENTS


def salary_model() -> ModelFn:
    """The linear salary formula over the five encoded features, in FEATURES order."""
    model = ModelFn(salary, n_features=len(FEATURES), name="salary")
    model.gradient = lambda X: np.broadcast_to(COEFFICIENTS, np.shape(X)).copy()
    return model
