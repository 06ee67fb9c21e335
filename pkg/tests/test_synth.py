import numpy as np
import pytest

from groupdrift.core import DriftError
from groupdrift.synth import (
    FEATURES,
    DriftInjection,
    SalaryGenConfig,
    encode,
    generate,
    salary,
    salary_model,
)


def test_salary_formula():
    assert salary(np.array([[1, 0, 10, 1, 5]])).tolist() == [106000.0]
    assert salary(np.zeros((1, 5))).tolist() == [50000.0]
    assert salary(np.array([[0, 1, 0, 0, 0]])).tolist() == [70000.0]
    with pytest.raises(DriftError):
        salary_model()(np.zeros((2, 4)))


def test_clean_generation():
    data = generate(SalaryGenConfig(rows_per_period=5000, periods=2, seed=3))
    loc = data.raw["location"]
    assert 0.68 <= np.mean(loc == "Springfield") <= 0.72
    assert 0.78 <= np.mean(data.raw["education"] == "GRAD") <= 0.82
    assert 0.83 <= np.mean(data.raw["engineer_type"] == "Software") <= 0.87
    exp, rel = data.raw["experience"], data.raw["relevant_experience"]
    assert np.all(rel <= exp) and exp.min() >= 0 and exp.max() <= 50
    assert data.sample.feature_names == FEATURES
    assert data.sample.m == 10000


def test_deterministic_under_seed():
    a = generate(SalaryGenConfig(100, 3, seed=5))
    b = generate(SalaryGenConfig(100, 3, seed=5))
    assert np.array_equal(a.sample.values, b.sample.values)
    assert not np.array_equal(a.sample.values, generate(SalaryGenConfig(100, 3, 6)).sample.values)


def test_location_bug():
    sched = (DriftInjection.parse("location_case_bug@1"),)
    data = generate(SalaryGenConfig(2000, 3, seed=1, drift_schedule=sched))
    day = data.periods
    assert np.all(data.sample.values[day == 1, 0] == 0)
    assert set(data.raw["location"][day == 1]) == {"springfield", "Centerville"}
    assert data.sample.values[day == 0, 0].mean() > 0.6
    drop = salary(data.period_sample(0).values).mean() - salary(data.period_sample(1).values).mean()
    assert 12000 < drop < 16000


def test_feature_spike():
    start, stop, inj = DriftInjection.parse("feature_spike:experience:3.0@1")
    assert (start, stop) == (1, 2) and inj.multiplier == 3.0
    clean = generate(SalaryGenConfig(500, 3, seed=2))
    spiked = generate(SalaryGenConfig(500, 3, seed=2, drift_schedule=((start, stop, inj),)))
    day = clean.periods
    assert np.allclose(spiked.raw["experience"][day == 1], 3 * clean.raw["experience"][day == 1])
    assert np.array_equal(spiked.raw["experience"][day != 1], clean.raw["experience"][day != 1])
    assert np.all(spiked.raw["relevant_experience"] <= spiked.raw["experience"])


def test_injection_parsing():
    assert DriftInjection.parse("location_case_bug@2-4")[:2] == (2, 5)
    for bad in ("location_case_bug", "feature_spike:location:2@1",
                "feature_spike:experience:-1@1", "flood@1", "feature_spike:experience@1"):
        with pytest.raises(DriftError):
            DriftInjection.parse(bad)
    with pytest.raises(DriftError, match="outside"):
        SalaryGenConfig(10, 2, drift_schedule=(DriftInjection.parse("location_case_bug@2"),))
    with pytest.raises(DriftError):
        SalaryGenConfig(0, 2)


def test_encoder_round_trip_and_fallback(caplog):
    data = generate(SalaryGenConfig(300, 1, seed=8))
    assert np.array_equal(encode(data.raw), data.sample.values)
    raw = {k: v.copy() for k, v in data.raw.items()}
    raw["location"][:3] = "springfield"
    with caplog.at_level("WARNING"):
        enc = encode(raw)
    assert np.all(enc[:3, 0] == 0)
    assert "unknown categories" in caplog.text


def test_config_is_recorded():
    cfg = SalaryGenConfig(10, 2, seed=4, drift_schedule=(DriftInjection.parse("location_case_bug@1"),))
    d = cfg.as_dict()
    assert d["seed"] == 4 and d["drift_schedule"][0]["kind"] == "location_case_bug"
    assert d["experience"] == {"mean": 15.0, "sd": 10.0, "range": [0.0, 50.0]}
