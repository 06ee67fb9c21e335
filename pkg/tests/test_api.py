import numpy as np
import pytest

from conftest import XYZ
from groupdrift import Sample, attribute, drift_between, timeseries
from groupdrift.core import DriftError, Method
from groupdrift.api import parse_method
from groupdrift.model import resolve_model


def pair(seed, m=8):
    rng = np.random.default_rng(seed)
    return (Sample(rng.normal(1, 1, (m, 3)), XYZ), Sample(rng.normal(0, 1, (m, 3)), XYZ))


def test_parse_method():
    assert parse_method("shapley") is Method.SHAPLEY_EXACT
    assert parse_method("ig") is Method.GROUP_IG
    assert parse_method("shapley_sampled") is Method.SHAPLEY_SAMPLED
    with pytest.raises(DriftError, match="unknown method"):
        parse_method("lime")


def test_drift_between_matches_report_total():
    e, b = pair(1)
    model = resolve_model("x*y - z", XYZ)
    for metric in ("w1", "evd", "ks", "jsd"):
        rep = attribute(e, b, model, metric)
        assert rep.total_drift == pytest.approx(drift_between(e, b, model, metric), abs=1e-12)
        assert rep.efficiency_residual() <= 1e-9


def test_expected_alignment_averages_pairings():
    e, b = pair(2, m=6)
    model = resolve_model("x*y + z", XYZ)
    rep = attribute(e, b, model, "w1", alignment="expected", alignment_samples=12, seed=3)
    assert rep.estimator_meta["alignment"] == "expected"
    assert len(rep.estimator_meta["alignment_spread"]) == 3
    assert sum(rep.attributions) == pytest.approx(rep.total_drift, abs=1e-9)
    again = attribute(e, b, model, "w1", alignment="expected", alignment_samples=12, seed=3)
    assert again == rep
    # with an additive model and EVD the pairing cannot matter
    additive = resolve_model("x + 2*y - z", XYZ)
    evd = attribute(e, b, additive, "evd", alignment="expected", alignment_samples=5, seed=1)
    plain = attribute(e, b, additive, "evd")
    assert evd.as_array() == pytest.approx(plain.as_array(), abs=1e-9)
    with pytest.raises(DriftError, match="seed"):
        attribute(e, b, model, "w1", alignment="expected", seed=None)


def test_group_shorthand_only_features():
    e, b = pair(3)
    with pytest.raises(DriftError, match="features"):
        attribute(e, b, resolve_model("x", XYZ), "evd", groups="rows:day")


def test_timeseries():
    rng = np.random.default_rng(0)
    periods = [Sample(rng.normal(k, 1, (20, 3)), XYZ) for k in range(3)]
    out = timeseries(periods, resolve_model("x", XYZ), reference=0, labels=["a", "b", "c"])
    assert out["periods"] == ["a", "b", "c"] and out["reference"] == "a"
    assert set(out["drift"]) == {"w1", "evd", "jsd", "ks"}
    assert out["drift"]["w1"][0] == 0.0
    assert 0 < out["drift"]["evd"][1] < out["drift"]["evd"][2]
    with pytest.raises(DriftError, match="unequal"):
        timeseries(periods + [Sample(np.zeros((3, 3)), XYZ)], resolve_model("x", XYZ))
    with pytest.raises(DriftError, match="out of range"):
        timeseries(periods, resolve_model("x", XYZ), reference=5)
