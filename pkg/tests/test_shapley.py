import math
from fractions import Fraction

import numpy as np
import pytest

from groupdrift import GroupSpec, Sample
from groupdrift.alignment import align
from groupdrift.model import ModelFn, resolve_model
from groupdrift.shapley import (
    CoalitionCache,
    ExactLimitError,
    ValueFunctionContext,
    coalition_value,
    resolve_transforms,
    shapley_exact,
    shapley_sampled,
)
from conftest import BENCHMARKS, XYZ
from oracles import naive_shapley, shapley_fractions


def ctx_for(expr, explicand, baseline, metric, transforms=()):
    model = resolve_model(expr, explicand.feature_names)
    a = align(explicand, baseline, model, "sorted" if metric == "w1" else "identity")
    return ValueFunctionContext(explicand, a.apply(baseline), model, metric,
                                resolve_transforms(transforms))


@pytest.mark.parametrize("key", list(BENCHMARKS))
@pytest.mark.parametrize("metric", ["evd", "w1"])
def test_benchmark_table(key, metric, explicand_123, baseline_000):
    expr, evd, w1, shap, w1_shap = BENCHMARKS[key][:5]
    ctx = ctx_for(expr, explicand_123, baseline_000, metric)
    report = shapley_exact(ctx, GroupSpec.per_feature(explicand_123))
    expected = shap if metric == "evd" else w1_shap
    assert report.as_array() == pytest.approx(expected, abs=1e-9)
    assert report.total_drift == pytest.approx(evd if metric == "evd" else w1)
    assert report.efficiency_residual() <= 1e-9


def test_xy_minus_z2_w1_exact_fractions(explicand_123, baseline_000):
    # coalition values |f(hybrid) - f(0)| with f = xy - z^2 at (1,2,3)
    f = lambda x, y, z: x * y - z * z  # noqa: E731
    values = {}
    for bits in range(8):
        c = frozenset(g for g in range(3) if bits >> g & 1)
        row = [v if g in c else 0 for g, v in enumerate((1, 2, 3))]
        values[c] = Fraction(abs(f(*row)))
    exact = shapley_fractions(values, 3)
    assert exact == [Fraction(-1, 3), Fraction(-1, 3), Fraction(23, 3)]
    ctx = ctx_for("x*y - z^2", explicand_123, baseline_000, "w1")
    got = shapley_exact(ctx, GroupSpec.per_feature(explicand_123)).as_array()
    assert got == pytest.approx([float(v) for v in exact], abs=1e-12)


def test_coalition_value_examples(explicand_123, baseline_000):
    spec = GroupSpec.per_feature(explicand_123)
    for metric in ("w1", "evd", "jsd", "ks"):
        ctx = ctx_for("x - y", explicand_123, baseline_000, metric)
        assert coalition_value(ctx, set(), spec) == 0.0
        assert coalition_value(ctx, {0, 1, 2}, spec) == ctx.total_drift()
    ctx = ctx_for("x - y", explicand_123, baseline_000, "w1")
    assert coalition_value(ctx, {1}, spec) == 2.0


@pytest.mark.parametrize("seed", range(5))
def test_exact_matches_naive_on_block_groups(seed):
    rng = np.random.default_rng(100 + seed)
    m, names = 6, ["a", "b", "c"]
    S = rng.normal(1, 1, (m, 3)).round(3)
    B = rng.normal(0, 1, (m, 3)).round(3)
    labels = [int(v) for v in rng.integers(0, 2, m)]
    labels[0], labels[1] = 0, 1
    spec = GroupSpec.features_by_rows(labels, names)
    cells = [{(i, j) for i in g.rows for j in g.features} for g in spec.groups]
    for metric in ("w1", "evd", "ks"):
        f = lambda r: max(r[0], r[1]) * r[2]  # noqa: E731
        naive = naive_shapley(S.tolist(), B.tolist(), cells, f, metric)
        ctx = ValueFunctionContext(Sample(S, names), Sample(B, names),
                                   ModelFn.from_expr("max(a, b) * c", names), metric)
        assert shapley_exact(ctx, spec).as_array() == pytest.approx(naive, abs=1e-12)


def test_dummy_symmetry_and_linearity(explicand_123, baseline_000):
    spec = GroupSpec.per_feature(explicand_123)
    for key in ("xy", "x-y", "min"):
        for metric in ("evd", "w1"):
            r = shapley_exact(ctx_for(BENCHMARKS[key][0], explicand_123, baseline_000, metric), spec)
            assert r["z"] == 0.0
    sym = Sample(np.array([[1.0, 1.0, 5.0]]), XYZ)
    r = shapley_exact(ctx_for("x + y", sym, baseline_000, "w1"), spec)
    assert r["x"] == r["y"]
    rng = np.random.default_rng(3)
    S = Sample(rng.normal(size=(5, 3)), XYZ)
    B = Sample(rng.normal(size=(5, 3)), XYZ)
    gs = GroupSpec.features_by_rows([0, 0, 1, 1, 1], XYZ)
    f1 = shapley_exact(ctx_for("x*y + z", S, B, "evd"), gs).as_array()
    f2 = shapley_exact(ctx_for("x - 2*z", S, B, "evd"), gs).as_array()
    both = shapley_exact(ctx_for("3*(x*y + z) - 0.5*(x - 2*z)", S, B, "evd"), gs).as_array()
    assert both == pytest.approx(3 * f1 - 0.5 * f2, abs=1e-9)


def test_evd_single_row_is_bshap(explicand_123, baseline_000):
    f = lambda r: min(r[0], r[1]) + r[0] * r[2]  # noqa: E731
    x, xb = [1.0, 2.0, 3.0], [0.0, 0.0, 0.0]
    bshap = []
    for i in range(3):
        total = 0.0
        others = [j for j in range(3) if j != i]
        for size in range(3):
            w = math.factorial(size) * math.factorial(2 - size) / 6
            for S in __import__("itertools").combinations(others, size):
                pick = lambda c: [x[j] if j in c else xb[j] for j in range(3)]  # noqa: E731
                total += w * (f(pick(S + (i,))) - f(pick(S)))
        bshap.append(total)
    ctx = ctx_for("min(x, y) + x*z", explicand_123, baseline_000, "evd")
    got = shapley_exact(ctx, GroupSpec.per_feature(explicand_123)).as_array()
    assert got == pytest.approx(bshap, abs=1e-12)


def test_exact_limit():
    S = Sample(np.ones((21, 1)), ["a"])
    B = Sample(np.zeros((21, 1)), ["a"])
    ctx = ValueFunctionContext(S, B, ModelFn.from_expr("a", ["a"]), "evd")
    with pytest.raises(ExactLimitError, match="shapley_sampled"):
        shapley_exact(ctx, GroupSpec.per_row_block(range(21), 1))


def test_sampled_examples(explicand_123, baseline_000):
    spec = GroupSpec.per_feature(explicand_123)
    ctx = ctx_for("x - y", explicand_123, baseline_000, "evd")
    r = shapley_sampled(ctx, spec, 2000, seed=11)
    assert r.as_array() == pytest.approx([1, -2, 0], abs=0.05)
    assert r.efficiency_residual() <= 1e-9
    assert r.ci is not None and r.ci_level == 0.95
    assert r.estimator_meta["permutations"] == 2000
    one = GroupSpec.per_row_block([0], 3)
    assert shapley_sampled(ctx, one, 3, seed=0).as_array() == pytest.approx([-1.0])
    same = ctx_for("x - y", explicand_123, explicand_123, "w1")
    assert shapley_sampled(same, spec, 50, seed=0).as_array().tolist() == [0, 0, 0]


def test_sampled_residual_is_spread_by_standard_error():
    rng = np.random.default_rng(5)
    S = Sample(rng.normal(1, 1, (8, 3)), XYZ)
    B = Sample(rng.normal(0, 1, (8, 3)), XYZ)
    ctx = ctx_for("x*y - z", S, B, "w1")
    r = shapley_sampled(ctx, GroupSpec.features_by_rows([0, 1] * 4, XYZ), 40, seed=2)
    assert abs(sum(r.attributions) - r.total_drift) <= 1e-9
    assert "efficiency_residual" in r.estimator_meta
    assert len(r.estimator_meta["standard_errors"]) == 6


def test_sampled_converges_as_permutations_double():
    rng = np.random.default_rng(9)
    S = Sample(rng.normal(1, 1, (6, 3)), XYZ)
    B = Sample(rng.normal(0, 1, (6, 3)), XYZ)
    spec = GroupSpec.features_by_rows([0, 0, 1, 1, 2, 2], XYZ)
    ctx = ctx_for("x*y - z^2 + min(x, z)", S, B, "w1")
    exact = shapley_exact(ctx, spec).as_array()
    mad = []
    for p in (25, 50, 100, 200, 400):
        errs = [np.mean(np.abs(shapley_sampled(ctx, spec, p, seed=s).as_array() - exact))
                for s in range(20)]
        mad.append(np.mean(errs))
    assert all(a > b for a, b in zip(mad, mad[1:])), mad


def test_threads_do_not_change_results():
    rng = np.random.default_rng(1)
    S = Sample(rng.normal(1, 1, (10, 3)), XYZ)
    B = Sample(rng.normal(0, 1, (10, 3)), XYZ)
    spec = GroupSpec.features_by_rows([0, 1] * 5, XYZ)
    ctx = ctx_for("x*y - z", S, B, "w1")
    assert shapley_exact(ctx, spec).attributions == shapley_exact(ctx, spec, threads=4).attributions
    a = shapley_sampled(ctx, spec, 100, seed=3)
    b = shapley_sampled(ctx, spec, 100, seed=3, threads=4)
    assert a.attributions == b.attributions and a.ci == b.ci


def test_cache_memoizes():
    S = Sample(np.array([[1.0, 2.0, 3.0]]), XYZ)
    ctx = ctx_for("x*y", S, Sample(np.zeros((1, 3)), XYZ), "evd")
    cache = CoalitionCache(ctx, GroupSpec.per_feature(S))
    cache(3), cache(3), cache(1)
    assert cache.evaluations == 2


def test_transforms_apply_to_both_sides(explicand_123, baseline_000):
    ctx = ctx_for("x - y", explicand_123, baseline_000, "evd", ["sigmoid"])
    sig = 1 / (1 + math.exp(1.0))
    assert ctx.total_drift() == pytest.approx(sig - 0.5)
    with pytest.raises(Exception, match="unknown transform"):
        resolve_transforms(["cube"])
