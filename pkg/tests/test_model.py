import numpy as np
import pytest

from groupdrift import Sample
from groupdrift.core import DriftError
from groupdrift.expr import EvalError
from groupdrift.model import BENCHMARKS, ModelFn, builtin_names, resolve_model
from conftest import BENCHMARKS as GOLDEN

XYZ = ["x", "y", "z"]


def test_builtins_cover_benchmark_functions():
    assert {k: v[0] for k, v in GOLDEN.items()} == BENCHMARKS
    assert "salary" in builtin_names() and "table2:min" in builtin_names()
    m = resolve_model("joint", XYZ)
    assert m(np.array([[3.0, 1, 2]])).tolist() == [9.0]
    with pytest.raises(DriftError, match="unknown built-in"):
        resolve_model("table2:nope", XYZ)
    with pytest.raises(DriftError, match="salary model needs"):
        resolve_model("salary", XYZ)


def test_model_checks_inputs_and_outputs():
    m = resolve_model("x + y", XYZ)
    with pytest.raises(EvalError, match="3 columns"):
        m(np.ones((2, 2)))
    with pytest.raises(EvalError, match="2-D"):
        m(np.ones(3))
    bad = ModelFn(lambda X: np.ones(len(X) + 1), 3)
    with pytest.raises(EvalError, match="shape"):
        bad(np.ones((2, 3)))
    nan = ModelFn(lambda X: np.where(X[:, 0] > 1, np.nan, 0.0), 3)
    with pytest.raises(EvalError, match="row 1"):
        nan(np.array([[0.0, 0, 0], [2.0, 0, 0]]))


def test_output_selector_and_column_vector():
    multi = ModelFn(lambda X: np.column_stack([X.sum(1), X.prod(1)]), 3, output_selector=1)
    assert multi(np.array([[1.0, 2, 3]])).tolist() == [6.0]
    col = ModelFn(lambda X: X[:, :1], 3)
    assert col(np.array([[4.0, 0, 0]])).tolist() == [4.0]
    assert resolve_model("x", XYZ)(Sample(np.array([[7.0, 0, 0]]), XYZ)).tolist() == [7.0]


def test_precomputed_lookup():
    a = Sample(np.array([[1.0, 2, 3], [4, 5, 6]]), XYZ)
    m = ModelFn.lookup([a], [np.array([10.0, 20.0])])
    assert m(a.values[::-1]).tolist() == [20.0, 10.0]
    with pytest.raises(EvalError, match="no precomputed"):
        m(np.zeros((1, 3)))
    with pytest.raises(DriftError, match="different predictions"):
        ModelFn.lookup([a, a], [np.array([1.0, 2.0]), np.array([1.0, 3.0])])
