"""Test function values, gradients, hypothesis flags and the parameter factory."""

import numpy as np
import pytest

from hypobound.core.errors import BadParams, DimensionMismatch
from hypobound.core.kernel import evaluate_poly
from hypobound.core.testfns import TestFnKind, finite_difference_gradient, make_testfn

PARAMS = {
    TestFnKind.LINEAR: {"a": [1.0, -2.0, 0.5], "b": 0.3},
    TestFnKind.QUADRATIC: {"Q": [[1.0, 0.2, 0.0], [0.2, 0.5, 0.1], [0.0, 0.1, 2.0]], "a": [0.1, 0.0, -1.0], "c": 2.0},
    TestFnKind.LOGISTIC: {"a": [0.7, -0.4, 1.1], "b": 0.2, "s": 2.0, "delta": 0.3},
    TestFnKind.EXP_NEG_QUADRATIC: {
        "Q": [[0.5, 0.1, 0.0], [0.1, 0.3, 0.0], [0.0, 0.0, 0.2]],
        "center": [0.5, -0.5, 0.0],
        "s": 1.5,
        "delta": 0.1,
    },
    TestFnKind.SHIFTED_POSITIVE: {"a": [0.4, 0.9, -0.3], "b": 1.0, "s": 1.0, "delta": 0.25},
}


@pytest.mark.parametrize("kind", list(TestFnKind))
def test_gradient_matches_finite_differences(kind, rng):
    f = make_testfn(kind, PARAMS[kind])
    for point in rng.normal(size=(5, 3)):
        np.testing.assert_allclose(f.gradient(point), finite_difference_gradient(f, point), atol=1e-6)


@pytest.mark.parametrize("kind", list(TestFnKind))
def test_batch_and_single_evaluation_agree(kind, rng):
    f = make_testfn(kind, PARAMS[kind])
    points = rng.normal(size=(4, 3))
    values = f(points)
    grads = f.gradient(points)
    assert values.shape == (4,) and grads.shape == (4, 3)
    for i, point in enumerate(points):
        assert f(point) == pytest.approx(values[i])
        np.testing.assert_allclose(f.gradient(point), grads[i])


@pytest.mark.parametrize("kind", [TestFnKind.LOGISTIC, TestFnKind.EXP_NEG_QUADRATIC, TestFnKind.SHIFTED_POSITIVE])
def test_bounded_kinds_respect_declared_bounds(kind, rng):
    f = make_testfn(kind, PARAMS[kind])
    assert f.props.bounded and f.props.positive and f.props.globally_lipschitz
    values = f(3.0 * rng.normal(size=(20_000, 3)))
    assert np.all(values >= f.props.lower_bound) and np.all(values <= f.props.upper_bound)


@pytest.mark.parametrize("kind", [TestFnKind.LOGISTIC, TestFnKind.EXP_NEG_QUADRATIC, TestFnKind.SHIFTED_POSITIVE])
def test_declared_lipschitz_constant_bounds_gradients(kind, rng):
    f = make_testfn(kind, PARAMS[kind])
    norms = np.linalg.norm(f.gradient(3.0 * rng.normal(size=(20_000, 3))), axis=1)
    assert np.max(norms) <= f.props.lipschitz_constant * (1 + 1e-12)


def test_unbounded_kinds_carry_no_bounds():
    for kind in (TestFnKind.LINEAR, TestFnKind.QUADRATIC):
        f = make_testfn(kind, PARAMS[kind])
        assert not f.props.bounded and not f.props.positive
        assert f.props.upper_bound is None
    assert make_testfn(TestFnKind.LINEAR, PARAMS[TestFnKind.LINEAR]).props.globally_lipschitz
    assert not make_testfn(TestFnKind.QUADRATIC, PARAMS[TestFnKind.QUADRATIC]).props.globally_lipschitz


def test_constant_linear_function():
    f = make_testfn("linear", {"a": [0.0, 0.0], "b": 2.0})
    assert f.props.bounded and f.props.positive
    assert f.props.lower_bound == f.props.upper_bound == 2.0
    assert f.props.lipschitz_constant == 0.0
    assert f(np.array([3.0, -1.0])) == 2.0


def test_logistic_without_shift_is_not_positive():
    f = make_testfn("logistic", {"a": [1.0, 0.0]})
    assert f.props.bounded and not f.props.positive


@pytest.mark.parametrize("kind", [TestFnKind.LINEAR, TestFnKind.QUADRATIC])
def test_polynomial_kinds_convert(kind, rng):
    f = make_testfn(kind, PARAMS[kind])
    assert f.is_polynomial
    poly = f.to_polynomial()
    points = rng.normal(size=(6, 3))
    np.testing.assert_allclose(evaluate_poly(poly, points), f(points), rtol=1e-12, atol=1e-12)


def test_non_polynomial_refuses_conversion():
    f = make_testfn(TestFnKind.LOGISTIC, PARAMS[TestFnKind.LOGISTIC])
    assert not f.is_polynomial
    with pytest.raises(BadParams):
        f.to_polynomial()


@pytest.mark.parametrize(
    ("kind", "params"),
    [
        ("sine", {"a": [1.0]}),
        ("linear", {"a": [1.0], "q": 2.0}),
        ("linear", {"b": 1.0}),
        ("shifted-positive", {"a": [1.0]}),
        ("shifted-positive", {"a": [1.0], "delta": 0.0}),
        ("logistic", {"a": [1.0], "s": -1.0}),
        ("exp-neg-quadratic", {"Q": [[-1.0]]}),
        ("quadratic", {"Q": [[1.0, 0.0]]}),
    ],
)
def test_factory_rejects_bad_params(kind, params):
    with pytest.raises(BadParams):
        make_testfn(kind, params)


def test_dimension_checked_on_evaluation():
    f = make_testfn("linear", {"a": [1.0, 2.0]})
    with pytest.raises(DimensionMismatch):
        f(np.zeros(3))
