"""Unit tests for dense algebra, the seeded RNG and the finite-difference oracle."""
import json

import numpy as np
import pytest

from errors import DimensionMismatch, NonFiniteFunction, ZeroNorm
from numerics import (
    SeededRng,
    add,
    dot,
    finite_diff_grad,
    finite_diff_jacobian,
    l2_normalize,
    l2_normalize_rows,
    l2_normalize_rows_total,
    matmul,
    matvec,
    normalize_backward,
    relative_error,
    relu,
    relu_backward,
)


def test_l2_normalize_examples():
    np.testing.assert_allclose(l2_normalize([3.0, 4.0]), [0.6, 0.8], atol=1e-12)
    with pytest.raises(ZeroNorm):
        l2_normalize([0.0, 0.0])


def test_l2_normalize_is_idempotent(rng):
    v = rng.normal(size=7)
    once = l2_normalize(v)
    assert abs(np.linalg.norm(once) - 1.0) < 1e-12
    np.testing.assert_allclose(l2_normalize(once), once, atol=1e-15)


def test_zero_norm_is_a_value_error():
    with pytest.raises(ValueError):
        l2_normalize_rows(np.zeros((2, 3)))


def test_total_normalize_maps_zero_rows_to_first_axis(rng):
    x = np.vstack([rng.normal(size=3), np.zeros(3), [3.0, 0.0, 4.0]])
    unit, norms = l2_normalize_rows_total(x)
    np.testing.assert_allclose(unit[0], x[0] / np.linalg.norm(x[0]), atol=1e-15)
    np.testing.assert_array_equal(unit[1], [1.0, 0.0, 0.0])
    np.testing.assert_allclose(unit[2], [0.6, 0.0, 0.8], atol=1e-15)
    assert np.isinf(norms[1]) and norms[2] == 5.0
    grad = normalize_backward(unit, norms, rng.normal(size=(3, 3)))
    np.testing.assert_array_equal(grad[1], np.zeros(3))
    assert np.all(np.isfinite(grad))


def test_dot_is_symmetric_and_bilinear(rng):
    a, b, c = rng.normal(size=(3, 5))
    assert dot(a, b) == pytest.approx(dot(b, a), abs=1e-10)
    assert dot(2.0 * a + c, b) == pytest.approx(2.0 * dot(a, b) + dot(c, b), abs=1e-10)
    with pytest.raises(DimensionMismatch):
        dot(a, b[:3])


def test_matvec_examples(rng):
    np.testing.assert_allclose(matvec([[1.0, 2.0], [3.0, 4.0]], [1.0, 1.0]), [3.0, 7.0])
    v = rng.normal(size=4)
    np.testing.assert_allclose(matvec(np.eye(4), v), v)
    a, b = rng.normal(size=(4, 3)), rng.normal(size=(3, 5))
    x = rng.normal(size=5)
    np.testing.assert_allclose(matvec(matmul(a, b), x), matvec(a, matvec(b, x)), atol=1e-10)


def test_nonconforming_shapes_raise():
    with pytest.raises(DimensionMismatch):
        matvec(np.ones((2, 3)), np.ones(2))
    with pytest.raises(DimensionMismatch):
        matmul(np.ones((2, 3)), np.ones((2, 3)))
    with pytest.raises(DimensionMismatch):
        add(np.ones((2, 3)), np.ones(2))


def test_relu_backward_masks_negative_inputs():
    pre = np.array([-1.0, 0.0, 2.0])
    np.testing.assert_array_equal(relu(pre), [0.0, 0.0, 2.0])
    np.testing.assert_array_equal(relu_backward(pre, np.ones(3)), [0.0, 0.0, 1.0])


def test_normalize_backward_matches_finite_differences(rng):
    v = rng.normal(size=5)
    g = rng.normal(size=5)
    unit, norms = l2_normalize_rows(v[None, :])
    analytic = normalize_backward(unit, norms, g[None, :])[0]
    numeric = finite_diff_grad(lambda x: float(g @ (x / np.linalg.norm(x))), v)
    assert relative_error(analytic, numeric) < 1e-7


def test_finite_diff_on_quadratic():
    grad = finite_diff_grad(lambda x: float(x @ x), np.array([1.0, -2.0, 0.5]))
    np.testing.assert_allclose(grad, [2.0, -4.0, 1.0], atol=1e-8)


def test_finite_diff_rejects_non_finite_function():
    with pytest.raises(NonFiniteFunction):
        finite_diff_grad(lambda x: float("nan"), np.zeros(2))


def test_jacobian_rows_match_scalar_gradients(rng):
    x = rng.normal(size=4)

    def f(v):
        return np.array([v @ v, np.sin(v).sum()])

    jac = finite_diff_jacobian(f, x)
    assert jac.shape == (2, 4)
    np.testing.assert_allclose(jac[0], finite_diff_grad(lambda v: float(v @ v), x), atol=1e-12)
    np.testing.assert_allclose(jac[1], np.cos(x), atol=1e-8)


def test_relative_error_floor():
    assert relative_error(np.zeros(3), np.zeros(3)) == 0.0
    assert relative_error(np.array([1.0, 0.0]), np.array([1.0, 0.0])) == 0.0


class TestSeededRng:
    def test_same_seed_same_stream(self):
        a, b = SeededRng(7), SeededRng(7)
        np.testing.assert_array_equal(a.normal(size=10), b.normal(size=10))
        np.testing.assert_array_equal(a.permutation(20), b.permutation(20))

    def test_derived_streams_differ(self):
        base = SeededRng(7)
        assert not np.array_equal(base.derive(1).random(5), base.derive(2).random(5))
        np.testing.assert_array_equal(base.derive(1).random(5), SeededRng(7, 1).random(5))

    def test_derive_rejects_stream_zero(self):
        with pytest.raises(ValueError):
            SeededRng(1).derive(0)

    def test_state_round_trips_through_json(self):
        rng = SeededRng(11)
        rng.normal(size=3)
        snapshot = json.loads(json.dumps(rng.get_state()))
        expected = rng.random(6)
        restored = SeededRng.from_state(snapshot)
        np.testing.assert_array_equal(restored.random(6), expected)
