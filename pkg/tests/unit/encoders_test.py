"""Unit tests for the dual-head encoder and its momentum key encoder."""
import numpy as np
import pytest

from encoders import (
    backbone_features,
    backward,
    create_momentum_pair,
    forward,
    forward_batch,
    init_encoder,
    momentum_update,
    shared_head_hidden_for_budget,
)
from errors import InvalidDimension, StaleCache
from numerics import SeededRng, finite_diff_grad, relative_error


@pytest.fixture
def encoder():
    return init_encoder([5, 7, 6], 3, 4, SeededRng(0))


def test_init_is_deterministic_per_seed():
    a = init_encoder([5, 7, 6], 3, 4, SeededRng(9))
    b = init_encoder([5, 7, 6], 3, 4, SeededRng(9))
    np.testing.assert_array_equal(a.flatten(), b.flatten())


def test_glorot_bounds_and_zero_biases(encoder):
    for name, p in encoder.named_parameters():
        if name.endswith("bias"):
            assert not p.any()
        else:
            fan_in, fan_out = p.shape
            assert np.abs(p).max() <= np.sqrt(6.0 / (fan_in + fan_out))


def test_invalid_dimension():
    with pytest.raises(InvalidDimension):
        init_encoder([5, 0, 6], 3, 4, SeededRng(0))
    with pytest.raises(InvalidDimension):
        init_encoder([5, 6], 0, 4, SeededRng(0))


def test_heads_have_disjoint_parameters(encoder):
    assert encoder.intra_dim == 3 and encoder.inter_dim == 4
    intra_ids = {id(layer.weight) for layer in encoder.intra_head}
    inter_ids = {id(layer.weight) for layer in encoder.inter_head}
    assert not intra_ids & inter_ids


def test_forward_outputs_are_unit_norm(encoder, rng):
    out, _ = forward(encoder, rng.normal(size=5))
    assert out.intra.shape == (3,) and out.inter.shape == (4,)
    assert abs(np.linalg.norm(out.intra) - 1.0) < 1e-12
    assert abs(np.linalg.norm(out.inter) - 1.0) < 1e-12


def test_batch_forward_matches_single_forward(encoder, rng):
    x = rng.normal(size=(4, 5))
    intra, inter, _ = forward_batch(encoder, x)
    for i in range(4):
        single, _ = forward(encoder, x[i])
        np.testing.assert_allclose(single.intra, intra[i], atol=1e-14)
        np.testing.assert_allclose(single.inter, inter[i], atol=1e-14)


def test_backbone_features_are_shared_by_heads(encoder, rng):
    x = rng.normal(size=(3, 5))
    _, _, cache = forward_batch(encoder, x)
    np.testing.assert_array_equal(backbone_features(encoder, x), cache.backbone_out)


def test_backward_matches_finite_differences(rng):
    enc = init_encoder([4, 5, 5], 3, 4, rng)
    for _, p in enc.named_parameters():
        if p.ndim == 1:
            p += rng.normal(0.0, 0.3, size=p.shape)
    x = rng.normal(size=(2, 4))
    g_intra = rng.normal(size=(2, 3))
    g_inter = rng.normal(size=(2, 4))
    intra, inter, cache = forward_batch(enc, x)
    assert cache.min_abs_pre_activation() > 1e-4

    def objective(flat):
        a, b, _ = forward_batch(enc.with_flat(flat), x)
        return float(np.sum(g_intra * a) + np.sum(g_inter * b))

    analytic = backward(enc, cache, g_intra, g_inter).flatten()
    numeric = finite_diff_grad(objective, enc.flatten())
    assert relative_error(analytic, numeric) < 1e-6


def test_shared_head_backward_sums_both_gradients(rng):
    enc = init_encoder([4, 5], 3, 3, rng, head_mode="shared")
    x = rng.normal(size=(2, 4))
    g = rng.normal(size=(2, 3))
    intra, inter, cache = forward_batch(enc, x)
    np.testing.assert_array_equal(intra, inter)
    both = backward(enc, cache, g, g).flatten()
    once = backward(enc, cache, 2.0 * g, np.zeros_like(g)).flatten()
    np.testing.assert_allclose(both, once, atol=1e-12)


def test_shared_head_needs_equal_dims(rng):
    with pytest.raises(InvalidDimension):
        init_encoder([4, 5], 3, 4, rng, head_mode="shared")


def test_stale_cache_is_rejected(encoder, rng):
    other = init_encoder([5, 6, 6], 3, 4, rng)
    _, _, cache = forward_batch(other, rng.normal(size=(2, 5)))
    with pytest.raises(StaleCache):
        backward(encoder, cache, np.zeros((2, 3)), np.zeros((2, 4)))
    _, _, cache = forward_batch(encoder, rng.normal(size=(2, 5)))
    with pytest.raises(StaleCache):
        backward(encoder, cache, np.zeros((3, 3)), np.zeros((3, 4)))


def test_flatten_round_trip(encoder):
    flat = encoder.flatten()
    assert flat.shape == (encoder.parameter_count(),)
    np.testing.assert_array_equal(encoder.with_flat(flat).flatten(), flat)


def test_shared_budget_matches_separate_count():
    dims = [32, 64, 64]
    separate = init_encoder(dims, 16, 64, SeededRng(0)).parameter_count()
    hidden = shared_head_hidden_for_budget(dims, 16, 64, 64)
    shared = init_encoder(dims, 64, 64, SeededRng(0), head_mode="shared", head_hidden=hidden).parameter_count()
    assert abs(shared - separate) <= 64 + 1 + 64


def test_dead_head_outputs_fixed_unit_vector(rng):
    enc = init_encoder([4, 5], 3, 4, rng)
    enc.intra_head[0].weight[:] = 0.0
    enc.intra_head[0].bias[:] = -1.0
    x = rng.normal(size=(3, 4))
    intra, inter, cache = forward_batch(enc, x)
    np.testing.assert_array_equal(intra, np.tile([1.0, 0.0, 0.0], (3, 1)))
    np.testing.assert_allclose(np.linalg.norm(inter, axis=1), 1.0, atol=1e-12)
    assert cache.min_head_norm() == 0.0

    grad = backward(enc, cache, rng.normal(size=(3, 3)), np.zeros((3, 4))).flatten()
    assert np.all(grad == 0.0)
    grad = backward(enc, cache, rng.normal(size=(3, 3)), rng.normal(size=(3, 4))).flatten()
    assert np.all(np.isfinite(grad)) and np.any(grad != 0.0)


def test_forward_never_fails_on_gaussian_inputs():
    enc = init_encoder([8, 8, 8], 4, 6, SeededRng(0))
    x = SeededRng(1).normal(size=(2000, 8))
    intra, inter, _ = forward_batch(enc, x)
    np.testing.assert_allclose(np.linalg.norm(intra, axis=1), 1.0, atol=1e-12)
    np.testing.assert_allclose(np.linalg.norm(inter, axis=1), 1.0, atol=1e-12)


class TestMomentum:
    def test_key_starts_as_deep_copy(self, encoder):
        pair = create_momentum_pair(encoder, 0.9)
        assert pair.distance() == 0.0
        pair.key.backbone[0].weight[0, 0] += 1.0
        assert encoder.backbone[0].weight[0, 0] != pair.key.backbone[0].weight[0, 0]

    def test_single_update_formula(self, encoder, rng):
        pair = create_momentum_pair(encoder, 0.9)
        for _, p in pair.query.named_parameters():
            p += rng.normal(size=p.shape)
        old_key = pair.key.flatten()
        query = pair.query.flatten()
        momentum_update(pair)
        np.testing.assert_allclose(pair.key.flatten(), 0.9 * old_key + 0.1 * query, atol=1e-15)
        np.testing.assert_array_equal(pair.query.flatten(), query)

    @pytest.mark.parametrize("m, steps", [(0.999, 1000), (0.9, 50)])
    def test_distance_decays_geometrically(self, encoder, rng, m, steps):
        pair = create_momentum_pair(encoder, m)
        for _, p in pair.query.named_parameters():
            p += rng.normal(size=p.shape)
        initial = pair.distance()
        for _ in range(steps):
            momentum_update(pair)
        assert abs(pair.distance() - m**steps * initial) < 1e-10

    def test_m_equal_one_freezes_key(self, encoder, rng):
        pair = create_momentum_pair(encoder, 1.0)
        key = pair.key.flatten()
        for _, p in pair.query.named_parameters():
            p += 1.0
        momentum_update(pair)
        np.testing.assert_array_equal(pair.key.flatten(), key)

    def test_m_out_of_range(self, encoder):
        with pytest.raises(ValueError):
            create_momentum_pair(encoder, 1.5)

    def test_m_zero_copies_query(self, encoder, rng):
        pair = create_momentum_pair(encoder, 0.0)
        for _, p in pair.query.named_parameters():
            p += rng.normal(size=p.shape)
        momentum_update(pair)
        np.testing.assert_array_equal(pair.key.flatten(), pair.query.flatten())

    def test_scalar_example(self, encoder):
        pair = create_momentum_pair(encoder, 0.999)
        for _, p in pair.key.named_parameters():
            p[...] = 0.0
        for _, p in pair.query.named_parameters():
            p[...] = 1.0
        momentum_update(pair)
        np.testing.assert_allclose(pair.key.flatten(), 0.001, rtol=0, atol=1e-15)
