"""Unit tests for the cosine schedule and SGD with momentum."""
import math

import numpy as np
import pytest

from config.run_config import OptimConfig
from encoders import AffineLayer, EncoderParams, init_encoder
from errors import NonFiniteGradient
from numerics import SeededRng
from trainer import OptimizerState, cosine_lr, sgd_update


def _scalar(value: float) -> EncoderParams:
    layer = AffineLayer(np.array([[value]]), np.array([0.0]))
    return EncoderParams([layer], [], [], "separate")


def test_cosine_schedule_points():
    assert cosine_lr(0, 100, 0.03) == pytest.approx(0.03)
    assert cosine_lr(100, 100, 0.03) == pytest.approx(0.0, abs=1e-18)
    assert cosine_lr(50, 100, 0.03) == pytest.approx(0.015)
    assert cosine_lr(25, 100, 1.0) == pytest.approx(0.5 * (1 + math.cos(math.pi / 4)))


def test_cosine_schedule_rejects_out_of_range_step():
    with pytest.raises(ValueError):
        cosine_lr(101, 100, 0.03)


def test_plain_sgd_steps_by_lr_times_grad():
    cfg = OptimConfig(sgd_momentum=0.0, weight_decay=0.0)
    params, grads = _scalar(1.0), _scalar(0.5)
    state = OptimizerState.zeros_for(params)
    for step in range(1, 4):
        sgd_update(params, grads, state, 0.1, cfg)
        assert params.backbone[0].weight[0, 0] == pytest.approx(1.0 - step * 0.05)


def test_zero_gradient_keeps_params_and_decays_velocity():
    cfg = OptimConfig(sgd_momentum=0.9, weight_decay=0.0)
    params = _scalar(2.0)
    state = OptimizerState.zeros_for(params)
    sgd_update(params, _scalar(0.0), state, 0.1, cfg)
    assert params.backbone[0].weight[0, 0] == 2.0

    state.velocity.backbone[0].weight[0, 0] = 1.0
    sgd_update(params, _scalar(0.0), state, 0.0, cfg)
    assert state.velocity.backbone[0].weight[0, 0] == pytest.approx(0.9)


def test_weight_decay_single_step():
    cfg = OptimConfig(sgd_momentum=0.0, weight_decay=0.1)
    params = _scalar(1.0)
    sgd_update(params, _scalar(0.0), OptimizerState.zeros_for(params), 1.0, cfg)
    assert params.backbone[0].weight[0, 0] == pytest.approx(0.9)


def test_non_finite_gradient_is_rejected():
    params = init_encoder([3, 4], 2, 2, SeededRng(0))
    grads = params.zeros_like()
    grads.intra_head[0].bias[0] = np.nan
    before = params.flatten()
    with pytest.raises(NonFiniteGradient):
        sgd_update(params, grads, OptimizerState.zeros_for(params), 0.1, OptimConfig())
    np.testing.assert_array_equal(params.flatten(), before)
