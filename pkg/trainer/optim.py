"""SGD with momentum and L2 weight decay, and the cosine learning-rate schedule."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from config.run_config import OptimConfig
from encoders.mlp import EncoderParams
from errors import DimensionMismatch, NonFiniteGradient


def cosine_lr(step: int, total_steps: int, base_lr: float) -> float:
    """``base_lr * 0.5 * (1 + cos(pi * step / total_steps))``, no warmup."""
    if total_steps <= 0:
        return base_lr
    if not 0 <= step <= total_steps:
        raise ValueError(f"step {step} outside schedule of {total_steps} steps")
    return base_lr * 0.5 * (1.0 + math.cos(math.pi * step / total_steps))


@dataclass
class OptimizerState:
    """Velocity buffers shaped like the encoder parameters."""

    velocity: EncoderParams

    @classmethod
    def zeros_for(cls, params: EncoderParams) -> "OptimizerState":
        return cls(velocity=params.zeros_like())


def sgd_update(
    params: EncoderParams,
    grads: EncoderParams,
    state: OptimizerState,
    lr: float,
    cfg: OptimConfig,
) -> EncoderParams:
    """In place ``v <- mu v + g + wd p``; ``p <- p - lr v``.

    Args:
        params: Query encoder parameters, updated in place
        grads: Gradients with the same structure
        state: Velocity buffers, updated in place
        lr: Learning rate for this step
        cfg: Supplies momentum ``mu`` and weight decay ``wd``

    Returns:
        The updated params
    """
    if params.shapes() != grads.shapes() or params.shapes() != state.velocity.shapes():
        raise DimensionMismatch("params, grads and velocity buffers must share shapes")
    named_grads = grads.named_parameters()
    for name, g in named_grads:
        if not np.all(np.isfinite(g)):
            raise NonFiniteGradient(f"gradient {name} contains NaN or Inf")
    for (_, p), (_, g), (_, v) in zip(params.named_parameters(), named_grads, state.velocity.named_parameters()):
        v *= cfg.sgd_momentum
        v += g
        v += cfg.weight_decay * p
        p -= lr * v
    return params
