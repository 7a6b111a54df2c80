"""Reference dual-head encoders and momentum (EMA) key encoders."""
from encoders.mlp import (
    AffineLayer,
    EncoderParams,
    FeaturePairOutput,
    ForwardCache,
    backbone_features,
    backward,
    forward,
    forward_batch,
    init_encoder,
    shared_head_hidden_for_budget,
)
from encoders.momentum import MomentumPair, create_momentum_pair, momentum_update

__all__ = [
    "AffineLayer",
    "EncoderParams",
    "FeaturePairOutput",
    "ForwardCache",
    "MomentumPair",
    "backbone_features",
    "backward",
    "create_momentum_pair",
    "forward",
    "forward_batch",
    "init_encoder",
    "momentum_update",
    "shared_head_hidden_for_budget",
]
