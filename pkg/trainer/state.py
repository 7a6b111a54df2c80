"""Mutable training state and its construction from a run configuration."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Tuple

from config.run_config import RunConfig
from encoders.mlp import init_encoder
from encoders.momentum import MomentumPair, create_momentum_pair
from memory.memory_manager import QueueManager
from numerics.rng import SeededRng
from schemas.records import EpochMetrics
from trainer.optim import OptimizerState

# Derived RNG streams of the run seed
INIT_STREAM = 1
WARMUP_STREAM_BASE = 1000


@dataclass
class TrainState:
    """Everything a training run mutates.

    ``rng`` drives augmentation and shuffling; weight init and queue
    warm-up use derived streams so they never shift the main stream.
    """

    config: RunConfig
    image: MomentumPair
    caption: MomentumPair
    queues: QueueManager
    image_opt: OptimizerState
    caption_opt: OptimizerState
    rng: SeededRng
    dims: Tuple[int, int, int]  # image_dim, caption_dim, num_tags
    step: int = 0
    epoch: int = 0
    total_steps: int = 0
    last_lrs: Tuple[float, float] = (0.0, 0.0)
    history: List[EpochMetrics] = field(default_factory=list)


def steps_per_epoch(num_samples: int, batch_size: int) -> int:
    return max(1, math.ceil(num_samples / batch_size)) if num_samples else 0


def init_train_state(
    config: RunConfig,
    image_dim: int,
    caption_dim: int,
    num_tags: int,
    num_train: int,
) -> TrainState:
    """Fresh encoders, key encoders, empty queues and zero velocities.

    Args:
        config: Validated run configuration
        image_dim: Raw image vector width
        caption_dim: Raw caption vector width
        num_tags: Tag vocabulary size
        num_train: Training-set size, fixes the cosine schedule length

    Returns:
        TrainState at step 0
    """
    enc = config.encoder
    init_rng = SeededRng(config.seed).derive(INIT_STREAM)
    image_query = init_encoder(
        enc.layer_dims(image_dim), enc.intra_dim, enc.inter_dim, init_rng, enc.head_mode, enc.head_hidden
    )
    caption_query = init_encoder(
        enc.layer_dims(caption_dim), enc.intra_dim, enc.inter_dim, init_rng, enc.head_mode, enc.head_hidden
    )
    image = create_momentum_pair(image_query, config.optim.momentum)
    caption = create_momentum_pair(caption_query, config.optim.momentum)
    queues = QueueManager(
        config.queue.capacity,
        {
            "image": (image_query.intra_dim, image_query.inter_dim),
            "caption": (caption_query.intra_dim, caption_query.inter_dim),
        },
        num_tags,
    )
    return TrainState(
        config=config,
        image=image,
        caption=caption,
        queues=queues,
        image_opt=OptimizerState.zeros_for(image_query),
        caption_opt=OptimizerState.zeros_for(caption_query),
        rng=SeededRng(config.seed),
        dims=(image_dim, caption_dim, num_tags),
        total_steps=config.optim.epochs * steps_per_epoch(num_train, config.optim.batch_size),
    )
