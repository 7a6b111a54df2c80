"""One optimisation step and the epoch loop.

Per step the main RNG is consumed in a fixed order: image query view,
image key view, caption query view, caption key view. The queues are
read before the step and extended with the new keys after it.
"""
from __future__ import annotations

from typing import Callable, List, Optional, Tuple

import numpy as np

from config.run_config import LossConfig, OptimConfig, RunConfig
from encoders.mlp import backward, forward_batch
from encoders.momentum import momentum_update
from errors import EmptyBatch
from logger import TraceLogger, logger
from losses.combined import BatchFeatures, LossBreakdown, combined_loss
from schemas.records import Dataset, EpochMetrics
from synthdata.augment import augment
from trainer.optim import cosine_lr, sgd_update
from trainer.state import WARMUP_STREAM_BASE, TrainState, init_train_state, steps_per_epoch

EpochCallback = Callable[[TrainState, EpochMetrics], None]


def _scheduled_lrs(state: TrainState, optim: OptimConfig) -> Tuple[float, float]:
    step = min(state.step, state.total_steps)
    return (
        cosine_lr(step, state.total_steps, optim.lr_image),
        cosine_lr(step, state.total_steps, optim.lr_text),
    )


def train_step(
    state: TrainState,
    batch: Dataset,
    loss_cfg: Optional[LossConfig] = None,
    optim_cfg: Optional[OptimConfig] = None,
) -> Tuple[TrainState, LossBreakdown]:
    """Run one SGD step on both query encoders, then update keys and queues.

    Args:
        state: Training state, mutated in place
        batch: Mini-batch of samples
        loss_cfg: Overrides ``state.config.loss``
        optim_cfg: Overrides ``state.config.optim``

    Returns:
        ``(state, breakdown)`` where ``breakdown`` was computed against
        the queues as they stood before this step
    """
    if len(batch) == 0:
        raise EmptyBatch("train_step needs at least one sample")
    loss_cfg = loss_cfg or state.config.loss
    optim_cfg = optim_cfg or state.config.optim
    aug, rng = state.config.augment, state.rng

    image_q_in = augment(batch.images, aug, rng)
    image_k_in = augment(batch.images, aug, rng)
    caption_q_in = augment(batch.captions, aug, rng)
    caption_k_in = augment(batch.captions, aug, rng)

    q_ii, q_ic, image_cache = forward_batch(state.image.query, image_q_in)
    k_ii, k_ci, _ = forward_batch(state.image.key, image_k_in)

    rows = np.flatnonzero(batch.has_caption)
    caption = state.caption.query
    q_cc = np.zeros((len(batch), caption.intra_dim))
    q_ci = np.zeros((len(batch), caption.inter_dim))
    k_cc = np.zeros_like(q_cc)
    k_ic = np.zeros_like(q_ci)
    caption_cache = None
    if rows.size:
        q_cc[rows], q_ci[rows], caption_cache = forward_batch(caption, caption_q_in[rows])
        k_cc[rows], k_ic[rows], _ = forward_batch(state.caption.key, caption_k_in[rows])

    views = state.queues.views()
    features = BatchFeatures(
        image_intra_q=q_ii,
        image_inter_q=q_ic,
        caption_intra_q=q_cc,
        caption_inter_q=q_ci,
        image_intra_k=k_ii,
        image_inter_k=k_ci,
        caption_intra_k=k_cc,
        caption_inter_k=k_ic,
        tags=batch.tags,
        has_caption=batch.has_caption,
        has_tags=batch.has_tags,
    )
    breakdown = combined_loss(features, views["image"], views["caption"], loss_cfg)

    image_grads = backward(
        state.image.query, image_cache, breakdown.grads["image_intra"], breakdown.grads["image_inter"]
    )
    if caption_cache is not None:
        caption_grads = backward(
            caption,
            caption_cache,
            breakdown.grads["caption_intra"][rows],
            breakdown.grads["caption_inter"][rows],
        )
    else:
        caption_grads = caption.zeros_like()

    lr_image, lr_text = _scheduled_lrs(state, optim_cfg)
    sgd_update(state.image.query, image_grads, state.image_opt, lr_image, optim_cfg)
    sgd_update(caption, caption_grads, state.caption_opt, lr_text, optim_cfg)
    momentum_update(state.image)
    momentum_update(state.caption)

    state.queues.enqueue("image", k_ii, k_ci, batch.sample_ids, batch.tags, batch.has_tags)
    if rows.size:
        state.queues.enqueue("caption", k_cc[rows], k_ic[rows], batch.sample_ids[rows])

    state.step += 1
    state.last_lrs = (lr_image, lr_text)
    TraceLogger.trace(
        "train_step",
        "trainer",
        {"step": state.step, "total": round(breakdown.total, 6), "lr_image": lr_image, **state.queues.lengths()},
    )
    return state, breakdown


def warm_queues(state: TrainState, dataset: Dataset, indices: np.ndarray, epoch: int) -> None:
    """Refill both queues from the key encoders on fresh views of ``indices``.

    Uses a stream derived from the run seed and the epoch number, so the
    main RNG, parameters and step counter are untouched. Only the last
    ``capacity`` indices are used.
    """
    state.queues.clear()
    indices = np.asarray(indices, dtype=np.int64)[-state.config.queue.capacity:]
    if indices.size == 0:
        return
    rng = state.rng.derive(WARMUP_STREAM_BASE + epoch)
    subset = dataset.subset(indices)
    aug = state.config.augment
    image_in = augment(subset.images, aug, rng)
    caption_in = augment(subset.captions, aug, rng)

    k_ii, k_ci, _ = forward_batch(state.image.key, image_in)
    state.queues.enqueue("image", k_ii, k_ci, subset.sample_ids, subset.tags, subset.has_tags)
    rows = np.flatnonzero(subset.has_caption)
    if rows.size:
        k_cc, k_ic, _ = forward_batch(state.caption.key, caption_in[rows])
        state.queues.enqueue("caption", k_cc, k_ic, subset.sample_ids[rows])
    logger.debug(f"Warmed queues for epoch {epoch + 1}: {state.queues.lengths()}")


def train_loop(
    train: Dataset,
    config: RunConfig,
    state: Optional[TrainState] = None,
    on_epoch: Optional[EpochCallback] = None,
) -> Tuple[TrainState, List[EpochMetrics]]:
    """Train until ``config.optim.epochs`` epochs are complete.

    A passed-in ``state`` (for example a loaded checkpoint) continues from
    its ``epoch``. Each epoch shuffles with the main RNG and keeps a short
    last batch.

    Returns:
        ``(state, history)`` with one EpochMetrics per completed epoch
    """
    if state is None:
        state = init_train_state(config, train.image_dim, train.caption_dim, train.num_tags, len(train))
    optim = config.optim
    batch_size = optim.batch_size
    num_steps = steps_per_epoch(len(train), batch_size)

    for epoch in range(state.epoch, optim.epochs):
        order = state.rng.permutation(len(train))
        if optim.warm_queues:
            warm_queues(state, train, order, epoch)

        sums = {}
        for b in range(num_steps):
            batch = train.subset(order[b * batch_size:(b + 1) * batch_size])
            _, breakdown = train_step(state, batch)
            for name, value in breakdown.values().items():
                sums[name] = sums.get(name, 0.0) + value

        means = {name: value / max(num_steps, 1) for name, value in sums.items()}
        metrics = EpochMetrics(
            epoch=epoch + 1,
            lr_image=state.last_lrs[0],
            lr_text=state.last_lrs[1],
            j_ii=means.get("j_ii", 0.0),
            j_tag=means.get("j_tag", 0.0),
            j_cc=means.get("j_cc", 0.0),
            j_ic=means.get("j_ic", 0.0),
            j_ci=means.get("j_ci", 0.0),
            total=means.get("total", 0.0),
        )
        state.history.append(metrics)
        state.epoch = epoch + 1
        logger.info(
            f"Epoch {metrics.epoch}/{optim.epochs} total={metrics.total:.4f} "
            f"j_ii={metrics.j_ii:.4f} j_cc={metrics.j_cc:.4f} lr={metrics.lr_image:.5f}"
        )
        if on_epoch is not None:
            on_epoch(state, metrics)
    return state, state.history
