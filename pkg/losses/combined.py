"""Weighted combination of the five contrastive terms over a batch.

Queue wiring (image queue entries hold k_ii / k_ci, caption entries
k_cc / k_ic):

    J_ii, J_tag  q_ii vs k_ii+, negatives = image-queue intra keys
    J_cc         q_cc vs k_cc+, negatives = caption-queue intra keys
    J_ic         q_ic vs k_ic+, negatives = caption-queue inter keys
    J_ci         q_ci vs k_ci+, negatives = image-queue inter keys

Each term is a mean over the batch; a sample without a caption adds 0 to
J_cc, J_ic and J_ci, and a sample without tags adds 0 to J_tag.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict

import numpy as np

from config.run_config import LossConfig
from config.settings import LOSS_TERMS
from errors import EmptyBatch, NonFiniteGradient
from losses.contrastive import hinge_ranking, info_nce, tag_supervised_nce
from memory.key_queue import QueueView

GRAD_KEYS = ("image_intra", "image_inter", "caption_intra", "caption_inter")


@dataclass
class BatchFeatures:
    """Query and positive-key features of one batch (rows are samples).

    Caption rows of samples without a caption are ignored.
    """

    image_intra_q: np.ndarray  # q_ii
    image_inter_q: np.ndarray  # q_ic
    caption_intra_q: np.ndarray  # q_cc
    caption_inter_q: np.ndarray  # q_ci
    image_intra_k: np.ndarray  # k_ii
    image_inter_k: np.ndarray  # k_ci
    caption_intra_k: np.ndarray  # k_cc
    caption_inter_k: np.ndarray  # k_ic
    tags: np.ndarray
    has_caption: np.ndarray
    has_tags: np.ndarray

    @property
    def batch_size(self) -> int:
        return self.image_intra_q.shape[0]


@dataclass
class LossBreakdown:
    j_ii: float = 0.0
    j_tag: float = 0.0
    j_cc: float = 0.0
    j_ic: float = 0.0
    j_ci: float = 0.0
    total: float = 0.0
    grads: Dict[str, np.ndarray] = field(default_factory=dict)

    def terms(self) -> Dict[str, float]:
        return {name: getattr(self, name) for name in LOSS_TERMS}

    def values(self) -> Dict[str, float]:
        return {**self.terms(), "total": self.total}


def combined_loss(
    features: BatchFeatures,
    image_view: QueueView,
    caption_view: QueueView,
    cfg: LossConfig,
) -> LossBreakdown:
    """Evaluate ``J = sum_x lambda_x J_x`` and its gradient per query feature.

    Args:
        features: Query features (q_ii, q_ic, q_cc, q_ci), positive keys and masks
        image_view: Snapshot of the image-side queue
        caption_view: Snapshot of the caption-side queue
        cfg: Temperature, margin, tag threshold and term weights

    Returns:
        LossBreakdown with batch-mean terms, the weighted total and
        ``grads`` keyed by ``image_intra``, ``image_inter``,
        ``caption_intra`` and ``caption_inter``
    """
    batch = features.batch_size
    if batch == 0:
        raise EmptyBatch("combined loss needs at least one sample")

    sums = {name: 0.0 for name in LOSS_TERMS}
    grads = {
        "image_intra": np.zeros_like(features.image_intra_q),
        "image_inter": np.zeros_like(features.image_inter_q),
        "caption_intra": np.zeros_like(features.caption_intra_q),
        "caption_inter": np.zeros_like(features.caption_inter_q),
    }

    for i in range(batch):
        loss, grad = info_nce(features.image_intra_q[i], features.image_intra_k[i], image_view.intra, cfg.tau)
        sums["j_ii"] += loss
        grads["image_intra"][i] += cfg.lambda_ii * grad

        if features.has_tags[i]:
            loss, grad = tag_supervised_nce(
                features.image_intra_q[i],
                features.tags[i],
                features.image_intra_k[i],
                image_view.intra,
                image_view.tags,
                cfg.tau,
                cfg.epsilon,
            )
            sums["j_tag"] += loss
            grads["image_intra"][i] += cfg.lambda_tag * grad

        if not features.has_caption[i]:
            continue

        loss, grad = info_nce(features.caption_intra_q[i], features.caption_intra_k[i], caption_view.intra, cfg.tau)
        sums["j_cc"] += loss
        grads["caption_intra"][i] += cfg.lambda_cc * grad

        loss, grad = hinge_ranking(features.image_inter_q[i], features.caption_inter_k[i], caption_view.inter, cfg.alpha)
        sums["j_ic"] += loss
        grads["image_inter"][i] += cfg.lambda_ic * grad

        loss, grad = hinge_ranking(features.caption_inter_q[i], features.image_inter_k[i], image_view.inter, cfg.alpha)
        sums["j_ci"] += loss
        grads["caption_inter"][i] += cfg.lambda_ci * grad

    breakdown = LossBreakdown(**{name: value / batch for name, value in sums.items()})
    breakdown.total = sum(cfg.weight(name) * getattr(breakdown, name) for name in LOSS_TERMS)
    breakdown.grads = {key: g / batch for key, g in grads.items()}

    if not np.isfinite(breakdown.total) or not all(np.all(np.isfinite(g)) for g in breakdown.grads.values()):
        raise NonFiniteGradient(f"non-finite objective or gradient: {breakdown.values()}")
    return breakdown
