"""Contrastive losses: InfoNCE, tag-supervised InfoNCE, margin ranking, combined objective."""
from config.run_config import LossConfig
from losses.combined import GRAD_KEYS, BatchFeatures, LossBreakdown, combined_loss
from losses.contrastive import hinge_margins, hinge_ranking, info_nce, tag_positive_mask, tag_supervised_nce

__all__ = [
    "GRAD_KEYS",
    "BatchFeatures",
    "LossBreakdown",
    "LossConfig",
    "combined_loss",
    "hinge_margins",
    "hinge_ranking",
    "info_nce",
    "tag_positive_mask",
    "tag_supervised_nce",
]
