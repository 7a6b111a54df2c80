"""Downstream metrics: retrieval, linear probe and tagging."""
from evaluator.probe import linear_probe
from evaluator.report import evaluate_checkpoint, inter_features
from evaluator.retrieval import retrieval_eval, true_pair_ranks
from evaluator.tagging import iou_at_k, miou_at_k, tagging_miou, top_k_tags

__all__ = [
    "evaluate_checkpoint",
    "inter_features",
    "iou_at_k",
    "linear_probe",
    "miou_at_k",
    "retrieval_eval",
    "tagging_miou",
    "top_k_tags",
    "true_pair_ranks",
]
