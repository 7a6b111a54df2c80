"""Tag prediction quality as mean intersection-over-union of top-K tags."""
from __future__ import annotations

from typing import Sequence

import numpy as np

from config.run_config import ProbeConfig
from errors import DimensionMismatch, EmptyTestSet
from evaluator.probe import fit_one_vs_all, standardize
from schemas.records import TaggingReport


def top_k_tags(scores: np.ndarray, k: int) -> np.ndarray:
    """Indices of the ``k`` highest scores; equal scores keep ascending index."""
    return np.argsort(-np.asarray(scores), kind="stable")[..., :k]


def iou_at_k(scores: np.ndarray, gt: np.ndarray, k: int) -> float:
    """``|pred & gt| / |pred | gt|`` for the top-``k`` tags of one sample."""
    if not 1 <= k <= len(scores):
        raise ValueError(f"K must be in [1, {len(scores)}], got {k}")
    pred = np.zeros(len(scores), dtype=bool)
    pred[top_k_tags(scores, k)] = True
    truth = np.asarray(gt) > 0.5
    return float(np.count_nonzero(pred & truth)) / float(np.count_nonzero(pred | truth))


def miou_at_k(scores: np.ndarray, gt: np.ndarray, k: int) -> float:
    if scores.shape != gt.shape:
        raise DimensionMismatch(f"scores {scores.shape} and tags {gt.shape} differ")
    if scores.shape[0] == 0:
        raise EmptyTestSet("mIOU needs at least one tagged sample")
    return float(np.mean([iou_at_k(s, t, k) for s, t in zip(scores, gt)]))


def tagging_miou(
    train_feats: np.ndarray,
    train_tags: np.ndarray,
    test_feats: np.ndarray,
    test_tags: np.ndarray,
    k_list: Sequence[int],
    cfg: ProbeConfig,
) -> TaggingReport:
    """Fit one-vs-all logistic tag scorers on train features, score test features.

    Only samples that carry tags should be passed in.
    """
    train_feats = np.asarray(train_feats, dtype=np.float64)
    test_feats = np.asarray(test_feats, dtype=np.float64)
    if len(test_feats) == 0 or len(train_feats) == 0:
        raise EmptyTestSet("tagging needs tagged train and test samples")
    x_train, x_test = standardize(train_feats, test_feats)
    weight, bias, _ = fit_one_vs_all(x_train, np.asarray(train_tags, dtype=np.float64), cfg)
    scores = x_test @ weight + bias
    gt = np.asarray(test_tags, dtype=np.float64)
    return TaggingReport(
        miou_at={int(k): miou_at_k(scores, gt, int(k)) for k in k_list},
        num_test=len(test_feats),
    )
