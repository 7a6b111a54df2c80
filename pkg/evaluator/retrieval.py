"""Cross-modal retrieval metrics on paired, unit-norm features."""
from __future__ import annotations

from typing import Dict, Sequence

import numpy as np

from errors import DimensionMismatch, EmptyTestSet
from schemas.records import RetrievalReport

DIRECTIONS = ("image_to_text", "text_to_image")


def true_pair_ranks(scores: np.ndarray) -> np.ndarray:
    """1-based rank of candidate ``i`` for query row ``i``.

    Candidates are ordered by descending score; equal scores keep
    ascending candidate index, so
    ``rank_i = 1 + #{j: s_ij > s_ii} + #{j < i: s_ij == s_ii}``.
    """
    true = np.diag(scores)[:, None]
    above = (scores > true).sum(axis=1)
    before = np.tril(scores == true, k=-1).sum(axis=1)
    return (1 + above + before).astype(np.int64)


def lower_median(values: np.ndarray) -> int:
    ordered = np.sort(values)
    return int(ordered[(len(ordered) - 1) // 2])


def report_from_ranks(direction: str, ranks: np.ndarray, k_list: Sequence[int]) -> RetrievalReport:
    n = len(ranks)
    return RetrievalReport(
        direction=direction,
        r_at={int(k): 100.0 * float(np.count_nonzero(ranks <= k)) / n for k in k_list},
        med_r=lower_median(ranks),
        mean_r=float(ranks.mean()),
        num_queries=n,
    )


def retrieval_eval(
    image_feats: np.ndarray,
    caption_feats: np.ndarray,
    k_list: Sequence[int],
) -> Dict[str, RetrievalReport]:
    """Rank by cosine similarity in both directions.

    Args:
        image_feats: (N, d) unit-norm image inter features
        caption_feats: (N, d) unit-norm caption inter features, row i pairs with image i
        k_list: Cut-offs for R@K

    Returns:
        Reports keyed ``image_to_text`` and ``text_to_image``
    """
    image_feats = np.atleast_2d(np.asarray(image_feats, dtype=np.float64))
    caption_feats = np.atleast_2d(np.asarray(caption_feats, dtype=np.float64))
    if image_feats.shape[0] == 0 or caption_feats.shape[0] == 0:
        raise EmptyTestSet("retrieval needs at least one image/caption pair")
    if image_feats.shape != caption_feats.shape:
        raise DimensionMismatch(f"paired features differ in shape: {image_feats.shape} vs {caption_feats.shape}")

    scores = image_feats @ caption_feats.T
    return {
        "image_to_text": report_from_ranks("image_to_text", true_pair_ranks(scores), k_list),
        "text_to_image": report_from_ranks("text_to_image", true_pair_ranks(scores.T), k_list),
    }
