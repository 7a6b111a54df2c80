"""Per-query contrastive losses with analytic gradients.

Every function takes one unit-norm query and returns ``(loss, grad)``
where ``grad`` is the derivative of the loss with respect to the query
vector as it enters the similarity products. Keys are constants: they
come from momentum encoders and receive no gradient.
"""
from __future__ import annotations

from typing import Optional, Tuple

import numpy as np
from scipy.special import log_softmax

from errors import DimensionMismatch


def _stack_keys(query: np.ndarray, pos_key: np.ndarray, neg_keys: Optional[np.ndarray]) -> np.ndarray:
    query = np.asarray(query, dtype=np.float64)
    pos_key = np.asarray(pos_key, dtype=np.float64)
    dim = query.shape[0]
    if query.ndim != 1 or pos_key.shape != (dim,):
        raise DimensionMismatch(f"query {query.shape} and positive key {pos_key.shape} differ")
    if neg_keys is None or np.size(neg_keys) == 0:
        neg_keys = np.empty((0, dim))
    else:
        neg_keys = np.asarray(neg_keys, dtype=np.float64)
    if neg_keys.ndim != 2 or neg_keys.shape[1] != dim:
        raise DimensionMismatch(f"negative keys {neg_keys.shape} do not match query dim {dim}")
    return np.vstack([pos_key[None, :], neg_keys])


def info_nce(
    query: np.ndarray,
    pos_key: np.ndarray,
    neg_keys: Optional[np.ndarray],
    tau: float,
) -> Tuple[float, np.ndarray]:
    """InfoNCE: ``-log softmax(q.k/tau)`` at the positive key.

    The softmax runs over the positive key and every negative, so a query
    without negatives has loss exactly 0.
    """
    keys = _stack_keys(query, pos_key, neg_keys)
    log_probs = log_softmax(keys @ query / tau)
    loss = -float(log_probs[0])
    probs = np.exp(log_probs)
    grad = (probs @ keys - keys[0]) / tau
    return loss, grad


def tag_positive_mask(query_tags: np.ndarray, neg_tags: Optional[np.ndarray], epsilon: float) -> np.ndarray:
    """Queue rows whose tag overlap with the query is strictly above ``epsilon``."""
    if neg_tags is None or np.size(neg_tags) == 0:
        return np.zeros(0 if neg_tags is None else len(neg_tags), dtype=bool)
    return (np.asarray(neg_tags) @ np.asarray(query_tags)) > epsilon


def tag_supervised_nce(
    query: np.ndarray,
    query_tags: np.ndarray,
    pos_key: np.ndarray,
    neg_keys: Optional[np.ndarray],
    neg_tags: Optional[np.ndarray],
    tau: float,
    epsilon: float,
) -> Tuple[float, np.ndarray]:
    """Tag-supervised InfoNCE averaged over the positive set P.

    P holds the positive key plus every queue key whose tags overlap the
    query tags by more than ``epsilon``. The denominator always covers the
    full key set. With ``P == {pos_key}`` this is ``info_nce`` exactly.
    """
    extra = tag_positive_mask(query_tags, neg_tags, epsilon)
    n_neg = 0 if neg_keys is None else len(neg_keys)
    if extra.shape[0] != n_neg:
        raise DimensionMismatch(f"{extra.shape[0]} tag rows for {n_neg} negative keys")
    if not extra.any():
        return info_nce(query, pos_key, neg_keys, tau)

    keys = _stack_keys(query, pos_key, neg_keys)
    positives = np.concatenate([[True], extra])
    log_probs = log_softmax(keys @ query / tau)
    loss = -float(np.mean(log_probs[positives]))
    probs = np.exp(log_probs)
    grad = (probs @ keys - keys[positives].mean(axis=0)) / tau
    return loss, grad


def hinge_ranking(
    query: np.ndarray,
    pos_key: np.ndarray,
    neg_keys: Optional[np.ndarray],
    alpha: float,
) -> Tuple[float, np.ndarray]:
    """Margin ranking ``sum_j max(0, alpha - q.k+ + q.k_j)`` over the negatives.

    The positive pair is not part of the sum, so a perfectly separated
    query scores 0. At the hinge point the subgradient 0 is used.
    """
    keys = _stack_keys(query, pos_key, neg_keys)
    sims = keys @ query
    margins = alpha - sims[0] + sims[1:]
    active = margins > 0
    loss = float(np.sum(margins[active]))
    grad = keys[1:][active].sum(axis=0) - np.count_nonzero(active) * keys[0]
    return loss, grad


def hinge_margins(query: np.ndarray, pos_key: np.ndarray, neg_keys: np.ndarray, alpha: float) -> np.ndarray:
    """Per-negative hinge arguments, used to keep gradient checks off the kink."""
    keys = _stack_keys(query, pos_key, neg_keys)
    sims = keys @ query
    return alpha - sims[0] + sims[1:]
