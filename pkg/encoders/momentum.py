"""Query encoder paired with its exponential-moving-average key encoder."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from encoders.mlp import EncoderParams
from errors import DimensionMismatch


@dataclass
class MomentumPair:
    query: EncoderParams
    key: EncoderParams
    m: float

    def distance(self) -> float:
        """Euclidean distance between key and query parameters."""
        return float(np.linalg.norm(self.key.flatten() - self.query.flatten()))


def create_momentum_pair(query: EncoderParams, m: float) -> MomentumPair:
    """Pair ``query`` with a key encoder that starts as a deep copy of it."""
    if not 0.0 <= m <= 1.0:
        raise ValueError(f"momentum coefficient must be in [0, 1], got {m}")
    return MomentumPair(query=query, key=query.copy(), m=float(m))


def momentum_update(pair: MomentumPair) -> EncoderParams:
    """In place ``p_k <- m p_k + (1 - m) p_q`` for every key parameter.

    The query encoder is never modified and no gradient reaches the key.
    """
    if pair.key.shapes() != pair.query.shapes():
        raise DimensionMismatch("key and query encoders have different shapes")
    m = pair.m
    for (_, p_k), (_, p_q) in zip(pair.key.named_parameters(), pair.query.named_parameters()):
        np.multiply(p_k, m, out=p_k)
        p_k += (1.0 - m) * p_q
    return pair.key
