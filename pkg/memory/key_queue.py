"""Fixed-capacity FIFO dictionary of momentum-encoder key features."""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Iterable, Optional, Tuple

import numpy as np

from config.settings import UNIT_NORM_TOL
from errors import InvalidKey


def _frozen(values) -> np.ndarray:
    array = np.array(values, dtype=np.float64)
    array.setflags(write=False)
    return array


@dataclass(frozen=True)
class QueueEntry:
    """One enqueued sample: its intra and inter keys plus optional tags."""

    intra_key: np.ndarray
    inter_key: np.ndarray
    tags: Optional[np.ndarray]
    source_id: int

    @classmethod
    def create(cls, intra_key, inter_key, tags=None, source_id: int = -1) -> "QueueEntry":
        return cls(
            intra_key=_frozen(intra_key),
            inter_key=_frozen(inter_key),
            tags=None if tags is None else _frozen(tags),
            source_id=int(source_id),
        )

    def validate(self) -> None:
        for name in ("intra_key", "inter_key"):
            norm = float(np.linalg.norm(getattr(self, name)))
            if abs(norm - 1.0) > UNIT_NORM_TOL:
                raise InvalidKey(f"{name} of source {self.source_id} has norm {norm!r}, expected 1")
        if self.tags is not None and not np.all((self.tags == 0.0) | (self.tags == 1.0)):
            raise InvalidKey(f"tags of source {self.source_id} are not binary")


@dataclass(frozen=True)
class QueueView:
    """Stacked key matrices of a queue snapshot, oldest entry first.

    Entries without tags have an all-zero tag row, which never passes a
    non-negative overlap threshold.
    """

    intra: np.ndarray
    inter: np.ndarray
    tags: np.ndarray
    source_ids: np.ndarray

    def __len__(self) -> int:
        return self.intra.shape[0]


class KeyQueue:
    """Ring buffer of QueueEntry; iteration order is insertion order."""

    def __init__(self, capacity: int, intra_dim: int, inter_dim: int, num_tags: int = 0):
        if capacity < 1:
            raise ValueError(f"queue capacity must be positive, got {capacity}")
        self.capacity = int(capacity)
        self.intra_dim = int(intra_dim)
        self.inter_dim = int(inter_dim)
        self.num_tags = int(num_tags)
        self._entries: deque = deque(maxlen=self.capacity)

    def __len__(self) -> int:
        return len(self._entries)

    def __iter__(self):
        return iter(tuple(self._entries))

    def enqueue_batch(self, batch: Iterable[QueueEntry]) -> "KeyQueue":
        """Append entries in order, evicting the oldest beyond capacity.

        The whole batch is validated before anything is appended.
        """
        batch = list(batch)
        for entry in batch:
            entry.validate()
            if entry.intra_key.shape != (self.intra_dim,) or entry.inter_key.shape != (self.inter_dim,):
                raise InvalidKey(
                    f"key shapes {entry.intra_key.shape}/{entry.inter_key.shape} "
                    f"do not match queue dims {self.intra_dim}/{self.inter_dim}"
                )
        self._entries.extend(batch)
        return self

    def snapshot(self) -> Tuple[QueueEntry, ...]:
        """Immutable copy of the current entries, oldest first."""
        return tuple(self._entries)

    def clear(self) -> None:
        self._entries.clear()

    def view(self) -> QueueView:
        return view_of(self.snapshot(), self.intra_dim, self.inter_dim, self.num_tags)


def view_of(entries: Tuple[QueueEntry, ...], intra_dim: int, inter_dim: int, num_tags: int) -> QueueView:
    n = len(entries)
    intra = np.empty((n, intra_dim))
    inter = np.empty((n, inter_dim))
    tags = np.zeros((n, num_tags))
    for i, entry in enumerate(entries):
        intra[i] = entry.intra_key
        inter[i] = entry.inter_key
        if entry.tags is not None and num_tags:
            tags[i] = entry.tags
    source_ids = np.array([e.source_id for e in entries], dtype=np.int64)
    return QueueView(intra, inter, tags, source_ids)
