"""Key-queue management for the image-side and caption-side dictionaries."""
from typing import Dict, List, Optional

import numpy as np

from config.settings import MODALITIES
from memory.key_queue import KeyQueue, QueueEntry, QueueView


class QueueManager:
    """Holds one KeyQueue per modality.

    The image queue stores (k_ii, k_ci, tags) and the caption queue stores
    (k_cc, k_ic); each entry carries both keys so the intra and inter
    negatives of a modality stay index-aligned.
    """

    def __init__(self, capacity: int, dims: Dict[str, tuple], num_tags: int):
        """
        Args:
            capacity: Queue length K shared by both modalities
            dims: Modality name -> (intra_dim, inter_dim)
            num_tags: Tag vocabulary size (only image entries carry tags)
        """
        self.queues: Dict[str, KeyQueue] = {}
        for modality in MODALITIES:
            intra_dim, inter_dim = dims[modality]
            self.queues[modality] = KeyQueue(
                capacity,
                intra_dim,
                inter_dim,
                num_tags=num_tags if modality == "image" else 0,
            )

    def get_queue(self, modality: str) -> KeyQueue:
        """
        Get the queue for a modality.

        Args:
            modality: image or caption

        Returns:
            KeyQueue for the modality
        """
        if modality not in self.queues:
            raise ValueError(
                f"Invalid modality: {modality}. "
                f"Valid modalities: {list(self.queues.keys())}"
            )
        return self.queues[modality]

    def views(self) -> Dict[str, QueueView]:
        """Stable stacked snapshots of both queues."""
        return {modality: queue.view() for modality, queue in self.queues.items()}

    def lengths(self) -> Dict[str, int]:
        return {modality: len(queue) for modality, queue in self.queues.items()}

    def clear(self) -> None:
        for queue in self.queues.values():
            queue.clear()

    def enqueue(
        self,
        modality: str,
        intra_keys: np.ndarray,
        inter_keys: np.ndarray,
        source_ids: np.ndarray,
        tags: Optional[np.ndarray] = None,
        has_tags: Optional[np.ndarray] = None,
    ) -> None:
        """Enqueue one row per sample; rows without tags are stored untagged."""
        entries: List[QueueEntry] = []
        for i in range(intra_keys.shape[0]):
            row_tags = None
            if tags is not None and (has_tags is None or has_tags[i]):
                row_tags = tags[i]
            entries.append(QueueEntry.create(intra_keys[i], inter_keys[i], row_tags, int(source_ids[i])))
        self.get_queue(modality).enqueue_batch(entries)
