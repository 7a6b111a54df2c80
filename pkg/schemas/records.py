"""Record types shared between packages.

Data records (Sample, Dataset) are column-oriented numpy containers;
report records are small dataclasses that serialize to plain dicts.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import Dict, List, Optional

import numpy as np


# -------------------------
# Data records
# -------------------------


@dataclass
class Sample:
    image_raw: np.ndarray
    caption_raw: Optional[np.ndarray]  # None: image without caption
    tags: Optional[np.ndarray]  # None: image without tags
    class_id: int
    sample_id: int = 0


@dataclass
class Dataset:
    """Column arrays for N samples.

    Missing captions / tags are stored as zero rows with the matching
    ``has_caption`` / ``has_tags`` flag cleared.
    """

    images: np.ndarray
    captions: np.ndarray
    tags: np.ndarray
    class_ids: np.ndarray
    sample_ids: np.ndarray
    has_caption: np.ndarray
    has_tags: np.ndarray

    def __len__(self) -> int:
        return self.images.shape[0]

    @property
    def image_dim(self) -> int:
        return self.images.shape[1]

    @property
    def caption_dim(self) -> int:
        return self.captions.shape[1]

    @property
    def num_tags(self) -> int:
        return self.tags.shape[1]

    def subset(self, indices) -> "Dataset":
        indices = np.asarray(indices, dtype=np.int64)
        return Dataset(
            images=self.images[indices],
            captions=self.captions[indices],
            tags=self.tags[indices],
            class_ids=self.class_ids[indices],
            sample_ids=self.sample_ids[indices],
            has_caption=self.has_caption[indices],
            has_tags=self.has_tags[indices],
        )

    def sample(self, i: int) -> Sample:
        return Sample(
            image_raw=self.images[i].copy(),
            caption_raw=self.captions[i].copy() if self.has_caption[i] else None,
            tags=self.tags[i].copy() if self.has_tags[i] else None,
            class_id=int(self.class_ids[i]),
            sample_id=int(self.sample_ids[i]),
        )

    def samples(self) -> List[Sample]:
        return [self.sample(i) for i in range(len(self))]

    @classmethod
    def from_samples(cls, samples: List[Sample], image_dim: int, caption_dim: int, num_tags: int) -> "Dataset":
        n = len(samples)
        images = np.zeros((n, image_dim))
        captions = np.zeros((n, caption_dim))
        tags = np.zeros((n, num_tags))
        has_caption = np.zeros(n, dtype=bool)
        has_tags = np.zeros(n, dtype=bool)
        for i, s in enumerate(samples):
            images[i] = s.image_raw
            if s.caption_raw is not None:
                captions[i] = s.caption_raw
                has_caption[i] = True
            if s.tags is not None:
                tags[i] = s.tags
                has_tags[i] = True
        return cls(
            images=images,
            captions=captions,
            tags=tags,
            class_ids=np.array([s.class_id for s in samples], dtype=np.int64),
            sample_ids=np.array([s.sample_id for s in samples], dtype=np.int64),
            has_caption=has_caption,
            has_tags=has_tags,
        )


# -------------------------
# Report records
# -------------------------


@dataclass
class RetrievalReport:
    direction: str  # image_to_text / text_to_image
    r_at: Dict[int, float]
    med_r: int
    mean_r: float
    num_queries: int

    def to_dict(self) -> Dict:
        data = asdict(self)
        data["r_at"] = {str(k): v for k, v in sorted(self.r_at.items())}
        return data


@dataclass
class ProbeReport:
    top1: float
    num_train: int
    num_test: int
    iterations: int

    def to_dict(self) -> Dict:
        return asdict(self)


@dataclass
class TaggingReport:
    miou_at: Dict[int, float]
    num_test: int

    def to_dict(self) -> Dict:
        return {"miou_at": {str(k): v for k, v in sorted(self.miou_at.items())}, "num_test": self.num_test}


@dataclass
class EpochMetrics:
    epoch: int
    lr_image: float
    lr_text: float
    j_ii: float
    j_tag: float
    j_cc: float
    j_ic: float
    j_ci: float
    total: float

    def to_dict(self) -> Dict:
        return asdict(self)


@dataclass
class EvaluationReport:
    retrieval: Dict[str, RetrievalReport]
    probe: ProbeReport
    tagging: TaggingReport
    extras: Dict = field(default_factory=dict)

    def to_dict(self) -> Dict:
        return {
            "retrieval": {k: v.to_dict() for k, v in sorted(self.retrieval.items())},
            "probe": self.probe.to_dict(),
            "tagging": self.tagging.to_dict(),
            **self.extras,
        }
