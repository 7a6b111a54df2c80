"""Synthetic image/caption/tag datasets drawn from a Gaussian mixture.

Every class owns one unit-norm image prototype, one unit-norm caption
prototype and a fixed tag subset. A sample is its class prototype plus
independent Gaussian noise in each modality, plus a per-sample instance
latent pushed into both modalities through fixed random maps; the
instance latent is what ties a specific caption to a specific image
beyond their shared class.
"""
from __future__ import annotations

from typing import Tuple

import numpy as np

from config.run_config import GenConfig
from logger import logger
from numerics.linalg import l2_normalize_rows
from numerics.rng import SeededRng
from schemas.records import Dataset


def class_split_mask(num_classes: int, samples_per_class: int, test_fraction: float) -> np.ndarray:
    """Boolean test mask: the last ``test_fraction`` of each class block."""
    n_test = max(1, int(round(samples_per_class * test_fraction)))
    n_test = min(n_test, samples_per_class - 1) if samples_per_class > 1 else 0
    position = np.arange(num_classes * samples_per_class) % samples_per_class
    return position >= samples_per_class - n_test


def generate(cfg: GenConfig) -> Tuple[Dataset, Dataset]:
    """Draw a dataset and split it 90/10 (by ``test_fraction``) within each class.

    Args:
        cfg: Generator configuration, validated here

    Returns:
        ``(train, test)`` datasets; sample ids are the global generation index
    """
    cfg.validate()
    rng = SeededRng(cfg.seed)
    c, per_class = cfg.num_classes, cfg.samples_per_class
    n = c * per_class

    image_protos, _ = l2_normalize_rows(rng.normal(0.0, 1.0, size=(c, cfg.image_dim)))
    caption_protos, _ = l2_normalize_rows(rng.normal(0.0, 1.0, size=(c, cfg.caption_dim)))

    class_tags = np.zeros((c, cfg.num_tags))
    for k in range(c):
        class_tags[k, rng.choice(cfg.num_tags, cfg.tags_per_class, replace=False)] = 1.0

    latent_dim = cfg.instance_dim
    image_map = rng.normal(0.0, 1.0 / np.sqrt(max(latent_dim, 1) * cfg.image_dim), size=(latent_dim, cfg.image_dim))
    caption_map = rng.normal(0.0, 1.0 / np.sqrt(max(latent_dim, 1) * cfg.caption_dim), size=(latent_dim, cfg.caption_dim))

    class_ids = np.repeat(np.arange(c, dtype=np.int64), per_class)
    latent = rng.normal(0.0, 1.0, size=(n, latent_dim))
    images = (
        image_protos[class_ids]
        + cfg.instance_scale * (latent @ image_map)
        + rng.normal(0.0, cfg.noise_std, size=(n, cfg.image_dim))
    )
    captions = (
        caption_protos[class_ids]
        + cfg.instance_scale * (latent @ caption_map)
        + rng.normal(0.0, cfg.noise_std, size=(n, cfg.caption_dim))
    )
    flips = rng.random((n, cfg.num_tags)) < cfg.tag_flip_prob
    tags = np.abs(class_tags[class_ids] - flips)

    has_caption = rng.random(n) >= cfg.caption_missing_prob
    has_tags = rng.random(n) >= cfg.tags_missing_prob
    captions[~has_caption] = 0.0
    tags[~has_tags] = 0.0

    dataset = Dataset(
        images=images,
        captions=captions,
        tags=tags,
        class_ids=class_ids,
        sample_ids=np.arange(n, dtype=np.int64),
        has_caption=has_caption,
        has_tags=has_tags,
    )
    test_mask = class_split_mask(c, per_class, cfg.test_fraction)
    train, test = dataset.subset(np.flatnonzero(~test_mask)), dataset.subset(np.flatnonzero(test_mask))
    logger.info(f"Generated {n} samples over {c} classes ({len(train)} train / {len(test)} test)")
    return train, test


def dataset_summary(train: Dataset, test: Dataset) -> dict:
    """Counts per class and tag statistics for the CLI summary."""

    def split(ds: Dataset) -> dict:
        counts = np.bincount(ds.class_ids, minlength=int(ds.class_ids.max(initial=-1)) + 1)
        tagged = ds.tags[ds.has_tags]
        return {
            "samples": len(ds),
            "per_class": [int(v) for v in counts],
            "with_caption": int(ds.has_caption.sum()),
            "with_tags": int(ds.has_tags.sum()),
            "mean_tags_per_sample": round(float(tagged.sum(axis=1).mean()) if len(tagged) else 0.0, 4),
        }

    return {"train": split(train), "test": split(test)}
