"""Stochastic vector augmentation standing in for crops and back-translation."""
import numpy as np

from config.run_config import AugConfig
from numerics.rng import SeededRng


def augment(v: np.ndarray, cfg: AugConfig, rng: SeededRng) -> np.ndarray:
    """Add Gaussian noise, then zero each coordinate with ``dropout_prob``.

    Works on a single vector or a batch of rows. Two calls on the same
    input with successive draws give the two views of a sample.
    """
    v = np.asarray(v, dtype=np.float64)
    noisy = v + rng.normal(0.0, cfg.noise_std, size=v.shape)
    keep = rng.random(size=v.shape) >= cfg.dropout_prob
    return noisy * keep
