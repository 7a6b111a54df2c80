"""Shared fixtures: a small run configuration and its synthetic dataset."""
import copy

import numpy as np
import pytest

from config.run_config import RunConfig, run_config_from_dict
from numerics.rng import SeededRng
from synthdata.generator import generate

SMALL_CONFIG = {
    "seed": 3,
    "data": {
        "num_classes": 4,
        "samples_per_class": 20,
        "image_dim": 8,
        "caption_dim": 6,
        "num_tags": 6,
        "tags_per_class": 2,
        "instance_dim": 2,
        "seed": 3,
    },
    "encoder": {"hidden_dims": [8], "out_dim": 8, "intra_dim": 4, "inter_dim": 6},
    "optim": {"batch_size": 8, "epochs": 2, "momentum": 0.99},
    "queue": {"capacity": 16},
    "eval": {"k_list": [1, 5], "miou_k_list": [1, 2], "probe": {"max_iters": 200}},
}


@pytest.fixture
def small_config_doc() -> dict:
    return copy.deepcopy(SMALL_CONFIG)


@pytest.fixture
def small_config() -> RunConfig:
    return run_config_from_dict(SMALL_CONFIG)


@pytest.fixture
def small_data(small_config):
    return generate(small_config.data)


@pytest.fixture
def rng() -> SeededRng:
    return SeededRng(1234)


def _unit_rows(rng: SeededRng, n: int, d: int) -> np.ndarray:
    x = rng.normal(size=(n, d))
    return x / np.linalg.norm(x, axis=1, keepdims=True)


@pytest.fixture
def unit_rows():
    """Draw ``n`` random unit vectors of width ``d``."""
    return _unit_rows
