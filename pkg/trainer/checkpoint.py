"""Save and restore a TrainState as a versioned JSON document.

The document holds the configuration echo, counters, the RNG state, all
four encoders, both velocity buffers and the per-epoch metric history.
Key queues are not stored: every epoch starts by refilling them, so a
run resumed at an epoch boundary continues exactly.
"""
from __future__ import annotations

from pathlib import Path
from typing import Any, Dict

from config.run_config import run_config_from_dict
from config.settings import CHECKPOINT_FORMAT
from encoders.mlp import EncoderParams
from errors import FormatError
from logger import logger
from numerics.rng import SeededRng
from schemas.codecs import array_from_doc, array_to_doc, read_json, versioned, write_json
from schemas.records import EpochMetrics
from trainer.state import TrainState, init_train_state


def _encoders(state: TrainState) -> Dict[str, EncoderParams]:
    return {
        "image.query": state.image.query,
        "image.key": state.image.key,
        "caption.query": state.caption.query,
        "caption.key": state.caption.key,
        "image.velocity": state.image_opt.velocity,
        "caption.velocity": state.caption_opt.velocity,
    }


def checkpoint_to_doc(state: TrainState) -> Dict[str, Any]:
    image_dim, caption_dim, num_tags = state.dims
    arrays = {
        f"{prefix}.{name}": array_to_doc(value)
        for prefix, params in _encoders(state).items()
        for name, value in params.named_parameters()
    }
    return versioned(
        CHECKPOINT_FORMAT,
        {
            "config": state.config.to_dict(),
            "dims": {"image_dim": image_dim, "caption_dim": caption_dim, "num_tags": num_tags},
            "step": state.step,
            "epoch": state.epoch,
            "total_steps": state.total_steps,
            "last_lrs": list(state.last_lrs),
            "rng_state": state.rng.get_state(),
            "arrays": arrays,
            "history": [m.to_dict() for m in state.history],
        },
    )


def save_checkpoint(state: TrainState, path: Path | str) -> Path:
    path = write_json(path, checkpoint_to_doc(state))
    logger.info(f"Saved checkpoint at epoch {state.epoch} (step {state.step}) to {path}")
    return path


def checkpoint_from_doc(doc: Dict[str, Any], name: str = "checkpoint") -> TrainState:
    """Rebuild a TrainState; array shapes must match the stored config."""
    try:
        config = run_config_from_dict(doc["config"])
        dims = doc["dims"]
        state = init_train_state(config, int(dims["image_dim"]), int(dims["caption_dim"]), int(dims["num_tags"]), 0)
        arrays = doc["arrays"]
        for prefix, params in _encoders(state).items():
            for param_name, target in params.named_parameters():
                key = f"{prefix}.{param_name}"
                if key not in arrays:
                    raise FormatError(f"{name}: missing array {key}")
                value = array_from_doc(arrays[key], key)
                if value.shape != target.shape:
                    raise FormatError(f"{name}: {key} has shape {value.shape}, expected {target.shape}")
                target[...] = value
        state.step = int(doc["step"])
        state.epoch = int(doc["epoch"])
        state.total_steps = int(doc["total_steps"])
        state.last_lrs = tuple(float(v) for v in doc.get("last_lrs", (0.0, 0.0)))
        state.rng = SeededRng.from_state(doc["rng_state"])
        state.history = [EpochMetrics(**row) for row in doc.get("history", [])]
    except (KeyError, TypeError) as e:
        raise FormatError(f"{name}: malformed checkpoint ({e})") from e
    return state


def load_checkpoint(path: Path | str) -> TrainState:
    state = checkpoint_from_doc(read_json(path, CHECKPOINT_FORMAT), str(path))
    logger.info(f"Loaded checkpoint from {path} at epoch {state.epoch} (step {state.step})")
    return state
