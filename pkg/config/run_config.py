"""Typed run configuration loaded from a JSON document.

Each section is a frozen dataclass with a ``validate`` method. A config
file may set any subset of fields; missing fields take the defaults from
``config.settings`` and unknown fields are rejected so that a misspelled
loss weight cannot silently fall back to its default.
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

from config.settings import (
    AUG_DEFAULTS,
    DEFAULT_SEED,
    ENCODER_DEFAULTS,
    EVAL_DEFAULTS,
    GEN_DEFAULTS,
    LOSS_DEFAULTS,
    OPTIM_DEFAULTS,
    PROBE_DEFAULTS,
    QUEUE_DEFAULTS,
)
from errors import ConfigError, StorageError


def _require(condition: bool, field_name: str, message: str) -> None:
    if not condition:
        raise ConfigError(field_name, message)


@dataclass(frozen=True)
class GenConfig:
    num_classes: int = GEN_DEFAULTS["num_classes"]
    samples_per_class: int = GEN_DEFAULTS["samples_per_class"]
    image_dim: int = GEN_DEFAULTS["image_dim"]
    caption_dim: int = GEN_DEFAULTS["caption_dim"]
    num_tags: int = GEN_DEFAULTS["num_tags"]
    noise_std: float = GEN_DEFAULTS["noise_std"]
    tags_per_class: int = GEN_DEFAULTS["tags_per_class"]
    tag_flip_prob: float = GEN_DEFAULTS["tag_flip_prob"]
    instance_dim: int = GEN_DEFAULTS["instance_dim"]
    instance_scale: float = GEN_DEFAULTS["instance_scale"]
    caption_missing_prob: float = GEN_DEFAULTS["caption_missing_prob"]
    tags_missing_prob: float = GEN_DEFAULTS["tags_missing_prob"]
    test_fraction: float = GEN_DEFAULTS["test_fraction"]
    seed: int = GEN_DEFAULTS["seed"]

    def validate(self, prefix: str = "data") -> "GenConfig":
        _require(self.num_classes >= 2, f"{prefix}.num_classes", "must be >= 2")
        _require(self.samples_per_class >= 1, f"{prefix}.samples_per_class", "must be >= 1")
        _require(self.image_dim >= 2, f"{prefix}.image_dim", "must be >= 2")
        _require(self.caption_dim >= 2, f"{prefix}.caption_dim", "must be >= 2")
        _require(self.num_tags >= 1, f"{prefix}.num_tags", "must be >= 1")
        _require(self.noise_std > 0, f"{prefix}.noise_std", "must be > 0")
        _require(
            0 <= self.tags_per_class <= self.num_tags,
            f"{prefix}.tags_per_class",
            "must be between 0 and num_tags",
        )
        _require(0 <= self.tag_flip_prob <= 1, f"{prefix}.tag_flip_prob", "must be in [0, 1]")
        _require(self.instance_dim >= 0, f"{prefix}.instance_dim", "must be >= 0")
        _require(self.instance_scale >= 0, f"{prefix}.instance_scale", "must be >= 0")
        _require(
            0 <= self.caption_missing_prob < 1,
            f"{prefix}.caption_missing_prob",
            "must be in [0, 1)",
        )
        _require(0 <= self.tags_missing_prob <= 1, f"{prefix}.tags_missing_prob", "must be in [0, 1]")
        _require(0 < self.test_fraction < 1, f"{prefix}.test_fraction", "must be in (0, 1)")
        return self


@dataclass(frozen=True)
class AugConfig:
    noise_std: float = AUG_DEFAULTS["noise_std"]
    dropout_prob: float = AUG_DEFAULTS["dropout_prob"]

    def validate(self, prefix: str = "augment") -> "AugConfig":
        _require(self.noise_std >= 0, f"{prefix}.noise_std", "must be >= 0")
        _require(0 <= self.dropout_prob < 1, f"{prefix}.dropout_prob", "must be in [0, 1)")
        return self


@dataclass(frozen=True)
class EncoderConfig:
    hidden_dims: Tuple[int, ...] = tuple(ENCODER_DEFAULTS["hidden_dims"])
    out_dim: int = ENCODER_DEFAULTS["out_dim"]
    intra_dim: int = ENCODER_DEFAULTS["intra_dim"]
    inter_dim: int = ENCODER_DEFAULTS["inter_dim"]
    head_mode: str = ENCODER_DEFAULTS["head_mode"]
    head_hidden: Optional[int] = ENCODER_DEFAULTS["head_hidden"]

    def validate(self, prefix: str = "encoder") -> "EncoderConfig":
        _require(all(d >= 1 for d in self.hidden_dims), f"{prefix}.hidden_dims", "entries must be >= 1")
        _require(self.out_dim >= 1, f"{prefix}.out_dim", "must be >= 1")
        _require(self.intra_dim >= 1, f"{prefix}.intra_dim", "must be >= 1")
        _require(self.inter_dim >= 1, f"{prefix}.inter_dim", "must be >= 1")
        _require(self.head_mode in ("separate", "shared"), f"{prefix}.head_mode", "must be 'separate' or 'shared'")
        _require(
            self.head_hidden is None or self.head_hidden >= 1,
            f"{prefix}.head_hidden",
            "must be null or >= 1",
        )
        if self.head_mode == "shared":
            _require(
                self.intra_dim == self.inter_dim,
                f"{prefix}.inter_dim",
                "shared head needs intra_dim == inter_dim",
            )
        return self

    def layer_dims(self, input_dim: int) -> List[int]:
        return [input_dim, *self.hidden_dims, self.out_dim]


@dataclass(frozen=True)
class LossConfig:
    tau: float = LOSS_DEFAULTS["tau"]
    alpha: float = LOSS_DEFAULTS["alpha"]
    epsilon: float = LOSS_DEFAULTS["epsilon"]
    lambda_ii: float = LOSS_DEFAULTS["lambda_ii"]
    lambda_tag: float = LOSS_DEFAULTS["lambda_tag"]
    lambda_cc: float = LOSS_DEFAULTS["lambda_cc"]
    lambda_ic: float = LOSS_DEFAULTS["lambda_ic"]
    lambda_ci: float = LOSS_DEFAULTS["lambda_ci"]

    def validate(self, prefix: str = "loss") -> "LossConfig":
        _require(self.tau > 0, f"{prefix}.tau", "must be > 0")
        _require(self.alpha >= 0, f"{prefix}.alpha", "must be >= 0")
        _require(self.epsilon >= 0, f"{prefix}.epsilon", "must be >= 0")
        for name in ("lambda_ii", "lambda_tag", "lambda_cc", "lambda_ic", "lambda_ci"):
            _require(getattr(self, name) >= 0, f"{prefix}.{name}", "must be >= 0")
        return self

    def weight(self, term: str) -> float:
        """Weight of a loss term given as ``j_ii`` ... ``j_ci``."""
        return getattr(self, "lambda_" + term[2:])


@dataclass(frozen=True)
class OptimConfig:
    lr_image: float = OPTIM_DEFAULTS["lr_image"]
    lr_text: float = OPTIM_DEFAULTS["lr_text"]
    sgd_momentum: float = OPTIM_DEFAULTS["sgd_momentum"]
    weight_decay: float = OPTIM_DEFAULTS["weight_decay"]
    batch_size: int = OPTIM_DEFAULTS["batch_size"]
    epochs: int = OPTIM_DEFAULTS["epochs"]
    momentum: float = OPTIM_DEFAULTS["momentum"]
    warm_queues: bool = OPTIM_DEFAULTS["warm_queues"]

    def validate(self, prefix: str = "optim") -> "OptimConfig":
        _require(self.lr_image > 0, f"{prefix}.lr_image", "must be > 0")
        _require(self.lr_text > 0, f"{prefix}.lr_text", "must be > 0")
        _require(0 <= self.sgd_momentum < 1, f"{prefix}.sgd_momentum", "must be in [0, 1)")
        _require(self.weight_decay >= 0, f"{prefix}.weight_decay", "must be >= 0")
        _require(self.batch_size >= 1, f"{prefix}.batch_size", "must be >= 1")
        _require(self.epochs >= 0, f"{prefix}.epochs", "must be >= 0")
        _require(0 <= self.momentum <= 1, f"{prefix}.momentum", "must be in [0, 1]")
        return self


@dataclass(frozen=True)
class QueueConfig:
    capacity: int = QUEUE_DEFAULTS["capacity"]

    def validate(self, prefix: str = "queue") -> "QueueConfig":
        _require(self.capacity >= 1, f"{prefix}.capacity", "must be >= 1")
        return self


@dataclass(frozen=True)
class ProbeConfig:
    learning_rate: float = PROBE_DEFAULTS["learning_rate"]
    max_iters: int = PROBE_DEFAULTS["max_iters"]
    tolerance: float = PROBE_DEFAULTS["tolerance"]
    l2: float = PROBE_DEFAULTS["l2"]

    def validate(self, prefix: str = "eval.probe") -> "ProbeConfig":
        _require(self.learning_rate > 0, f"{prefix}.learning_rate", "must be > 0")
        _require(self.max_iters >= 1, f"{prefix}.max_iters", "must be >= 1")
        _require(self.tolerance >= 0, f"{prefix}.tolerance", "must be >= 0")
        _require(self.l2 >= 0, f"{prefix}.l2", "must be >= 0")
        return self


@dataclass(frozen=True)
class EvalConfig:
    k_list: Tuple[int, ...] = tuple(EVAL_DEFAULTS["k_list"])
    miou_k_list: Tuple[int, ...] = tuple(EVAL_DEFAULTS["miou_k_list"])
    probe: ProbeConfig = field(default_factory=ProbeConfig)

    def validate(self, prefix: str = "eval") -> "EvalConfig":
        _require(len(self.k_list) > 0 and all(k >= 1 for k in self.k_list), f"{prefix}.k_list", "entries must be >= 1")
        _require(all(k >= 1 for k in self.miou_k_list), f"{prefix}.miou_k_list", "entries must be >= 1")
        self.probe.validate(f"{prefix}.probe")
        return self


@dataclass(frozen=True)
class RunConfig:
    seed: int = DEFAULT_SEED
    data: GenConfig = field(default_factory=GenConfig)
    augment: AugConfig = field(default_factory=AugConfig)
    encoder: EncoderConfig = field(default_factory=EncoderConfig)
    loss: LossConfig = field(default_factory=LossConfig)
    optim: OptimConfig = field(default_factory=OptimConfig)
    queue: QueueConfig = field(default_factory=QueueConfig)
    eval: EvalConfig = field(default_factory=EvalConfig)

    def validate(self) -> "RunConfig":
        _require(isinstance(self.seed, int) and self.seed >= 0, "seed", "must be a non-negative integer")
        self.data.validate()
        self.augment.validate()
        self.encoder.validate()
        self.loss.validate()
        self.optim.validate()
        self.queue.validate()
        self.eval.validate()
        if self.data.num_tags < max(self.eval.miou_k_list, default=1):
            raise ConfigError("eval.miou_k_list", "K must not exceed data.num_tags")
        return self

    def to_dict(self) -> Dict[str, Any]:
        """Plain JSON-ready echo of the configuration."""
        return _jsonable(asdict(self))

    def with_overrides(self, overrides: Dict[str, Any]) -> "RunConfig":
        merged = _deep_merge(self.to_dict(), overrides)
        return run_config_from_dict(merged)


_SECTIONS = {
    "data": GenConfig,
    "augment": AugConfig,
    "encoder": EncoderConfig,
    "loss": LossConfig,
    "optim": OptimConfig,
    "queue": QueueConfig,
    "eval": EvalConfig,
}


def _jsonable(value: Any) -> Any:
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    return value


def _deep_merge(base: Dict[str, Any], overrides: Dict[str, Any]) -> Dict[str, Any]:
    merged = dict(base)
    for key, value in overrides.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = _deep_merge(merged[key], value)
        else:
            merged[key] = value
    return merged


def _coerce(cls, data: Any, prefix: str):
    """Build a section dataclass from a dict, rejecting unknown keys."""
    if not isinstance(data, dict):
        raise ConfigError(prefix, "must be a JSON object")
    known = {f.name: f for f in fields(cls)}
    for key in data:
        if key not in known:
            raise ConfigError(f"{prefix}.{key}", "unknown configuration key")
    kwargs = {}
    for key, value in data.items():
        path = f"{prefix}.{key}"
        if cls is EvalConfig and key == "probe":
            kwargs[key] = _coerce(ProbeConfig, value, path)
        elif isinstance(known[key].default, tuple):
            if not isinstance(value, list) or not all(
                isinstance(v, int) and not isinstance(v, bool) for v in value
            ):
                raise ConfigError(path, "must be a list of integers")
            kwargs[key] = tuple(value)
        else:
            kwargs[key] = _check_scalar(known[key], value, path)
    return cls(**kwargs)


def _check_scalar(spec, value: Any, path: str) -> Any:
    default = spec.default
    if default is None:
        # Optional[int] fields
        if value is not None and (isinstance(value, bool) or not isinstance(value, int)):
            raise ConfigError(path, "must be an integer or null")
    elif isinstance(default, bool):
        if not isinstance(value, bool):
            raise ConfigError(path, "must be a boolean")
    elif isinstance(default, int) and not isinstance(default, bool):
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(path, "must be an integer")
    elif isinstance(default, float):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(path, "must be a number")
        value = float(value)
    elif isinstance(default, str):
        if not isinstance(value, str):
            raise ConfigError(path, "must be a string")
    return value


def run_config_from_dict(data: Dict[str, Any]) -> RunConfig:
    """Merge a (partial) config document over the defaults and validate it."""
    if not isinstance(data, dict):
        raise ConfigError("config", "must be a JSON object")
    kwargs: Dict[str, Any] = {}
    for key, value in data.items():
        if key in _SECTIONS:
            kwargs[key] = _coerce(_SECTIONS[key], value, key)
        elif key == "seed":
            if isinstance(value, bool) or not isinstance(value, int):
                raise ConfigError("seed", "must be an integer")
            kwargs[key] = value
        else:
            raise ConfigError(key, "unknown configuration key")
    return RunConfig(**kwargs).validate()


def load_run_config(path: Optional[str]) -> RunConfig:
    """Load a run configuration file; ``None`` gives the defaults."""
    if path is None:
        return RunConfig().validate()
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise StorageError(f"cannot read config {path}: {e}") from e
    except UnicodeDecodeError as e:
        raise ConfigError("config", f"{path} is not UTF-8 text: {e}") from e
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError("config", f"{path} is not valid JSON: {e}") from e
    return run_config_from_dict(data)

