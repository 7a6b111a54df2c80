"""Finite-difference check of every loss term through both encoders.

Each trial draws a small image encoder, a small caption encoder, a batch
of three samples with one missing caption and one missing tag vector, and
fixed unit-norm keys and queues. The analytic gradient of each term with
respect to all query parameters (combined objective, one term weighted 1)
is compared against central differences. Instances with a ReLU input or
a hinge argument closer than ``KINK_GAP`` to its kink, or a head output
that small, are redrawn.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Optional

import numpy as np

from config.run_config import LossConfig
from config.settings import GRADCHECK_TOLERANCE, LOSS_TERMS
from encoders.mlp import EncoderParams, ForwardCache, backward, forward_batch, init_encoder
from errors import ConfigError
from logger import TraceLogger, logger
from losses.combined import BatchFeatures, LossBreakdown, combined_loss
from losses.contrastive import hinge_margins
from memory.key_queue import QueueView
from numerics.gradcheck import finite_diff_jacobian, relative_error
from numerics.linalg import l2_normalize_rows
from numerics.rng import SeededRng

CHECKED_TERMS = (*LOSS_TERMS, "total")
KINK_GAP = 1e-3
MAX_REDRAWS = 100
CORRUPTION_SCALE = 1.5

# Small enough for one full Jacobian per trial
IMAGE_DIMS = [3, 4, 4]
CAPTION_DIMS = [2, 4, 4]
INTRA_DIM, INTER_DIM = 2, 3
HEAD_HIDDEN = 3
NUM_TAGS = 8
QUEUE_LEN = 6

ALL_TERMS = LossConfig(lambda_ii=1.0, lambda_tag=1.0, lambda_cc=1.0, lambda_ic=1.0, lambda_ci=1.0)
TOTAL_WEIGHTS = LossConfig(lambda_ic=0.5, lambda_ci=0.5)


@dataclass
class GradcheckResult:
    term: str
    max_error: float
    worst_seed: int
    trials: int
    tolerance: float = GRADCHECK_TOLERANCE

    @property
    def passed(self) -> bool:
        return self.max_error < self.tolerance


@dataclass
class _Instance:
    image: EncoderParams
    caption: EncoderParams
    x_image: np.ndarray
    x_caption: np.ndarray
    keys: Dict[str, np.ndarray]
    tags: np.ndarray
    has_caption: np.ndarray
    has_tags: np.ndarray
    image_view: QueueView
    caption_view: QueueView


def _unit_rows(rng: SeededRng, n: int, d: int) -> np.ndarray:
    return l2_normalize_rows(rng.normal(size=(n, d)))[0]


def _draw(rng: SeededRng) -> _Instance:
    batch = 3
    image = init_encoder(IMAGE_DIMS, INTRA_DIM, INTER_DIM, rng, head_hidden=HEAD_HIDDEN)
    caption = init_encoder(CAPTION_DIMS, INTRA_DIM, INTER_DIM, rng, head_hidden=HEAD_HIDDEN)
    # non-zero biases move the ReLU inputs off the origin
    for enc in (image, caption):
        for _, p in enc.named_parameters():
            if p.ndim == 1:
                p += rng.normal(0.0, 0.3, size=p.shape)
    keys = {
        "image_intra": _unit_rows(rng, batch, INTRA_DIM),
        "image_inter": _unit_rows(rng, batch, INTER_DIM),
        "caption_intra": _unit_rows(rng, batch, INTRA_DIM),
        "caption_inter": _unit_rows(rng, batch, INTER_DIM),
    }
    image_view = QueueView(
        intra=_unit_rows(rng, QUEUE_LEN, INTRA_DIM),
        inter=_unit_rows(rng, QUEUE_LEN, INTER_DIM),
        tags=(rng.random((QUEUE_LEN, NUM_TAGS)) < 0.5).astype(np.float64),
        source_ids=np.arange(QUEUE_LEN, dtype=np.int64),
    )
    caption_view = QueueView(
        intra=_unit_rows(rng, QUEUE_LEN, INTRA_DIM),
        inter=_unit_rows(rng, QUEUE_LEN, INTER_DIM),
        tags=np.zeros((QUEUE_LEN, NUM_TAGS)),
        source_ids=np.arange(QUEUE_LEN, dtype=np.int64),
    )
    return _Instance(
        image=image,
        caption=caption,
        x_image=rng.normal(size=(batch, IMAGE_DIMS[0])),
        x_caption=rng.normal(size=(batch, CAPTION_DIMS[0])),
        keys=keys,
        tags=(rng.random((batch, NUM_TAGS)) < 0.5).astype(np.float64),
        has_caption=np.array([True, True, False]),
        has_tags=np.array([True, False, True]),
        image_view=image_view,
        caption_view=caption_view,
    )


def _evaluate(inst: _Instance, image: EncoderParams, caption: EncoderParams, cfg: LossConfig):
    q_ii, q_ic, image_cache = forward_batch(image, inst.x_image)
    q_cc, q_ci, caption_cache = forward_batch(caption, inst.x_caption)
    features = BatchFeatures(
        image_intra_q=q_ii,
        image_inter_q=q_ic,
        caption_intra_q=q_cc,
        caption_inter_q=q_ci,
        image_intra_k=inst.keys["image_intra"],
        image_inter_k=inst.keys["image_inter"],
        caption_intra_k=inst.keys["caption_intra"],
        caption_inter_k=inst.keys["caption_inter"],
        tags=inst.tags,
        has_caption=inst.has_caption,
        has_tags=inst.has_tags,
    )
    breakdown = combined_loss(features, inst.image_view, inst.caption_view, cfg)
    return breakdown, features, image_cache, caption_cache


def _near_kink(inst: _Instance, cfg: LossConfig) -> bool:
    _, features, image_cache, caption_cache = _evaluate(inst, inst.image, inst.caption, cfg)
    if min(image_cache.min_abs_pre_activation(), caption_cache.min_abs_pre_activation()) < KINK_GAP:
        return True
    if min(image_cache.min_head_norm(), caption_cache.min_head_norm()) < KINK_GAP:
        return True
    for i in np.flatnonzero(inst.has_caption):
        ic = hinge_margins(features.image_inter_q[i], features.caption_inter_k[i], inst.caption_view.inter, cfg.alpha)
        ci = hinge_margins(features.caption_inter_q[i], features.image_inter_k[i], inst.image_view.inter, cfg.alpha)
        if np.min(np.abs(np.concatenate([ic, ci]))) < KINK_GAP:
            return True
    return False


def draw_instance(seed: int) -> _Instance:
    """Deterministic kink-free instance for ``seed``."""
    rng = SeededRng(seed)
    for _ in range(MAX_REDRAWS):
        inst = _draw(rng)
        if not _near_kink(inst, ALL_TERMS):
            return inst
    raise RuntimeError(f"no kink-free instance after {MAX_REDRAWS} draws for seed {seed}")


def _analytic(inst: _Instance, cfg: LossConfig) -> np.ndarray:
    breakdown, _, image_cache, caption_cache = _evaluate(inst, inst.image, inst.caption, cfg)
    g = breakdown.grads
    image_grad = backward(inst.image, image_cache, g["image_intra"], g["image_inter"])
    caption_grad = backward(inst.caption, caption_cache, g["caption_intra"], g["caption_inter"])
    return np.concatenate([image_grad.flatten(), caption_grad.flatten()])


def _term_config(term: str) -> LossConfig:
    if term == "total":
        return TOTAL_WEIGHTS
    weights = {f"lambda_{name[2:]}": 0.0 for name in LOSS_TERMS}
    weights[f"lambda_{term[2:]}"] = 1.0
    return LossConfig(**weights)


def _term_values(breakdown: LossBreakdown) -> np.ndarray:
    terms = breakdown.terms()
    total = sum(TOTAL_WEIGHTS.weight(name) * terms[name] for name in LOSS_TERMS)
    return np.array([terms[name] for name in LOSS_TERMS] + [total])


def check_instance(seed: int, corrupt: Optional[str] = None) -> Dict[str, float]:
    """Relative error per term for the instance drawn from ``seed``."""
    inst = draw_instance(seed)
    n_image = inst.image.parameter_count()

    def values(flat: np.ndarray) -> np.ndarray:
        image = inst.image.with_flat(flat[:n_image])
        caption = inst.caption.with_flat(flat[n_image:])
        breakdown, _, _, _ = _evaluate(inst, image, caption, ALL_TERMS)
        return _term_values(breakdown)

    point = np.concatenate([inst.image.flatten(), inst.caption.flatten()])
    jacobian = finite_diff_jacobian(values, point)
    errors = {}
    for row, term in enumerate(CHECKED_TERMS):
        analytic = _analytic(inst, _term_config(term))
        if term == corrupt:
            analytic = analytic * CORRUPTION_SCALE
        errors[term] = relative_error(analytic, jacobian[row])
    return errors


def run_gradcheck(
    trials: int,
    seed: int = 0,
    corrupt: Optional[str] = None,
    tolerance: float = GRADCHECK_TOLERANCE,
) -> List[GradcheckResult]:
    """Check every term on ``trials`` instances seeded ``seed``, ``seed + 1``, ...

    Args:
        trials: Number of instances, at least 1
        seed: First instance seed
        corrupt: Term whose analytic gradient is scaled (negative control)
        tolerance: Largest accepted relative error

    Returns:
        One GradcheckResult per term with the worst error and its seed
    """
    if trials < 1:
        raise ConfigError("trials", "must be >= 1")
    if seed < 0:
        raise ConfigError("seed", "must be >= 0")
    if corrupt is not None and corrupt not in CHECKED_TERMS:
        raise ConfigError("corrupt", f"must be one of {', '.join(CHECKED_TERMS)}")
    worst = {term: (0.0, seed) for term in CHECKED_TERMS}
    for trial in range(trials):
        instance_seed = seed + trial
        for term, error in check_instance(instance_seed, corrupt).items():
            if error >= worst[term][0]:
                worst[term] = (error, instance_seed)
        TraceLogger.trace("gradcheck_trial", "gradcheck", {"seed": instance_seed})
    results = [
        GradcheckResult(term=term, max_error=err, worst_seed=s, trials=trials, tolerance=tolerance)
        for term, (err, s) in worst.items()
    ]
    failed = [r.term for r in results if not r.passed]
    if failed:
        logger.warning(f"Gradient check failed for {', '.join(failed)}")
    return results
