"""Full evaluation of a trained state on a train/test split."""
from __future__ import annotations

import numpy as np

from config.run_config import EvalConfig
from encoders.mlp import backbone_features, forward_batch
from errors import EmptyTestSet
from evaluator.probe import linear_probe
from evaluator.retrieval import retrieval_eval
from evaluator.tagging import tagging_miou
from logger import logger
from schemas.records import Dataset, EvaluationReport, TaggingReport
from trainer.state import TrainState


def inter_features(state: TrainState, dataset: Dataset):
    """Image and caption inter features of the samples that have a caption."""
    rows = np.flatnonzero(dataset.has_caption)
    if rows.size == 0:
        raise EmptyTestSet("no test sample has a caption")
    _, image_inter, _ = forward_batch(state.image.query, dataset.images[rows])
    _, caption_inter, _ = forward_batch(state.caption.query, dataset.captions[rows])
    return image_inter, caption_inter


def evaluate_checkpoint(
    state: TrainState,
    train: Dataset,
    test: Dataset,
    cfg: EvalConfig | None = None,
) -> EvaluationReport:
    """Retrieval on inter features, probe and tagging on image backbone features.

    Features come from the query encoders on un-augmented inputs.
    """
    cfg = cfg or state.config.eval
    image_inter, caption_inter = inter_features(state, test)
    retrieval = retrieval_eval(image_inter, caption_inter, cfg.k_list)

    train_backbone = backbone_features(state.image.query, train.images)
    test_backbone = backbone_features(state.image.query, test.images)
    probe = linear_probe(train_backbone, train.class_ids, test_backbone, test.class_ids, cfg.probe)

    if train.has_tags.any() and test.has_tags.any() and cfg.miou_k_list:
        tagging = tagging_miou(
            train_backbone[train.has_tags],
            train.tags[train.has_tags],
            test_backbone[test.has_tags],
            test.tags[test.has_tags],
            cfg.miou_k_list,
            cfg.probe,
        )
    else:
        tagging = TaggingReport(miou_at={}, num_test=0)

    t2i = retrieval["text_to_image"]
    logger.info(
        f"Evaluation: text->image R@1={t2i.r_at.get(1, float('nan')):.2f} med_r={t2i.med_r} "
        f"probe top1={probe.top1:.2f}"
    )
    return EvaluationReport(retrieval=retrieval, probe=probe, tagging=tagging)
