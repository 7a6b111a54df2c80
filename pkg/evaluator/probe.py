"""Linear probes on frozen features.

Both probes standardize features with training statistics and fit a
single affine layer by full-batch gradient descent, stopping when the
largest gradient entry drops below ``tolerance``.
"""
from __future__ import annotations

from typing import Tuple

import numpy as np
from scipy.special import expit, log_softmax, softmax

from config.run_config import ProbeConfig
from errors import DegenerateLabels, DimensionMismatch, EmptyTestSet
from logger import TraceLogger
from schemas.records import ProbeReport


def standardize(train: np.ndarray, test: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    mean = train.mean(axis=0)
    std = train.std(axis=0)
    std = np.where(std > 1e-12, std, 1.0)
    return (train - mean) / std, (test - mean) / std


def fit_softmax(x: np.ndarray, labels: np.ndarray, num_classes: int, cfg: ProbeConfig):
    """Multinomial logistic regression; returns ``(W, b, iterations)``."""
    n, d = x.shape
    weight = np.zeros((d, num_classes))
    bias = np.zeros(num_classes)
    onehot = np.eye(num_classes)[labels]
    it = 0
    for it in range(1, cfg.max_iters + 1):
        probs = softmax(x @ weight + bias, axis=1)
        delta = (probs - onehot) / n
        grad_w = x.T @ delta + cfg.l2 * weight
        grad_b = delta.sum(axis=0)
        weight -= cfg.learning_rate * grad_w
        bias -= cfg.learning_rate * grad_b
        if max(np.abs(grad_w).max(initial=0.0), np.abs(grad_b).max()) < cfg.tolerance:
            break
    return weight, bias, it


def fit_one_vs_all(x: np.ndarray, targets: np.ndarray, cfg: ProbeConfig):
    """Independent logistic regressions per column of ``targets``."""
    n, d = x.shape
    weight = np.zeros((d, targets.shape[1]))
    bias = np.zeros(targets.shape[1])
    it = 0
    for it in range(1, cfg.max_iters + 1):
        delta = (expit(x @ weight + bias) - targets) / n
        grad_w = x.T @ delta + cfg.l2 * weight
        grad_b = delta.sum(axis=0)
        weight -= cfg.learning_rate * grad_w
        bias -= cfg.learning_rate * grad_b
        if max(np.abs(grad_w).max(initial=0.0), np.abs(grad_b).max(initial=0.0)) < cfg.tolerance:
            break
    return weight, bias, it


def softmax_loss(x: np.ndarray, labels: np.ndarray, weight: np.ndarray, bias: np.ndarray) -> float:
    return float(-log_softmax(x @ weight + bias, axis=1)[np.arange(len(labels)), labels].mean())


def linear_probe(
    train_feats: np.ndarray,
    train_labels: np.ndarray,
    test_feats: np.ndarray,
    test_labels: np.ndarray,
    cfg: ProbeConfig,
) -> ProbeReport:
    """Top-1 accuracy (percent) of a softmax classifier on frozen features.

    Raises:
        DegenerateLabels: a class seen in either split has no training sample
        EmptyTestSet: no test samples
    """
    train_feats = np.asarray(train_feats, dtype=np.float64)
    test_feats = np.asarray(test_feats, dtype=np.float64)
    train_labels = np.asarray(train_labels, dtype=np.int64)
    test_labels = np.asarray(test_labels, dtype=np.int64)
    if len(test_labels) == 0:
        raise EmptyTestSet("linear probe needs test samples")
    if train_feats.shape[0] != len(train_labels) or test_feats.shape[0] != len(test_labels):
        raise DimensionMismatch("feature rows and labels differ in count")
    num_classes = int(max(train_labels.max(initial=-1), test_labels.max())) + 1
    missing = np.setdiff1d(np.arange(num_classes), train_labels)
    if missing.size:
        raise DegenerateLabels(f"classes {missing.tolist()} have no training samples")

    x_train, x_test = standardize(train_feats, test_feats)
    weight, bias, iterations = fit_softmax(x_train, train_labels, num_classes, cfg)
    predictions = np.argmax(x_test @ weight + bias, axis=1)
    TraceLogger.trace(
        "linear_probe",
        "evaluator",
        {"iterations": iterations, "train_loss": softmax_loss(x_train, train_labels, weight, bias)},
    )
    return ProbeReport(
        top1=100.0 * float(np.mean(predictions == test_labels)),
        num_train=len(train_labels),
        num_test=len(test_labels),
        iterations=iterations,
    )
