from typing import Tuple

import numpy as np

from ..graph import TaskKind, TaskSpec
from .exceptions import UndefinedMetric


def decode(logits: np.ndarray, task: TaskSpec) -> np.ndarray:
    """Turns logits into predicted labels.

    Single-label tasks take the argmax, ties going to the lowest class index.
    Multi-label tasks predict every class whose sigmoid reaches 0.5, i.e. whose
    logit is at least 0.
    """
    logits = np.asarray(logits)
    if logits.ndim != 2 or logits.shape[1] != task.num_classes:
        raise ValueError(
            f"Logits of shape {logits.shape} do not fit task '{task.name}' "
            f"with {task.num_classes} classes."
        )
    if task.kind is TaskKind.MULTI_LABEL:
        return (logits >= 0).astype(np.int64)
    return np.argmax(logits, axis=1).astype(np.int64)


def positive_scores(logits: np.ndarray) -> np.ndarray:
    """Ranking scores of class 1 for a two-class task.

    The logit margin `logits[:, 1] - logits[:, 0]` orders targets exactly as the
    class-1 probability does, without the probability saturating to 1.0 on
    confident predictions.
    """
    logits = np.asarray(logits, dtype=np.float64)
    return logits[:, 1] - logits[:, 0]


def _indicators(labels: np.ndarray, task: TaskSpec) -> np.ndarray:
    labels = np.asarray(labels, dtype=np.int64)
    if task.kind is TaskKind.MULTI_LABEL:
        return labels.reshape(-1, task.num_classes).astype(bool)
    return np.eye(task.num_classes, dtype=bool)[labels.reshape(-1)]


def f1_scores(predicted, actual, task: TaskSpec) -> Tuple[float, float]:
    """Micro and macro F1 of a task's predictions.

    Micro F1 pools true positives, false positives and false negatives over
    all classes; macro F1 is the unweighted mean of the per-class F1 scores.
    A class that is never predicted nor present scores 0.

    Returns:
        The pair `(micro_f1, macro_f1)`.
    """
    predicted = _indicators(predicted, task)
    actual = _indicators(actual, task)
    if predicted.shape != actual.shape:
        raise ValueError(f"{len(predicted)} predictions for {len(actual)} labels.")
    tp = (predicted & actual).sum(axis=0).astype(np.float64)
    fp = (predicted & ~actual).sum(axis=0).astype(np.float64)
    fn = (~predicted & actual).sum(axis=0).astype(np.float64)

    denominator = 2 * tp.sum() + fp.sum() + fn.sum()
    micro = 2 * tp.sum() / denominator if denominator else 0.0
    per_class = np.divide(2 * tp, 2 * tp + fp + fn, out=np.zeros_like(tp), where=(tp + fp + fn) > 0)
    return float(micro), float(per_class.mean())


def _binary(scores, labels) -> Tuple[np.ndarray, np.ndarray]:
    scores = np.asarray(scores, dtype=np.float64).reshape(-1)
    labels = np.asarray(labels).reshape(-1)
    if len(scores) != len(labels):
        raise ValueError(f"{len(scores)} scores for {len(labels)} labels.")
    return scores, labels.astype(bool)


def auc(scores, labels) -> float:
    """Area under the ROC curve as the Mann-Whitney statistic.

    The fraction of (positive, negative) pairs whose positive scores higher,
    ties counting one half; computed from tie-averaged ranks.

    Raises:
        UndefinedMetric: Only one class is present.
    """
    scores, labels = _binary(scores, labels)
    positives = int(labels.sum())
    negatives = len(labels) - positives
    if positives == 0 or negatives == 0:
        raise UndefinedMetric("AUC", "both classes must be present")
    _, inverse, counts = np.unique(scores, return_inverse=True, return_counts=True)
    upper = np.cumsum(counts)
    average_rank = upper - (counts - 1) / 2.0
    ranks = average_rank[inverse.reshape(-1)]
    rank_sum = ranks[labels].sum()
    return float((rank_sum - positives * (positives + 1) / 2.0) / (positives * negatives))


def average_precision(scores, labels) -> float:
    """Step-interpolated average precision, `sum_n (R_n - R_{n-1}) P_n`.

    Thresholds sweep the distinct scores in descending order, so tied scores
    enter together.

    Raises:
        UndefinedMetric: No positive label.
    """
    scores, labels = _binary(scores, labels)
    positives = int(labels.sum())
    if positives == 0:
        raise UndefinedMetric("AP", "at least one positive is required")
    order = np.argsort(-scores, kind="mergesort")
    sorted_scores, sorted_labels = scores[order], labels[order]
    tp = np.cumsum(sorted_labels)
    seen = np.arange(1, len(scores) + 1)
    # last position of every block of tied scores
    ends = np.r_[np.flatnonzero(np.diff(sorted_scores)), len(scores) - 1]
    precision = tp[ends] / seen[ends]
    recall = tp[ends] / positives
    steps = np.diff(np.r_[0.0, recall])
    return float((steps * precision).sum())
