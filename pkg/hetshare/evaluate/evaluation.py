from typing import Optional, Sequence
from warnings import warn

import numpy as np

from ..graph import HeteroGraph, TaskSpec, TaskTargets
from ..layers import AttentionTrace, GraphBatch, ParameterStore
from ..model import ModelConfig, forward
from .exceptions import UndefinedMetric
from .metrics import auc, average_precision, decode, f1_scores, positive_scores
from .report import MetricsReport, TaskMetrics


def task_metrics(task: TaskSpec, targets: TaskTargets, logits: np.ndarray) -> TaskMetrics:
    """Scores one task's logits against its target labels.

    AUC and AP are computed for two-class single-label tasks; when the
    targets hold a single class they are reported as None with a warning.
    """
    predicted = decode(logits, task)
    micro, macro = f1_scores(predicted, targets.labels, task)
    metrics = TaskMetrics(
        task.name,
        micro,
        macro,
        count=len(targets),
        positives=int(targets.positives(task).sum()),
    )
    if task.is_binary:
        scores = positive_scores(logits)
        for name, metric in (("auc", auc), ("ap", average_precision)):
            try:
                setattr(metrics, name, metric(scores, targets.labels))
            except UndefinedMetric as e:
                warn(f"Task '{task.name}': {e}")
    return metrics


def evaluate(
    graph: HeteroGraph,
    config: ModelConfig,
    params: ParameterStore,
    task_ids: Optional[Sequence[int]] = None,
    trace: Optional[AttentionTrace] = None,
) -> MetricsReport:
    """Runs the model on a graph and scores every task that has targets in it.

    Args:
        graph (HeteroGraph):
            The graph, holding the targets to score (e.g. one split's).
        config (ModelConfig), params (ParameterStore):
            The model.
        task_ids (Sequence[int]):
            Optional; Restricts the report to these tasks.
        trace (AttentionTrace):
            Optional; Filled with the attention weights of the pass.

    Returns:
        A MetricsReport in task order.
    """
    result = forward(GraphBatch(graph, dtype=params.dtype), config, params, trace=trace)
    report = MetricsReport()
    for task, targets, logits in zip(graph.tasks, graph.targets, result.logits):
        if logits is None or (task_ids is not None and task.task_id not in task_ids):
            continue
        report.tasks.append(task_metrics(task, targets, logits.data))
    return report
