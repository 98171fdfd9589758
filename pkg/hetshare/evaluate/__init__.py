""".. include:: ../../docs/templates/evaluate.md"""

from .metrics import decode, f1_scores, auc, average_precision, positive_scores
from .report import MetricsReport, TaskMetrics, METRICS
from .importance import (
    export_importance,
    export_gates,
    importance_distribution,
    IMPORTANCE_HEADER,
    GATES_HEADER,
)
from .evaluation import evaluate, task_metrics
from .exceptions import UndefinedMetric, EmptyTrace
from ..layers import AttentionTrace

__all__ = [
    "decode",
    "f1_scores",
    "auc",
    "average_precision",
    "positive_scores",
    "MetricsReport",
    "TaskMetrics",
    "METRICS",
    "export_importance",
    "export_gates",
    "importance_distribution",
    "IMPORTANCE_HEADER",
    "GATES_HEADER",
    "evaluate",
    "task_metrics",
    "UndefinedMetric",
    "EmptyTrace",
    "AttentionTrace",
]
