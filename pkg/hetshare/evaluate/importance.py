"""Export of attention weights as structural-pattern importance.

The alpha weights of layer l score the neighbors reached over a relation at
the l-th hop: layer 1 alphas describe 1-hop patterns, layer 2 alphas the
2-hop patterns that pass through them, and so on. Beta weights score whole
relations at a central node. Weights are exported raw; any degree
normalization is left to the analysis.
"""

import csv
from typing import Dict, List

import numpy as np

from ..layers import ALPHA, BETA, AttentionTrace
from .exceptions import EmptyTrace

IMPORTANCE_HEADER = ("task", "layer", "relation", "kind", "weight")
GATES_HEADER = ("task", "layer", "relation", "source_task", "mean_weight", "count")


def export_importance(trace: AttentionTrace, path) -> int:
    """Writes one CSV row per alpha and beta weight of the trace.

    Returns:
        The number of rows written.

    Raises:
        EmptyTrace: The trace holds no alpha or beta weight.
    """
    if len(trace) == 0:
        raise EmptyTrace()
    rows = 0
    with open(path, "w", newline="") as fp:
        writer = csv.writer(fp)
        writer.writerow(IMPORTANCE_HEADER)
        for task, layer, relation, kind, weight in trace.rows((ALPHA, BETA)):
            writer.writerow((task, layer, relation, kind, repr(weight)))
            rows += 1
    return rows


def export_gates(trace: AttentionTrace, path) -> int:
    """Writes the mean gate weight per (task, layer, relation, source task)."""
    summary = trace.gate_summary()
    with open(path, "w", newline="") as fp:
        writer = csv.DictWriter(fp, fieldnames=GATES_HEADER)
        writer.writeheader()
        for row in summary:
            writer.writerow(row)
    return len(summary)


def importance_distribution(trace: AttentionTrace) -> List[Dict]:
    """Pooled summary of the weights per (task, layer, relation, kind)."""
    pooled: Dict[tuple, List[np.ndarray]] = {}
    for record in trace.records:
        if record.kind not in (ALPHA, BETA):
            continue
        key = (record.task, record.layer, record.relation, record.kind)
        pooled.setdefault(key, []).append(record.weights)
    summary = []
    for (task, layer, relation, kind), parts in pooled.items():
        weights = np.concatenate(parts)
        q25, median, q75 = np.quantile(weights, [0.25, 0.5, 0.75])
        summary.append(
            {
                "task": task,
                "layer": layer,
                "relation": relation,
                "kind": kind,
                "count": len(weights),
                "mean": float(weights.mean()),
                "q25": float(q25),
                "median": float(median),
                "q75": float(q75),
            }
        )
    return summary
