from dataclasses import dataclass
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np

ALPHA = "alpha"
BETA = "beta"
GATE = "gate"


@dataclass
class TraceRecord:
    """Attention weights of one (task, layer, relation) computed in one forward pass.

    Attributes:
        kind (str):
            `alpha` (one row per edge, grouped by central node), `beta` (one row
            per present relation of a central node) or `gate` (one row per
            central node and source task).
        task (str):
            The task whose backbone computed the weights.
        layer (int):
            The layer, counted from 1; 0 marks a gate after the last layer.
        relation (str):
            The relation name; `*` when the weights are not relation-specific.
        centers (np.ndarray):
            The central node of every row, local to the batch.
        weights (np.ndarray):
            The weight of every row.
        sources (np.ndarray | None):
            The neighbor (alpha) or source task index (gate) of every row.
    """

    kind: str
    task: str
    layer: int
    relation: str
    centers: np.ndarray
    weights: np.ndarray
    sources: Optional[np.ndarray] = None

    def __len__(self):
        return len(self.weights)

    def group_sums(self) -> np.ndarray:
        """Sum of the weights per central node present in the record."""
        _, inverse = np.unique(self.centers, return_inverse=True)
        return np.bincount(inverse.reshape(-1), weights=self.weights)


class AttentionTrace:
    """All attention and gate weights of a forward pass.

    Recording is opt-in: the forward pass only fills a trace it is given.
    """

    def __init__(self):
        self.records: List[TraceRecord] = []

    def __len__(self):
        """Number of importance rows (alpha and beta)."""
        return sum(len(r) for r in self.records if r.kind in (ALPHA, BETA))

    def __bool__(self):
        return True

    def add(
        self,
        kind: str,
        task: str,
        layer: int,
        relation: str,
        centers: np.ndarray,
        weights: np.ndarray,
        sources: Optional[np.ndarray] = None,
    ):
        self.records.append(
            TraceRecord(
                kind,
                task,
                layer,
                relation,
                np.asarray(centers, dtype=np.int64).reshape(-1),
                np.asarray(weights, dtype=np.float64).reshape(-1),
                None if sources is None else np.asarray(sources, dtype=np.int64).reshape(-1),
            )
        )

    def of_kind(self, kind: str) -> List[TraceRecord]:
        return [r for r in self.records if r.kind == kind]

    def rows(
        self, kinds: Sequence[str] = (ALPHA, BETA)
    ) -> Iterator[Tuple[str, int, str, str, float]]:
        """Yields `(task, layer, relation, kind, weight)` rows in recording order."""
        for record in self.records:
            if record.kind not in kinds:
                continue
            for weight in record.weights:
                yield record.task, record.layer, record.relation, record.kind, float(weight)

    def gate_summary(self) -> List[Dict]:
        """Mean gate weight per (task, layer, relation, source task)."""
        totals: Dict[Tuple[str, int, str, int], List[float]] = {}
        for record in self.of_kind(GATE):
            for source in np.unique(record.sources):
                key = (record.task, record.layer, record.relation, int(source))
                chosen = record.weights[record.sources == source]
                bucket = totals.setdefault(key, [0.0, 0])
                bucket[0] += float(chosen.sum())
                bucket[1] += len(chosen)
        return [
            {
                "task": task,
                "layer": layer,
                "relation": relation,
                "source_task": source,
                "mean_weight": total / count,
                "count": count,
            }
            for (task, layer, relation, source), (total, count) in totals.items()
        ]
