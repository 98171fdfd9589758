import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Tuple

import numpy as np

from ..graph import (
    EdgeSet,
    HeteroGraph,
    NodeType,
    RelationSchema,
    TaskKind,
    TaskSpec,
    TaskTargets,
    write_graph,
)
from ..utils import ComplexEncoder
from .config import NEIGHBOR_TYPES, RELATIONS, TARGET_TYPE, SynthConfig

logger = logging.getLogger(__name__)

GROUND_TRUTH_FILE = "ground_truth.json"


@dataclass
class GroundTruth:
    """How the labels of a synthetic graph were planted.

    Attributes:
        directions (Dict[str, np.ndarray]):
            The unit direction every relation's neighbor mean is projected on.
        thresholds (List[float]):
            Per task, the score above which a target is positive.
        projections (Dict[str, np.ndarray]):
            Per relation, the projected neighbor mean of every target.
        scores (np.ndarray):
            `targets x tasks` noisy scores.
    """

    config: SynthConfig
    directions: Dict[str, np.ndarray]
    thresholds: List[float]
    projections: Dict[str, np.ndarray]
    scores: np.ndarray

    def _serialize(self) -> Dict:
        return {
            "config": self.config._serialize(),
            "directions": {r: d.tolist() for r, d in self.directions.items()},
            "thresholds": self.thresholds,
            "signal_plan": self.config.signal_plan,
        }


def _task_name(task: int) -> str:
    return f"task{task + 1}"


def generate(config: SynthConfig) -> Tuple[HeteroGraph, GroundTruth]:
    """Builds a synthetic graph whose task labels depend on chosen relations.

    Neighbor features and relation directions are drawn from a standard
    normal distribution. Task t scores every target by
    `sum_r w_r <mean neighbor feature over r, u_r> + noise` and labels it
    positive when the score exceeds the `1 - positive_rate` quantile of the
    noise-free scores. Target features are pure noise.

    Returns:
        The graph and its ground truth.

    Raises:
        InvalidSignalPlan: A plan is invalid.
    """
    config.validate()
    rng = np.random.default_rng(config.seed)
    n, k, dim = config.num_targets, config.neighbors_per_relation, config.feature_dim

    node_types = [NodeType(0, TARGET_TYPE, dim, n)] + [
        NodeType(i + 1, name, dim, config.pool_size) for i, name in enumerate(NEIGHBOR_TYPES)
    ]
    type_ids = {t.name: t.type_id for t in node_types}
    node_features = [rng.standard_normal((t.node_count, dim)) for t in node_types]

    relations, edges = [], []
    directions, projections = {}, {}
    for edge_type_id, (name, src_name) in enumerate(RELATIONS.items()):
        src_type = type_ids[src_name]
        relations.append(RelationSchema(edge_type_id, name, src_type, 0))
        neighbors = np.stack(
            [rng.choice(config.pool_size, size=k, replace=False) for _ in range(n)]
        )
        edges.append(EdgeSet(neighbors.reshape(-1), np.repeat(np.arange(n), k)).canonical())
        direction = rng.standard_normal(dim)
        directions[name] = direction / np.linalg.norm(direction)
        means = node_features[src_type][neighbors].mean(axis=1)
        projections[name] = means @ directions[name]

    tasks, targets, thresholds = [], [], []
    scores = np.zeros((n, config.num_tasks))
    for t, plan in enumerate(config.signal_plan):
        clean = sum(weight * projections[r] for r, weight in plan.items())
        threshold = float(np.quantile(clean, 1 - config.positive_rate[t]))
        scores[:, t] = clean + config.noise_std * rng.standard_normal(n)
        labels = (scores[:, t] > threshold).astype(np.int64)
        labeled = np.sort(
            rng.choice(n, size=max(3, int(round(n * config.label_fraction[t]))), replace=False)
        )
        tasks.append(TaskSpec(t, _task_name(t), 0, TaskKind.SINGLE_LABEL, 2))
        targets.append(TaskTargets(labeled, labels[labeled], np.zeros(len(labeled))))
        thresholds.append(threshold)
        logger.debug(
            "task %d: %d labeled targets, %d positive",
            t,
            len(labeled),
            int(labels[labeled].sum()),
        )

    graph = HeteroGraph(node_types, node_features, relations, edges, tasks, targets)
    return graph, GroundTruth(config, directions, thresholds, projections, scores)


def write_synthetic(graph: HeteroGraph, truth: GroundTruth, root_path) -> Path:
    """Writes the graph directory plus its `ground_truth.json`."""
    root = Path(root_path)
    write_graph(graph, root)
    with open(root / GROUND_TRUTH_FILE, "w") as fp:
        json.dump(truth._serialize(), fp, cls=ComplexEncoder, indent=2)
    return root
