from enum import Enum
from typing import List, Sequence, Tuple

import numpy as np

from .exceptions import SplitError
from .hetero_graph import HeteroGraph, TaskTargets


class Split(Enum):
    TRAIN = 0
    VAL = 1
    TEST = 2

    @classmethod
    def parse(cls, name) -> "Split":
        if isinstance(name, Split):
            return name
        try:
            return cls[str(name).upper()]
        except KeyError:
            raise ValueError(f"Unknown split '{name}', expected train, val or test.")


class SplitAssignment:
    """Per-task assignment of every labeled target to train, val or test.

    Attributes:
        codes (List[np.ndarray]):
            One array per task, aligned with that task's target entries,
            holding the `Split` value of every target.
        seed (int):
            The seed the assignment was drawn with.
    """

    def __init__(self, codes: Sequence[np.ndarray], seed: int = 0):
        self.codes = [np.asarray(c, dtype=np.int64) for c in codes]
        self.seed = seed

    def __eq__(self, other):
        if not isinstance(other, SplitAssignment):
            return False
        return len(self.codes) == len(other.codes) and all(
            np.array_equal(a, b) for a, b in zip(self.codes, other.codes)
        )

    def indices(self, task_id: int, split) -> np.ndarray:
        """Target entry indices of one task in one split, ascending."""
        return np.flatnonzero(self.codes[task_id] == Split.parse(split).value)

    def sizes(self, task_id: int) -> Tuple[int, int, int]:
        counts = np.bincount(self.codes[task_id], minlength=3)
        return int(counts[0]), int(counts[1]), int(counts[2])

    def targets(self, graph: HeteroGraph, task_id: int, split) -> TaskTargets:
        return graph.targets[task_id].subset(self.indices(task_id, split))

    def apply(self, graph: HeteroGraph, split) -> HeteroGraph:
        """The graph holding only the targets of one split, for every task."""
        return graph.with_targets(
            [self.targets(graph, t, split) for t in range(len(graph.tasks))]
        )

    def select_tasks(self, task_ids: Sequence[int]) -> "SplitAssignment":
        return SplitAssignment([self.codes[t] for t in task_ids], self.seed)


def _split_sizes(n: int, ratios: Tuple[float, float, float]) -> Tuple[int, int, int]:
    # rounding first keeps 0.29 * 100 from flooring to 28
    val = max(1, int(np.floor(round(n * ratios[1], 9))))
    test = max(1, int(np.floor(round(n * ratios[2], 9))))
    train = n - val - test
    while train < 1:
        if val >= test:
            val -= 1
        else:
            test -= 1
        train += 1
    return train, val, test


def split_targets(
    graph: HeteroGraph, ratios: Sequence[float] = (0.6, 0.2, 0.2), seed: int = 0
) -> SplitAssignment:
    """Randomly splits every task's labeled targets into train, val and test.

    Val and test sizes are floored (at least one each), the remainder goes to
    train. The permutation of a task depends only on `seed` and the task id.

    Args:
        graph (HeteroGraph):
            The graph whose targets are split.
        ratios (Sequence[float]):
            Optional; The (train, val, test) fractions. Defaults to 6:2:2.
        seed (int):
            Optional; The random seed.

    Returns:
        A SplitAssignment.

    Raises:
        SplitError: Invalid ratios, or a task with fewer than 3 labeled targets.
    """
    ratios = tuple(float(r) for r in ratios)
    if len(ratios) != 3 or any(r <= 0 for r in ratios):
        raise SplitError(f"ratios must be three positive fractions, got {ratios}")
    if abs(sum(ratios) - 1.0) > 1e-9:
        raise SplitError(f"ratios must sum to 1, got {sum(ratios)}")

    codes: List[np.ndarray] = []
    for task, targets in zip(graph.tasks, graph.targets):
        n = len(targets)
        if n < 3:
            raise SplitError(f"task '{task.name}' has only {n} labeled targets, 3 required")
        train, val, _ = _split_sizes(n, ratios)
        order = np.random.default_rng([seed, task.task_id]).permutation(n)
        task_codes = np.full(n, Split.TEST.value, dtype=np.int64)
        task_codes[order[:train]] = Split.TRAIN.value
        task_codes[order[train : train + val]] = Split.VAL.value
        codes.append(task_codes)
    return SplitAssignment(codes, seed)
