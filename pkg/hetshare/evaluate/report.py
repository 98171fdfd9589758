from __future__ import annotations

from dataclasses import asdict, dataclass
from json import dumps, loads
from typing import Dict, List, Optional, Union

from rich.console import Console
from rich.table import Table

from ..utils import ComplexEncoder

METRICS = ("micro_f1", "macro_f1", "auc", "ap")


@dataclass
class TaskMetrics:
    """Metrics of one task over one target set.

    `auc` and `ap` are only defined for two-class single-label tasks whose
    targets hold both classes; they are None otherwise.
    """

    task: str
    micro_f1: float
    macro_f1: float
    auc: Optional[float] = None
    ap: Optional[float] = None
    count: int = 0
    positives: int = 0

    def value(self, metric: str) -> Optional[float]:
        if metric not in METRICS:
            raise ValueError(f"Unknown metric '{metric}', expected one of {', '.join(METRICS)}.")
        return getattr(self, metric)


class MetricsReport:
    """Per-task metrics of a model on one split.

    Example:
        >>> report = evaluate(graph, config, params)
        >>> report["venue"].macro_f1
        0.41
        >>> report.score("macro_f1", "mean")
        0.53
    """

    def __init__(self, tasks: List[TaskMetrics] = None):
        self.tasks: List[TaskMetrics] = list(tasks or [])

    def __len__(self):
        return len(self.tasks)

    def __iter__(self):
        return iter(self.tasks)

    def __getitem__(self, key: Union[int, str]) -> TaskMetrics:
        if isinstance(key, int):
            return self.tasks[key]
        for metrics in self.tasks:
            if metrics.task == key:
                return metrics
        raise KeyError(key)

    def __eq__(self, other):
        return isinstance(other, MetricsReport) and self.tasks == other.tasks

    def score(self, metric: str, selection: Union[int, str] = "mean") -> float:
        """The model-selection score: one task's metric or the mean over tasks.

        An undefined metric counts as 0.

        Args:
            metric (str):
                One of `micro_f1`, `macro_f1`, `auc` and `ap`.
            selection (int | str):
                A task position or name, or `mean`.
        """
        if selection == "mean":
            values = [m.value(metric) for m in self.tasks]
            if not values:
                return 0.0
            return sum(v or 0.0 for v in values) / len(values)
        return self[selection].value(metric) or 0.0

    def _serialize(self) -> Dict:
        return {"tasks": [asdict(m) for m in self.tasks]}

    def serialize(self, filepath: str = None) -> str:
        serial = dumps(self._serialize(), cls=ComplexEncoder, indent=2)
        if filepath is not None:
            with open(filepath, "w") as fp:
                fp.write(serial)
        return serial

    @classmethod
    def deserialize(cls, string: str) -> MetricsReport:
        return cls([TaskMetrics(**m) for m in loads(string)["tasks"]])

    def table(self, title: str = "Metrics") -> Table:
        table = Table(title=title)
        table.add_column("Task")
        for metric in METRICS:
            table.add_column(metric, justify="right")
        table.add_column("targets", justify="right")
        table.add_column("positives", justify="right")
        for m in self.tasks:
            cells = ["-" if m.value(k) is None else f"{m.value(k):.4f}" for k in METRICS]
            table.add_row(m.task, *cells, str(m.count), str(m.positives))
        return table

    def print(self, console: Console = None, title: str = "Metrics"):
        console = console or Console()
        console.print(self.table(title))
