import logging
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Tuple

from rich.table import Table

from ..graph import HeteroGraph, SplitAssignment
from ..model import ModelConfig
from ..utils import map_cells
from .config import TrainConfig
from .trainer import Scorer, TrainResult, train

logger = logging.getLogger(__name__)


@dataclass
class GridCell:
    learning_rate: float
    weight_decay: float
    score: float
    best_epoch: int
    stop_epoch: int


@dataclass
class GridResult:
    """Outcome of a grid search.

    Attributes:
        best (TrainResult):
            The run of the selected cell.
        cells (List[GridCell]):
            Every cell, in grid order (learning rates outer, weight decays inner).
    """

    best: TrainResult
    cells: List[GridCell]

    @property
    def learning_rate(self) -> float:
        return self.best.learning_rate

    @property
    def weight_decay(self) -> float:
        return self.best.weight_decay

    def table(self) -> Table:
        table = Table(title="Grid search")
        table.add_column("lr", justify="right")
        table.add_column("wd", justify="right")
        table.add_column("score", justify="right")
        table.add_column("best epoch", justify="right")
        table.add_column("stop epoch", justify="right")
        for cell in self.cells:
            selected = (cell.learning_rate, cell.weight_decay) == (
                self.learning_rate,
                self.weight_decay,
            )
            table.add_row(
                f"{cell.learning_rate:g}",
                f"{cell.weight_decay:g}",
                f"{cell.score:.4f}",
                str(cell.best_epoch),
                str(cell.stop_epoch),
                style="bold" if selected else None,
            )
        return table


def select_cell(cells: List[GridCell]) -> int:
    """Index of the best-scoring cell; ties go to the smaller lr, then the smaller wd."""
    return min(
        range(len(cells)),
        key=lambda i: (-cells[i].score, cells[i].learning_rate, cells[i].weight_decay),
    )


def grid_search(
    graph: HeteroGraph,
    split: SplitAssignment,
    model_config: ModelConfig,
    train_config: TrainConfig,
    scorer: Optional[Scorer] = None,
    log_dir=None,
    workers: Optional[int] = None,
) -> GridResult:
    """Trains one model per (learning rate, weight decay) cell and keeps the best.

    Cells are independent and run on `workers` threads (default from
    `HETSHARE_THREADS`); every cell logs to its own file under `log_dir`.

    Returns:
        The GridResult; `best` holds the selected cell's parameters.
    """
    train_config.validate()
    grid: List[Tuple[float, float]] = [
        (lr, wd) for lr in train_config.lr_grid for wd in train_config.wd_grid
    ]

    def run(cell: Tuple[float, float]) -> TrainResult:
        lr, wd = cell
        log_path = None
        if log_dir is not None:
            log_path = Path(log_dir) / f"train_lr{lr:g}_wd{wd:g}.jsonl"
        logger.info("grid cell lr=%g wd=%g", lr, wd)
        return train(graph, split, model_config, train_config, lr, wd, scorer, log_path)

    results = map_cells(run, grid, workers)
    cells = [
        GridCell(
            r.learning_rate,
            r.weight_decay,
            r.best_score if r.best_score is not None else float("-inf"),
            r.best_epoch,
            r.stop_epoch,
        )
        for r in results
    ]
    chosen = select_cell(cells)
    logger.info(
        "selected lr=%g wd=%g (score %.4f)",
        cells[chosen].learning_rate,
        cells[chosen].weight_decay,
        cells[chosen].score,
    )
    return GridResult(results[chosen], cells)
