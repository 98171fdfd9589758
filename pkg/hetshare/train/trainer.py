import json
import logging
import time
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional

import numpy as np

from ..autodiff import Adam, AdamState, OptimizerError
from ..evaluate import MetricsReport, evaluate
from ..graph import (
    GraphSchema,
    HeteroGraph,
    Split,
    SplitAssignment,
    SplitError,
    neighborhood_subgraph,
    resolve_budgets,
    sample_subgraph,
)
from ..layers import GraphBatch, ParameterStore
from ..model import ModelConfig, build_variant, forward, loss
from ..utils import ComplexEncoder, progress
from .config import TrainConfig
from .early_stopping import EarlyStopping
from .exceptions import TrainingAborted

logger = logging.getLogger(__name__)

VALIDATION_BUDGET_FACTOR = 4


@dataclass
class TrainState:
    """Progress of a training run after its latest epoch.

    Attributes:
        epoch (int):
            The last completed epoch.
        best_val_score (float | None):
            The best validation score so far.
        best_epoch (int):
            The epoch that reached it.
        epochs_since_best (int):
            `epoch - best_epoch`.
        optimizer (AdamState):
            The optimizer moments.
        seed (int):
            The sampling seed; epoch `e` draws its batches from `(seed, e)`.
    """

    epoch: int = 0
    best_val_score: Optional[float] = None
    best_epoch: int = 0
    epochs_since_best: int = 0
    optimizer: AdamState = field(default_factory=AdamState)
    seed: int = 0


@dataclass
class TrainResult:
    """Outcome of one training run.

    Attributes:
        params (ParameterStore):
            The parameters of the best epoch.
        log (List[Dict]):
            One record per epoch.
        state (TrainState):
            The final state; `state.epoch` is the stop epoch.
        learning_rate (float), weight_decay (float):
            The hyperparameters of the run.
    """

    params: ParameterStore
    log: List[Dict]
    state: TrainState
    learning_rate: float
    weight_decay: float

    @property
    def best_epoch(self) -> int:
        return self.state.best_epoch

    @property
    def best_score(self) -> Optional[float]:
        return self.state.best_val_score

    @property
    def stop_epoch(self) -> int:
        return self.state.epoch


Scorer = Callable[["Trainer", int], float]


class Trainer:
    """Trains one model for one (learning rate, weight decay) pair.

    Every epoch takes a single optimizer step on the summed loss of all
    tasks. In sampled mode, each task contributes a freshly sampled subgraph
    around a batch of its train targets; otherwise the whole graph with all
    train targets is used. The model is scored on the validation targets
    after every epoch and the best epoch's parameters are kept.

    Example:
        >>> trainer = Trainer(graph, split, model_config, train_config, 1e-2, 0.0)
        >>> result = trainer.fit()
        >>> result.best_epoch
        17
    """

    def __init__(
        self,
        graph: HeteroGraph,
        split: SplitAssignment,
        model_config: ModelConfig,
        train_config: TrainConfig,
        learning_rate: float = None,
        weight_decay: float = None,
        scorer: Optional[Scorer] = None,
        log_path=None,
        show_progress: bool = False,
    ):
        self.graph = graph
        self.split = split
        self.model_config = model_config
        self.train_config = train_config.validate()
        self.schema = GraphSchema.from_graph(graph)
        model_config.validate(self.schema)
        self.learning_rate = train_config.lr_grid[0] if learning_rate is None else learning_rate
        self.weight_decay = train_config.wd_grid[0] if weight_decay is None else weight_decay
        self.scorer = scorer or Trainer.validation_score
        self.log_path = log_path
        self.show_progress = show_progress
        self.last_report: Optional[MetricsReport] = None

        if scorer is None:
            for task in graph.tasks:
                if not len(split.indices(task.task_id, Split.VAL)):
                    raise SplitError(f"task '{task.name}' has no validation targets")

        self.params = build_variant(model_config, self.schema, dtype=train_config.dtype)
        self.optimizer = Adam(self.params, self.learning_rate, self.weight_decay)
        self.train_graph = split.apply(graph, Split.TRAIN)
        self._train_batch = None if train_config.sampled else GraphBatch(
            self.train_graph, dtype=train_config.dtype
        )
        self._val_graph = None

    def val_graph(self) -> HeteroGraph:
        """The validation targets, with their neighborhoods capped at 4x the hop budgets."""
        if self._val_graph is None:
            val = self.split.apply(self.graph, Split.VAL)
            if self.train_config.sampled:
                budgets = resolve_budgets(self.graph, self.train_config.hop_budgets)
                val = neighborhood_subgraph(
                    self.graph,
                    val.targets,
                    (budgets * VALIDATION_BUDGET_FACTOR).tolist(),
                    self.train_config.seed,
                )
            self._val_graph = val
        return self._val_graph

    @staticmethod
    def validation_score(trainer: "Trainer", epoch: int) -> float:
        report = evaluate(trainer.val_graph(), trainer.model_config, trainer.params)
        trainer.last_report = report
        config = trainer.train_config
        return report.score(config.eval_metric, config.selection_task)

    def epoch_seed(self, epoch: int) -> int:
        return int(np.random.default_rng([self.train_config.seed, epoch]).integers(2**31))

    def batches(self, epoch: int):
        """The graphs the loss of an epoch is computed on."""
        if not self.train_config.sampled:
            yield self._train_batch
            return
        config = self.train_config
        seed = self.epoch_seed(epoch)
        for task in self.graph.tasks:
            sub = sample_subgraph(
                self.graph,
                task.task_id,
                self.split,
                config.batch_targets,
                config.pos_ratio,
                config.hop_budgets,
                seed,
            )
            yield GraphBatch(sub, dtype=config.dtype)

    def step(self, epoch: int) -> float:
        """One optimizer step; returns the summed training loss."""
        self.params.zero_grad()
        total = 0.0
        for batch in self.batches(epoch):
            result = forward(batch, self.model_config, self.params)
            value = loss(
                result.logits,
                batch.graph.targets,
                batch.graph.tasks,
                self.model_config.task_weights,
            )
            if not np.isfinite(value.data).all():
                raise TrainingAborted(epoch, self.learning_rate, "the training loss is not finite")
            if value.requires_grad:
                value.backward()
            total += value.item()
        try:
            self.optimizer.step()
        except OptimizerError as e:
            raise TrainingAborted(epoch, self.learning_rate, str(e))
        return total

    def fit(self) -> TrainResult:
        config = self.train_config
        stopper = EarlyStopping(config.patience)
        state = TrainState(seed=config.seed)
        best = self.params.snapshot()
        log: List[Dict] = []
        log_file = open(self.log_path, "w") if self.log_path is not None else None
        try:
            epochs = range(1, config.max_epochs + 1)
            for epoch in progress(epochs, enabled=self.show_progress, description="Training"):
                start = time.perf_counter()
                train_loss = self.step(epoch)
                score = float(self.scorer(self, epoch))
                if stopper.update(epoch, score):
                    best = self.params.snapshot()
                record = {
                    "epoch": epoch,
                    "train_loss": train_loss,
                    "val_score": score,
                    "val": self.last_report._serialize()["tasks"] if self.last_report else [],
                    "lr": self.learning_rate,
                    "wd": self.weight_decay,
                    "seconds": time.perf_counter() - start,
                }
                log.append(record)
                if log_file is not None:
                    log_file.write(json.dumps(record, cls=ComplexEncoder) + "\n")
                logger.info(
                    "epoch %d: loss %.4f, val %s %.4f (best %.4f at %d)",
                    epoch,
                    train_loss,
                    config.eval_metric,
                    score,
                    stopper.best_score if stopper.best_score is not None else float("nan"),
                    stopper.best_epoch,
                )
                if stopper.should_stop:
                    break
        finally:
            if log_file is not None:
                log_file.close()

        state.epoch = stopper.epoch
        state.best_val_score = stopper.best_score
        state.best_epoch = stopper.best_epoch
        state.epochs_since_best = stopper.epochs_since_best
        state.optimizer = self.optimizer.state
        self.params.restore(best)
        return TrainResult(self.params, log, state, self.learning_rate, self.weight_decay)


def train(
    graph: HeteroGraph,
    split: SplitAssignment,
    model_config: ModelConfig,
    train_config: TrainConfig,
    learning_rate: float = None,
    weight_decay: float = None,
    scorer: Optional[Scorer] = None,
    log_path=None,
    show_progress: bool = False,
) -> TrainResult:
    """Trains a model with early stopping on the validation split.

    Args:
        graph (HeteroGraph):
            The full graph with the targets of every split.
        split (SplitAssignment):
            The train/val/test assignment of the targets.
        model_config (ModelConfig), train_config (TrainConfig):
            The model and the protocol.
        learning_rate (float), weight_decay (float):
            Optional; Default to the first entries of the config's grids.
        scorer (Callable[[Trainer, int], float]):
            Optional; Replaces the validation score of every epoch.
        log_path:
            Optional; Receives the epoch records as JSON lines.

    Returns:
        A TrainResult holding the parameters of the best epoch.

    Raises:
        TrainingAborted: A non-finite loss or gradient.
    """
    trainer = Trainer(
        graph,
        split,
        model_config,
        train_config,
        learning_rate,
        weight_decay,
        scorer,
        log_path,
        show_progress,
    )
    return trainer.fit()
