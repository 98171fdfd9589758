import csv
import json
import logging
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from rich.table import Table

from ..evaluate import evaluate
from ..graph import HeteroGraph, Split, SplitAssignment, split_targets
from ..model import ConfigError, ModelConfig, Variant, complexity_estimate
from ..train import TrainConfig, Trainer, grid_search
from ..utils import ComplexEncoder, map_cells
from .config import SynthConfig
from .generator import generate

logger = logging.getLogger(__name__)

RESULT_COLUMNS = ("variant", "task", "seed", "micro_f1", "macro_f1", "auc", "ap")
TIMING_COLUMNS = ("variant", "epoch", "seconds", "parameters", "estimated_cost")
MIN_SEEDS = 3


def variant_config(base: ModelConfig, variant: Variant, num_tasks: int) -> ModelConfig:
    """The base config turned into a variant for a graph with `num_tasks` tasks.

    `stl` configs always model a single task.
    """
    variant = Variant.parse(variant)
    return base.with_changes(variant=variant, num_tasks=1 if variant is Variant.STL else num_tasks)


def score_variant(
    graph: HeteroGraph,
    split: SplitAssignment,
    variant: Variant,
    model_config: ModelConfig,
    train_config: TrainConfig,
    seed: int,
) -> List[Dict]:
    """Trains a variant (one model per task for `stl`) and scores it on the test targets."""
    if variant is Variant.STL:
        runs = [(graph.select_tasks([t]), split.select_tasks([t])) for t in range(len(graph.tasks))]
    else:
        runs = [(graph, split)]
    rows = []
    for sub_graph, sub_split in runs:
        config = variant_config(model_config, variant, len(sub_graph.tasks))
        result = grid_search(sub_graph, sub_split, config, train_config, workers=1)
        report = evaluate(sub_split.apply(sub_graph, Split.TEST), config, result.best.params)
        for metrics in report:
            rows.append(
                {
                    "variant": variant.value,
                    "task": metrics.task,
                    "seed": seed,
                    "micro_f1": metrics.micro_f1,
                    "macro_f1": metrics.macro_f1,
                    "auc": metrics.auc,
                    "ap": metrics.ap,
                }
            )
    return rows


@dataclass
class ExperimentResult:
    """Per (variant, task, seed) test metrics of an interference experiment."""

    rows: List[Dict]

    def summary(self, metric: str = "macro_f1") -> List[Dict]:
        """Mean and standard deviation of a metric per (variant, task)."""
        grouped: Dict[Tuple[str, str], List[float]] = {}
        for row in self.rows:
            if row[metric] is not None:
                grouped.setdefault((row["variant"], row["task"]), []).append(row[metric])
        return [
            {
                "variant": variant,
                "task": task,
                "mean": float(np.mean(values)),
                "std": float(np.std(values)),
                "seeds": len(values),
            }
            for (variant, task), values in grouped.items()
        ]

    def orderings(self, metric: str = "macro_f1") -> List[Dict]:
        """Per task and ordered pair of variants, whether the first mean reaches the second."""
        means = {(s["variant"], s["task"]): s["mean"] for s in self.summary(metric)}
        tasks = sorted({task for _, task in means})
        variants = list(dict.fromkeys(variant for variant, _ in means))
        out = []
        for task in tasks:
            for a in variants:
                for b in variants:
                    if a == b or (a, task) not in means or (b, task) not in means:
                        continue
                    out.append(
                        {
                            "task": task,
                            "better": a,
                            "worse": b,
                            "holds": means[(a, task)] >= means[(b, task)],
                            "gap": means[(a, task)] - means[(b, task)],
                        }
                    )
        return out

    def table(self, metric: str = "macro_f1") -> Table:
        table = Table(title=f"Test {metric} (mean ± std over seeds)")
        table.add_column("Variant")
        table.add_column("Task")
        table.add_column(metric, justify="right")
        for s in self.summary(metric):
            table.add_row(s["variant"], s["task"], f"{s['mean']:.4f} ± {s['std']:.4f}")
        return table

    def write(self, out_dir) -> Path:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        with open(out / "results.csv", "w", newline="") as fp:
            writer = csv.DictWriter(fp, fieldnames=RESULT_COLUMNS)
            writer.writeheader()
            for row in self.rows:
                writer.writerow({k: "" if row[k] is None else row[k] for k in RESULT_COLUMNS})
        with open(out / "summary.json", "w") as fp:
            json.dump(
                {"summary": self.summary(), "orderings": self.orderings()},
                fp,
                cls=ComplexEncoder,
                indent=2,
            )
        return out


def interference_experiment(
    config: SynthConfig,
    variants: Sequence,
    seeds: Sequence[int],
    model_config: ModelConfig,
    train_config: TrainConfig,
    out_dir=None,
    workers: Optional[int] = None,
) -> ExperimentResult:
    """Trains every variant on a synthetic graph per seed and scores it on the test split.

    Every seed regenerates the graph and redraws the split; the model and
    sampling seeds follow it. Cells (seed, variant) run on `workers` threads.

    Raises:
        ConfigError: Fewer than three seeds.
    """
    if len(seeds) < MIN_SEEDS:
        raise ConfigError("seeds", f"at least {MIN_SEEDS} seeds are required")
    variants = [Variant.parse(v) for v in variants]
    cells = [(seed, variant) for seed in seeds for variant in variants]

    def run(cell) -> List[Dict]:
        seed, variant = cell
        graph, _ = generate(config.with_changes(seed=seed))
        split = split_targets(graph, train_config.split_ratios, seed)
        logger.info("experiment cell seed=%d variant=%s", seed, variant.value)
        return score_variant(
            graph,
            split,
            variant,
            model_config.with_changes(seed=seed),
            train_config.with_changes(seed=seed),
            seed,
        )

    rows = [row for cell_rows in map_cells(run, cells, workers) for row in cell_rows]
    result = ExperimentResult(rows)
    if out_dir is not None:
        result.write(out_dir)
    return result


def bench_time(
    graph: HeteroGraph,
    variants: Sequence,
    epochs: int,
    model_config: ModelConfig,
    train_config: TrainConfig,
    out_path=None,
) -> List[Dict]:
    """Wall-clock seconds of every training epoch, per variant.

    Validation is skipped; each row also carries the variant's parameter count
    and analytic cost. `stl` is timed on the first task alone.
    """
    split = split_targets(graph, train_config.split_ratios, train_config.seed)
    rows = []
    for variant in (Variant.parse(v) for v in variants):
        sub_graph, sub_split = graph, split
        if variant is Variant.STL:
            sub_graph, sub_split = graph.select_tasks([0]), split.select_tasks([0])
        config = variant_config(model_config, variant, len(sub_graph.tasks))
        trainer = Trainer(
            sub_graph, sub_split, config, train_config, scorer=lambda trainer, epoch: 0.0
        )
        cost = complexity_estimate(config, sub_graph)["total"]
        for epoch in range(1, epochs + 1):
            start = time.perf_counter()
            trainer.step(epoch)
            rows.append(
                {
                    "variant": variant.value,
                    "epoch": epoch,
                    "seconds": time.perf_counter() - start,
                    "parameters": trainer.params.count(),
                    "estimated_cost": cost,
                }
            )
        logger.info(
            "%s: %.4fs per epoch",
            variant.value,
            np.mean([r["seconds"] for r in rows if r["variant"] == variant.value]),
        )
    if out_path is not None:
        with open(out_path, "w", newline="") as fp:
            writer = csv.DictWriter(fp, fieldnames=TIMING_COLUMNS)
            writer.writeheader()
            writer.writerows(rows)
    return rows


ABLATION_COLUMNS = ("setting", "task", "metric", "value")
ABLATION_VARIANTS = (
    Variant.ABLATION_NO_R,
    Variant.ABLATION_NO_R_NO_L,
    Variant.STL,
    Variant.SHARED_BACKBONE,
)


def progressive_masks(num_layers: int) -> List[List[bool]]:
    """Layer masks sharing the first 1, 2, ..., `num_layers` layers."""
    return [[layer < k for layer in range(num_layers)] for k in range(1, num_layers + 1)]


def mask_setting(mask: Sequence[bool]) -> str:
    """Names a mask by the 1-based layers it shares, e.g. `mask_1-2`."""
    return "mask_" + "-".join(str(layer + 1) for layer, shared in enumerate(mask) if shared)


def ablation_sweep(
    graph: HeteroGraph,
    split: SplitAssignment,
    model_config: ModelConfig,
    train_config: TrainConfig,
    out_path=None,
) -> List[Dict]:
    """Progressive layer sharing plus the ablation and baseline variants.

    The selective model is trained once per progressive mask, then every
    variant of `ABLATION_VARIANTS` once with the base config. Each setting
    yields one row per task holding its test `eval_metric`.

    Returns:
        Rows with the `ABLATION_COLUMNS` keys.
    """
    metric = train_config.eval_metric
    runs = [
        (mask_setting(mask), Variant.SELECTIVE, model_config.with_changes(layer_share_mask=mask))
        for mask in progressive_masks(model_config.num_layers)
    ]
    runs += [(variant.value, variant, model_config) for variant in ABLATION_VARIANTS]

    rows = []
    for setting, variant, config in runs:
        logger.info("ablation setting %s", setting)
        for row in score_variant(graph, split, variant, config, train_config, train_config.seed):
            rows.append(
                {"setting": setting, "task": row["task"], "metric": metric, "value": row[metric]}
            )
    if out_path is not None:
        with open(out_path, "w", newline="") as fp:
            writer = csv.DictWriter(fp, fieldnames=ABLATION_COLUMNS)
            writer.writeheader()
            for row in rows:
                writer.writerow({k: "" if row[k] is None else row[k] for k in ABLATION_COLUMNS})
    return rows
