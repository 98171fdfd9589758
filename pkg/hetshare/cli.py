"""Command-line entry point: `hetshare <command> ...`.

Exit codes are a stable contract: 0 on success, 1 when `validate` reports
findings, 2 on usage, configuration or input errors, 3 when a run aborts.
"""

import argparse
import json
import logging
import subprocess
import sys
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Dict, List, Optional, Sequence

from rich.console import Console

from .evaluate import (
    EmptyTrace,
    AttentionTrace,
    evaluate,
    export_gates,
    export_importance,
)
from .graph import (
    GraphLoadError,
    GraphSchema,
    SamplingError,
    SchemaError,
    Split,
    SplitError,
    load_graph,
    split_targets,
    validate,
)
from .model import ConfigError, LabelKindMismatch, ModelConfig, ParameterMismatch, Variant
from .synth import (
    InvalidSignalPlan,
    SYNTH_PRESETS,
    ablation_sweep,
    bench_time,
    generate,
    synth_preset,
    write_synthetic,
)
from .train import (
    CheckpointError,
    CheckpointMismatch,
    TrainConfig,
    TrainingAborted,
    grid_search,
    load_model,
    save_model,
)
from .utils import ComplexEncoder, InvalidThreadCount, setup_logging

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FINDINGS = 1
EXIT_USAGE = 2
EXIT_ABORTED = 3

MANIFEST_FILE = "manifest.json"
METRICS_FILE = "metrics.json"
TRAIN_LOG_FILE = "train_log.jsonl"
ABLATION_FILE = "ablation.csv"

USAGE_ERRORS = (
    ConfigError,
    InvalidSignalPlan,
    InvalidThreadCount,
    GraphLoadError,
    SchemaError,
    SplitError,
    LabelKindMismatch,
    ParameterMismatch,
    CheckpointError,
    CheckpointMismatch,
    EmptyTrace,
)
RUNTIME_ERRORS = (TrainingAborted, SamplingError)


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def git_describe() -> str:
    """`git describe` of the working directory, or `unknown` outside a repository."""
    try:
        out = subprocess.run(
            ["git", "describe", "--always", "--dirty", "--tags"],
            capture_output=True,
            text=True,
            timeout=10,
        )
    except (OSError, subprocess.SubprocessError):
        return "unknown"
    return out.stdout.strip() if out.returncode == 0 and out.stdout.strip() else "unknown"


@dataclass
class RunManifest:
    """What a command ran with and what it produced.

    Written once before the long-running work starts, then again with the
    finish time and outputs; every path in `outputs` exists on success.
    """

    command: str
    config: Dict
    seed: Optional[int]
    git_describe: str = field(default_factory=git_describe)
    started: str = field(default_factory=_now)
    finished: Optional[str] = None
    outputs: List[str] = field(default_factory=list)

    def write(self, out_dir) -> Path:
        path = Path(out_dir) / MANIFEST_FILE
        with open(path, "w") as fp:
            json.dump(asdict(self), fp, cls=ComplexEncoder, indent=2)
        return path

    def finish(self, out_dir, outputs: Sequence) -> Path:
        self.finished = _now()
        self.outputs = [str(p) for p in outputs]
        return self.write(out_dir)


def _read_configs(args, num_tasks: int):
    """Model and train configs of a command, with the seed override applied."""
    if getattr(args, "model_config", None):
        model_config = ModelConfig.from_file(args.model_config)
    else:
        model_config = ModelConfig(num_tasks=num_tasks)
    if getattr(args, "train_config", None):
        train_config = TrainConfig.from_file(args.train_config)
    else:
        train_config = TrainConfig()
    if getattr(args, "seed", None) is not None:
        model_config = model_config.with_changes(seed=args.seed)
        train_config = train_config.with_changes(seed=args.seed)
    return model_config, train_config.validate()


def cmd_validate(args) -> int:
    graph = load_graph(args.graph_dir, strict=False)
    report = validate(graph)
    console = Console()
    for finding in report:
        console.print(str(finding), markup=False, highlight=False, soft_wrap=True)
    if not report.clean:
        logger.warning("%d finding(s) in %s", len(report), args.graph_dir)
        return EXIT_FINDINGS
    logger.info("%s is clean", args.graph_dir)
    return EXIT_OK


def cmd_synth(args) -> int:
    config = synth_preset(args.preset)
    if args.seed is not None:
        config = config.with_changes(seed=args.seed)
    graph, truth = generate(config)
    write_synthetic(graph, truth, args.out)
    logger.info("wrote %s synthetic graph to %s", args.preset, args.out)
    return EXIT_OK


def cmd_train(args) -> int:
    graph = load_graph(args.graph)
    model_config, train_config = _read_configs(args, len(graph.tasks))
    schema = GraphSchema.from_graph(graph)
    model_config.validate(schema)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    manifest = RunManifest(
        "train",
        {
            "graph": str(args.graph),
            "model": model_config._serialize(),
            "train": train_config._serialize(),
        },
        train_config.seed,
    )
    manifest.write(out)

    split = split_targets(graph, train_config.split_ratios, train_config.seed)
    log_dir = out / "grid"
    log_dir.mkdir(exist_ok=True)
    result = grid_search(graph, split, model_config, train_config, log_dir=log_dir)
    Console(stderr=True).print(result.table())

    save_model(out, model_config, train_config, schema, result.best.params)
    with open(out / TRAIN_LOG_FILE, "w") as fp:
        for record in result.best.log:
            fp.write(json.dumps(record, cls=ComplexEncoder) + "\n")
    report = evaluate(split.apply(graph, Split.TEST), model_config, result.best.params)
    report.serialize(out / METRICS_FILE)
    report.print(Console())

    outputs = sorted(p for p in out.iterdir() if p.is_file() and p.name != MANIFEST_FILE)
    manifest.finish(out, outputs + [log_dir])
    return EXIT_OK


def cmd_ablate(args) -> int:
    graph = load_graph(args.graph)
    model_config, train_config = _read_configs(args, len(graph.tasks))
    model_config.with_changes(variant=Variant.SELECTIVE).validate(GraphSchema.from_graph(graph))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    manifest = RunManifest(
        "ablate",
        {
            "graph": str(args.graph),
            "model": model_config._serialize(),
            "train": train_config._serialize(),
        },
        train_config.seed,
    )
    manifest.write(out)

    split = split_targets(graph, train_config.split_ratios, train_config.seed)
    path = out / ABLATION_FILE
    ablation_sweep(graph, split, model_config, train_config, out_path=path)
    manifest.finish(out, [path])
    return EXIT_OK


def cmd_evaluate(args) -> int:
    model_config, train_config, _, params = load_model(args.model_dir)
    graph = load_graph(args.graph)
    split = split_targets(graph, train_config.split_ratios, train_config.seed)
    report = evaluate(split.apply(graph, Split.parse(args.split)), model_config, params)
    report.print(Console())
    if args.out is not None:
        report.serialize(args.out)
    return EXIT_OK


def cmd_importance(args) -> int:
    model_config, _, _, params = load_model(args.model_dir)
    graph = load_graph(args.graph)
    if sum(len(t) for t in graph.targets) == 0:
        raise EmptyTrace()
    trace = AttentionTrace()
    evaluate(graph, model_config, params, trace=trace)
    rows = export_importance(trace, args.out)
    if args.gates is not None:
        export_gates(trace, args.gates)
    logger.info("wrote %d importance rows to %s", rows, args.out)
    return EXIT_OK


def cmd_bench_time(args) -> int:
    graph = load_graph(args.graph)
    model_config, train_config = _read_configs(args, len(graph.tasks))
    variants = args.variants or [v.value for v in Variant]
    rows = bench_time(graph, variants, args.epochs, model_config, train_config, out_path=args.out)
    logger.info("timed %d epochs", len(rows))
    return EXIT_OK


COMMANDS = {
    "validate": cmd_validate,
    "synth": cmd_synth,
    "train": cmd_train,
    "ablate": cmd_ablate,
    "evaluate": cmd_evaluate,
    "importance": cmd_importance,
    "bench-time": cmd_bench_time,
}


def _add_logging_flags(parser: argparse.ArgumentParser):
    parser.add_argument("-v", "--verbose", action="count", default=0, help="more logging")
    parser.add_argument("-q", "--quiet", action="store_true", help="warnings only")


def _add_config_flags(parser: argparse.ArgumentParser):
    parser.add_argument("--model-config", help="model config JSON (defaults to ModelConfig())")
    parser.add_argument("--train-config", help="train config JSON (defaults to TrainConfig())")
    parser.add_argument("--seed", type=int, help="overrides the seed of both configs")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hetshare",
        description="Multi-task heterogeneous graph learning with selective sharing.",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    p = commands.add_parser("validate", help="check a graph directory")
    p.add_argument("graph_dir")
    _add_logging_flags(p)

    p = commands.add_parser("synth", help="write a synthetic benchmark graph")
    p.add_argument("--preset", choices=sorted(SYNTH_PRESETS), default="disjoint")
    p.add_argument("--seed", type=int)
    p.add_argument("--out", required=True)
    _add_logging_flags(p)

    p = commands.add_parser("train", help="grid-search, train and test a model")
    p.add_argument("--graph", required=True)
    _add_config_flags(p)
    p.add_argument("--out", required=True)
    _add_logging_flags(p)

    p = commands.add_parser("ablate", help="progressive sharing masks and ablation variants")
    p.add_argument("--graph", required=True)
    _add_config_flags(p)
    p.add_argument("--out", required=True)
    _add_logging_flags(p)

    p = commands.add_parser("evaluate", help="score a trained model on a split")
    p.add_argument("--model-dir", required=True)
    p.add_argument("--graph", required=True)
    p.add_argument("--split", choices=[s.name.lower() for s in Split], default="test")
    p.add_argument("--out", help="also write the report as JSON")
    _add_logging_flags(p)

    p = commands.add_parser("importance", help="export attention and gate weights")
    p.add_argument("--model-dir", required=True)
    p.add_argument("--graph", required=True)
    p.add_argument("--out", required=True, help="importance CSV")
    p.add_argument("--gates", help="also write the gate summary CSV")
    _add_logging_flags(p)

    p = commands.add_parser("bench-time", help="per-epoch wall-clock timing per variant")
    p.add_argument("--graph", required=True)
    _add_config_flags(p)
    p.add_argument("--epochs", type=int, default=5)
    p.add_argument("--variants", nargs="+", choices=[v.value for v in Variant])
    p.add_argument("--out", required=True)
    _add_logging_flags(p)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code == 0 else EXIT_USAGE
    setup_logging(-1 if args.quiet else args.verbose)

    try:
        return COMMANDS[args.command](args)
    except USAGE_ERRORS as e:
        logger.error("%s", e)
        return EXIT_USAGE
    except RUNTIME_ERRORS as e:
        logger.error("%s", e)
        return EXIT_ABORTED


if __name__ == "__main__":
    sys.exit(main())
