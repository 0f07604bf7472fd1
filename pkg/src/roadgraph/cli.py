"""Command-line surface tying the pipeline together.

Subcommands mirror the library use cases: ``extract`` builds scene-graph
datasets, ``train``/``evaluate`` fit and score models, ``transfer`` runs
frozen-weight cross-dataset evaluation, ``explain`` dumps attention
scores, ``visualize`` writes DOT files and ``synth`` generates labeled
synthetic corpora.

Exit codes: 0 success, 2 configuration error, 3 data error, 4 internal
invariant violation.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path

from . import training
from .bev import load_calibration
from .datasets import load_dataset, save_dataset
from .errors import ConfigError, ConfigIssue, DataIssue, RoadGraphError
from .extraction import (
    ExtractionConfig,
    export_dot,
    extract_dataset,
    load_extraction_config,
    load_scenegraph_dataset,
    save_scenegraph_dataset,
)
from .models import (
    ModelConfig,
    load_model,
    model_config_from_json,
    save_model,
)
from .synth import ScenarioConfig, generate_dataset, scenario_config_from_json
from .training import TrainRun, cross_validate, evaluate, explain, train_for_task

log = logging.getLogger("roadgraph")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_INTERNAL = 4


def _write_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(payload, indent=1, sort_keys=True) + "\n",
                    encoding="utf-8")


def _load_json(path: str) -> dict:
    p = Path(path)
    if not p.exists():
        raise ConfigError(f"config file not found: {p}")
    try:
        return json.loads(p.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {p} is not valid JSON: {exc}") from exc


# -- subcommands -------------------------------------------------------------


def cmd_extract(args) -> int:
    cfg = (load_extraction_config(args.extraction_config)
           if args.extraction_config else ExtractionConfig())
    dataset = load_dataset(args.dataset)
    calibration = None
    if dataset.variant == "image":
        if not args.calibration:
            raise ConfigError(
                "image-variant dataset requires --calibration calibration.json")
        calibration = load_calibration(args.calibration)
    sgd = extract_dataset(dataset, cfg, calibration)
    for clip in sgd.clips:
        nodes = sum(len(g.nodes) for g in clip.graphs)
        edges = sum(len(g.edges) for g in clip.graphs)
        print(f"{clip.clip_id}: {len(clip.graphs)} frames, "
              f"{nodes} nodes, {edges} edges")
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    save_scenegraph_dataset(sgd, out)
    print(f"wrote {len(sgd.clips)} clips to {out}")
    return EXIT_OK


def _build_run(args) -> TrainRun:
    """Assemble a TrainRun: defaults < --config < --model-config < flags."""
    entry: dict = {}
    if getattr(args, "config", None):
        entry = _load_json(args.config)
    model_entry = dict(entry.get("model", {}))
    if getattr(args, "model_config", None):
        model_entry = _load_json(args.model_config)
    training_entry = dict(entry.get("training", {}))

    try:
        model_config = model_config_from_json(model_entry) if model_entry else ModelConfig()
    except RoadGraphError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad model config: {exc}") from exc

    run = TrainRun(
        model_config=model_config,
        epochs=int(training_entry.get("epochs", TrainRun.epochs)),
        learning_rate=float(training_entry.get("learning_rate", TrainRun.learning_rate)),
        optimizer=training_entry.get("optimizer", TrainRun.optimizer),
        seed=int(training_entry.get("seed", TrainRun.seed)),
        class_weight=bool(training_entry.get("class_weight", TrainRun.class_weight)),
        downsample=bool(training_entry.get("downsample", TrainRun.downsample)),
        train_ratio=float(training_entry.get("train_ratio", TrainRun.train_ratio)),
    )
    if getattr(args, "epochs", None) is not None:
        run = replace(run, epochs=args.epochs)
    if getattr(args, "lr", None) is not None:
        run = replace(run, learning_rate=args.lr)
    if getattr(args, "seed", None) is not None:
        run = replace(run, seed=args.seed)
        run = replace(run, model_config=replace(run.model_config, seed=args.seed))
    return run.validate()


def _resolve_folds(args, entry_folds=None) -> int:
    if getattr(args, "folds", None) is not None:
        return args.folds
    if entry_folds is not None:
        return int(entry_folds)
    return 0


def cmd_train(args) -> int:
    sgd = load_scenegraph_dataset(args.dataset)
    run = _build_run(args)
    entry = _load_json(args.config) if getattr(args, "config", None) else {}
    folds = _resolve_folds(args, entry.get("training", {}).get("folds"))
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)

    results: dict = {
        "run": sgd.meta.get("name", "dataset"),
        "task": run.model_config.task,
        "epochs": run.epochs,
        "seed": run.seed,
    }
    metrics_lines: list[str] = []
    if folds >= 2:
        cv = cross_validate(sgd, run, folds)
        for record in cv.records:
            entry_json = {"run": results["run"], **record.to_json()}
            metrics_lines.append(json.dumps(entry_json, sort_keys=True))
        results["folds"] = folds
        results["mean"] = cv.mean
        results["aggregate"] = cv.aggregate.to_json()
        auc_text = "n/a" if cv.mean["auc"] is None else f"{cv.mean['auc']:.4f}"
        print(f"{folds}-fold CV mean accuracy {cv.mean['accuracy']:.4f}, "
              f"mean AUC {auc_text}")
    # Final model on the full dataset backs the checkpoint (and explain).
    result = train_for_task(sgd, run, epoch_callback=None)
    for epoch, (loss, scores) in enumerate(zip(result.epoch_losses,
                                               result.epoch_scores)):
        metrics_lines.append(json.dumps(
            {"run": results["run"], "fold": None, "epoch": epoch, "loss": loss,
             "train": scores.to_json(), "test": None}, sort_keys=True))
    results["final_train"] = result.epoch_scores[-1].to_json()
    results["epoch_losses"] = result.epoch_losses
    save_model(result.model, out_dir / "checkpoint.json")
    _write_json(out_dir / "results.json", results)
    (out_dir / "metrics.jsonl").write_text(
        "\n".join(metrics_lines) + "\n", encoding="utf-8")
    print(f"final train accuracy {result.epoch_scores[-1].accuracy:.4f}; "
          f"artifacts under {out_dir}")
    return EXIT_OK


def cmd_evaluate(args) -> int:
    sgd = load_scenegraph_dataset(args.dataset)
    model = load_model(args.checkpoint)
    scores = evaluate(model, sgd)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    _write_json(out_dir / "results.json",
                {"run": sgd.meta.get("name", "dataset"),
                 "scores": scores.to_json()})
    auc_text = "n/a" if scores.auc is None else f"{scores.auc:.4f}"
    print(f"accuracy {scores.accuracy:.4f}, AUC {auc_text}, MCC {scores.mcc:.4f}")
    return EXIT_OK


def cmd_transfer(args) -> int:
    source = load_scenegraph_dataset(args.dataset)
    target = load_scenegraph_dataset(args.target)
    run = _build_run(args)
    scores_source, scores_target = training.transfer_evaluate(source, target, run)
    delta = scores_target.accuracy - scores_source.accuracy
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    _write_json(out_dir / "results.json", {
        "source": source.meta.get("name", "source"),
        "target": target.meta.get("name", "target"),
        "source_scores": scores_source.to_json(),
        "target_scores": scores_target.to_json(),
        "accuracy_delta": delta,
    })
    print(f"original accuracy {scores_source.accuracy:.4f}, "
          f"transfer accuracy {scores_target.accuracy:.4f} (delta {delta:+.3f})")
    return EXIT_OK


def cmd_explain(args) -> int:
    sgd = load_scenegraph_dataset(args.dataset)
    model = load_model(args.checkpoint)
    dump = explain(model, sgd)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    training.write_attention_csv(dump, out_dir / "attention.csv")
    if not dump.has_alpha or not dump.has_beta:
        missing = []
        if not dump.has_alpha:
            missing.append("node attention (no pooling layer)")
        if not dump.has_beta:
            missing.append("temporal attention (not lstm_attn)")
        print(f"warning: partial dump, missing {' and '.join(missing)}")
    print(f"wrote attention scores for {len(dump.clips)} clips "
          f"to {out_dir / 'attention.csv'}")
    return EXIT_OK


def cmd_visualize(args) -> int:
    sgd = load_scenegraph_dataset(args.dataset)
    matches = [c for c in sgd.clips if c.clip_id == args.clip]
    if not matches:
        from .errors import NotFound
        raise NotFound(f"clip {args.clip!r} not found in {args.dataset}")
    clip = matches[0]
    out = Path(args.out)
    if args.all:
        out.mkdir(parents=True, exist_ok=True)
        for graph in clip.graphs:
            path = out / f"{clip.clip_id}_{graph.frame_index:04d}.dot"
            path.write_text(export_dot(graph), encoding="utf-8")
        print(f"wrote {len(clip.graphs)} DOT files under {out}")
        return EXIT_OK
    frame = args.frame if args.frame is not None else clip.graphs[0].frame_index
    for graph in clip.graphs:
        if graph.frame_index == frame:
            out.parent.mkdir(parents=True, exist_ok=True)
            out.write_text(export_dot(graph), encoding="utf-8")
            print(f"wrote {out}")
            return EXIT_OK
    from .errors import NotFound
    raise NotFound(f"frame {frame} not found in clip {args.clip!r}")


def cmd_synth(args) -> int:
    cfg = (scenario_config_from_json(_load_json(args.config))
           if args.config else ScenarioConfig())
    dataset = generate_dataset(cfg, args.seed if args.seed is not None else 0)
    save_dataset(dataset, args.out)
    print(f"wrote {len(dataset.clips)} clips "
          f"({cfg.n_safe} safe / {cfg.n_risky} risky) to {args.out}")
    return EXIT_OK


# -- parser -------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="roadgraph",
        description="Road scene-graph extraction and graph-learning pipeline")
    parser.add_argument("--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("extract", help="convert a dataset into scene-graphs")
    p.add_argument("--dataset", required=True, help="dataset directory")
    p.add_argument("--extraction-config", help="extraction_config.json")
    p.add_argument("--calibration", help="calibration.json (image variant)")
    p.add_argument("--out", required=True, help="output .jsonl scene-graph dataset")
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("train", help="train a model on a scene-graph dataset")
    p.add_argument("--dataset", required=True, help="scene-graph dataset file")
    p.add_argument("--config", help="learning config JSON (model + training)")
    p.add_argument("--model-config", help="model config JSON")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--epochs", type=int)
    p.add_argument("--lr", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--folds", type=int, help="k for stratified k-fold CV")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("evaluate", help="score a checkpoint on a dataset")
    p.add_argument("--dataset", required=True)
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("transfer", help="train on source, evaluate frozen on target")
    p.add_argument("--dataset", required=True, help="source scene-graph dataset")
    p.add_argument("--target", required=True, help="target scene-graph dataset")
    p.add_argument("--config", help="learning config JSON")
    p.add_argument("--model-config", help="model config JSON")
    p.add_argument("--out", required=True)
    p.add_argument("--epochs", type=int)
    p.add_argument("--lr", type=float)
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_transfer)

    p = sub.add_parser("explain", help="dump attention scores to CSV")
    p.add_argument("--dataset", required=True)
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_explain)

    p = sub.add_parser("visualize", help="export scene-graphs as DOT")
    p.add_argument("--dataset", required=True)
    p.add_argument("--clip", required=True)
    p.add_argument("--frame", type=int)
    p.add_argument("--all", action="store_true", help="one DOT file per frame")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_visualize)

    p = sub.add_parser("synth", help="generate a labeled synthetic dataset")
    p.add_argument("--config", help="scenario config JSON")
    p.add_argument("--out", required=True, help="output dataset directory")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_synth)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_CONFIG
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigIssue as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DataIssue as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (RoadGraphError, AssertionError) as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
