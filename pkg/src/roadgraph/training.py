"""Training, evaluation, transfer and explainability over scene-graph datasets.

Clips are the unit of work: one forward pass, one loss, one optimizer
step per clip (graphs vary in node count, so there is no batching across
clips).  Sequence training scores the whole clip against its label;
per-frame training broadcasts the clip label to every frame.  Class
imbalance is corrected either by loss weighting or by seeded
downsampling, never both.
"""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import autodiff as ad
from .datasets import fold_indices, stratified_indices
from .errors import (
    ConfigError,
    EmptyDataset,
    LabelError,
    LabelMissing,
    VocabularyMismatch,
)
from .extraction import SceneGraphClip, SceneGraphDataset
from .metrics import Scores, scores_from_predictions
from .models import (
    GraphBatch,
    ModelConfig,
    SceneGraphModel,
    model_config_to_json,
)

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class TrainRun:
    """Hyperparameters of one training run."""

    model_config: ModelConfig = field(default_factory=ModelConfig)
    epochs: int = 20
    learning_rate: float = 0.002
    optimizer: str = "adam"
    seed: int = 0
    class_weight: bool = True
    downsample: bool = False
    train_ratio: float = 0.7

    def validate(self) -> "TrainRun":
        if self.epochs < 1:
            raise ConfigError(f"epochs must be >= 1, got {self.epochs}")
        if self.class_weight and self.downsample:
            raise ConfigError(
                "enable at most one imbalance correction (class_weight or downsample)")
        if self.optimizer not in ("sgd", "adam"):
            raise ConfigError(f"unknown optimizer {self.optimizer!r}")
        return self


@dataclass
class TrainResult:
    model: SceneGraphModel
    epoch_losses: list[float]
    epoch_scores: list[Scores]


def _checked_labels(sgd: SceneGraphDataset) -> list[int]:
    labels = []
    for clip in sgd.clips:
        if clip.label is None:
            raise LabelMissing(f"clip {clip.clip_id!r} has no label")
        if clip.label not in (0, 1):
            raise LabelError(f"clip {clip.clip_id!r} label {clip.label!r} is not binary")
        labels.append(clip.label)
    return labels


def _weights_from_labels(labels: list[int]) -> tuple[float, float]:
    n0 = labels.count(0)
    n1 = labels.count(1)
    if n0 == 0 or n1 == 0:
        return (1.0, 1.0)
    n = n0 + n1
    return (n / (2.0 * n0), n / (2.0 * n1))


def _downsample_clips(sgd: SceneGraphDataset, seed: int) -> SceneGraphDataset:
    labels = _checked_labels(sgd)
    majority = 0 if labels.count(0) > labels.count(1) else 1
    minority_count = min(labels.count(0), labels.count(1))
    if labels.count(majority) == minority_count:
        return sgd
    rng = np.random.default_rng(seed)
    majority_idx = [i for i, y in enumerate(labels) if y == majority]
    keep = {majority_idx[i] for i in rng.permutation(len(majority_idx))[:minority_count]}
    clips = tuple(c for i, c in enumerate(sgd.clips)
                  if labels[i] != majority or i in keep)
    return replace(sgd, clips=clips)


def _train(sgd: SceneGraphDataset, run: TrainRun, per_frame: bool,
           epoch_callback=None) -> TrainResult:
    run.validate()
    expected_task = "per_frame" if per_frame else "sequence"
    if run.model_config.task != expected_task:
        raise ConfigError(
            f"model task {run.model_config.task!r} does not match the"
            f" {expected_task!r} trainer")
    if not sgd.clips:
        raise EmptyDataset("cannot train on an empty dataset")
    if run.downsample:
        sgd = _downsample_clips(sgd, run.seed)
    labels = _checked_labels(sgd)
    weights = _weights_from_labels(labels) if run.class_weight else (1.0, 1.0)

    model = SceneGraphModel(run.model_config, sgd.actor_names, sgd.relation_names)
    params = list(model.parameters().values())
    optimizer = ad.make_optimizer(run.optimizer, params, run.learning_rate)
    rng = np.random.default_rng(run.seed)

    batches: list[tuple[int, GraphBatch]] = [
        (labels[i], model.encode(clip.graphs)) for i, clip in enumerate(sgd.clips)]

    epoch_losses: list[float] = []
    epoch_scores: list[Scores] = []
    for epoch in range(run.epochs):
        order = rng.permutation(len(batches))
        losses = []
        preds: list[int] = []
        probs: list[float] = []
        targets: list[int] = []
        for idx in order:
            label, batch = batches[idx]
            with ad.Tape() as tape:
                if per_frame:
                    out = model.forward_frames(batch, training=True, rng=rng)
                    frame_targets = [label] * batch.num_frames
                    loss = ad.cross_entropy(out.logits, frame_targets, weights)
                    preds.extend(out.labels)
                    probs.extend(out.probs)
                    targets.extend(frame_targets)
                else:
                    out = model.forward_sequence(batch, training=True, rng=rng)
                    loss = ad.cross_entropy(out.logits, [label], weights)
                    preds.append(out.label)
                    probs.append(out.y1)
                    targets.append(label)
                ad.backward(tape, loss)
            optimizer.step()
            losses.append(loss.item())
        epoch_losses.append(float(np.mean(losses)))
        epoch_scores.append(scores_from_predictions(preds, probs, targets))
        if epoch_callback is not None:
            epoch_callback(epoch, model, epoch_losses[-1], epoch_scores[-1])
    return TrainResult(model=model, epoch_losses=epoch_losses,
                       epoch_scores=epoch_scores)


def train_sequence_classifier(train: SceneGraphDataset, run: TrainRun,
                              epoch_callback=None) -> TrainResult:
    """Whole-clip risk classifier: one weighted loss per clip."""
    return _train(train, run, per_frame=False, epoch_callback=epoch_callback)


def train_frame_classifier(train: SceneGraphDataset, run: TrainRun,
                           epoch_callback=None) -> TrainResult:
    """Per-frame collision predictor: the clip label broadcasts to all frames."""
    return _train(train, run, per_frame=True, epoch_callback=epoch_callback)


def train_for_task(train: SceneGraphDataset, run: TrainRun,
                   epoch_callback=None) -> TrainResult:
    if run.model_config.task == "per_frame":
        return train_frame_classifier(train, run, epoch_callback)
    return train_sequence_classifier(train, run, epoch_callback)


def evaluate(model: SceneGraphModel, test: SceneGraphDataset) -> Scores:
    """Score a frozen model on a labeled dataset (pure; no randomness)."""
    if not test.clips:
        raise EmptyDataset("cannot evaluate on an empty dataset")
    preds: list[int] = []
    probs: list[float] = []
    targets: list[int] = []
    for clip in test.clips:
        if clip.label is None:
            raise LabelMissing(f"clip {clip.clip_id!r} has no label")
        batch = model.encode(clip.graphs)
        if model.config.task == "per_frame":
            out = model.forward_frames(batch)
            preds.extend(out.labels)
            probs.extend(out.probs)
            targets.extend([clip.label] * batch.num_frames)
        else:
            seq = model.forward_sequence(batch)
            preds.append(seq.label)
            probs.append(seq.y1)
            targets.append(clip.label)
    return scores_from_predictions(preds, probs, targets)


def _subset(sgd: SceneGraphDataset, indices) -> SceneGraphDataset:
    return replace(sgd, clips=tuple(sgd.clips[i] for i in indices))


@dataclass
class FoldRecord:
    fold: int
    epoch: int
    loss: float
    train: Scores
    test: Scores

    def to_json(self) -> dict:
        return {"fold": self.fold, "epoch": self.epoch, "loss": self.loss,
                "train": self.train.to_json(), "test": self.test.to_json()}


@dataclass
class CrossValidationResult:
    """Per-fold test scores plus pooled and averaged summaries."""

    fold_scores: list[Scores]
    aggregate: Scores
    mean: dict[str, float]
    records: list[FoldRecord]


def cross_validate(sgd: SceneGraphDataset, run: TrainRun, k: int) -> CrossValidationResult:
    """Stratified k-fold training; the reported score averages the folds."""
    labels = _checked_labels(sgd)
    folds = fold_indices(labels, k, run.seed)
    fold_scores: list[Scores] = []
    records: list[FoldRecord] = []
    pooled_preds: list[int] = []
    pooled_probs: list[float] = []
    pooled_targets: list[int] = []

    for fold in range(k):
        train_idx = [i for i, f in enumerate(folds) if f != fold]
        test_idx = [i for i, f in enumerate(folds) if f == fold]
        train_sgd = _subset(sgd, train_idx)
        test_sgd = _subset(sgd, test_idx)

        def on_epoch(epoch, model, loss, train_scores, _fold=fold, _test=test_sgd):
            records.append(FoldRecord(fold=_fold, epoch=epoch, loss=loss,
                                      train=train_scores,
                                      test=evaluate(model, _test)))

        result = train_for_task(train_sgd, run, epoch_callback=on_epoch)
        scores = records[-1].test
        fold_scores.append(scores)
        for clip in test_sgd.clips:
            batch = result.model.encode(clip.graphs)
            if run.model_config.task == "per_frame":
                out = result.model.forward_frames(batch)
                pooled_preds.extend(out.labels)
                pooled_probs.extend(out.probs)
                pooled_targets.extend([clip.label] * batch.num_frames)
            else:
                seq = result.model.forward_sequence(batch)
                pooled_preds.append(seq.label)
                pooled_probs.append(seq.y1)
                pooled_targets.append(clip.label)

    pooled = scores_from_predictions(pooled_preds, pooled_probs, pooled_targets)
    fold_aucs = [s.auc for s in fold_scores if s.auc is not None]
    aggregate = replace(
        pooled,
        auc=float(np.mean(fold_aucs)) if fold_aucs else None,
        per_fold=tuple(fold_scores))
    mean = {
        "accuracy": float(np.mean([s.accuracy for s in fold_scores])),
        "auc": float(np.mean(fold_aucs)) if fold_aucs else None,
        "mcc": float(np.mean([s.mcc for s in fold_scores])),
        "fpr": float(np.mean([s.fpr for s in fold_scores])),
        "fnr": float(np.mean([s.fnr for s in fold_scores])),
    }
    return CrossValidationResult(fold_scores=fold_scores, aggregate=aggregate,
                                 mean=mean, records=records)


def transfer_evaluate(source: SceneGraphDataset, target: SceneGraphDataset,
                      run: TrainRun) -> tuple[Scores, Scores]:
    """Train on a source split, evaluate frozen on source-test and target.

    No domain adaptation happens; both datasets must share the actor and
    relation vocabularies.
    """
    if (source.actor_names != target.actor_names
            or source.relation_names != target.relation_names):
        raise VocabularyMismatch(
            "source and target datasets use different actor/relation vocabularies")
    labels = _checked_labels(source)
    train_idx, test_idx = stratified_indices(labels, run.train_ratio, run.seed)
    result = train_for_task(_subset(source, train_idx), run)
    scores_source = evaluate(result.model, _subset(source, test_idx))
    scores_target = evaluate(result.model, target)
    return scores_source, scores_target


# -- explainability ---------------------------------------------------------------


@dataclass
class FrameAttention:
    frame_index: int
    node_labels: list[str]
    alpha: list[float] | None


@dataclass
class ClipAttention:
    clip_id: str
    prediction: int
    label: int | None
    beta: list[float] | None
    frames: list[FrameAttention]


@dataclass
class AttentionDump:
    clips: list[ClipAttention]
    has_alpha: bool
    has_beta: bool


def explain(model: SceneGraphModel, sgd: SceneGraphDataset) -> AttentionDump:
    """Record pooling scores per node and temporal weights per frame.

    Models without a pooling layer or without attention-based temporal
    readout produce a partial dump with a warning.
    """
    has_alpha = model.pool is not None
    has_beta = model.config.temporal == "lstm_attn"
    if not has_alpha:
        log.warning("model has no pooling layer; node attention is unavailable")
    if not has_beta:
        log.warning("model temporal readout is %r; temporal attention is unavailable",
                    model.config.temporal)
    clips: list[ClipAttention] = []
    for clip in sgd.clips:
        batch = model.encode(clip.graphs)
        out = model.forward_sequence(batch)
        frames = []
        for t, graph in enumerate(clip.graphs):
            alpha = [float(v) for v in out.alphas[t]] if out.alphas is not None else None
            frames.append(FrameAttention(frame_index=graph.frame_index,
                                         node_labels=batch.node_labels[t],
                                         alpha=alpha))
        beta = [float(v) for v in out.beta] if out.beta is not None else None
        clips.append(ClipAttention(clip_id=clip.clip_id, prediction=out.label,
                                   label=clip.label, beta=beta, frames=frames))
    return AttentionDump(clips=clips, has_alpha=has_alpha, has_beta=has_beta)


ATTENTION_CSV_COLUMNS = ("clip_id", "frame_index", "node_label", "alpha",
                         "beta", "prediction", "label")


def write_attention_csv(dump: AttentionDump, path: str | Path) -> None:
    """One CSV row per node per frame; absent scores stay empty."""
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(ATTENTION_CSV_COLUMNS)
        for clip in dump.clips:
            for t, frame in enumerate(clip.frames):
                beta = (repr(clip.beta[t]) if clip.beta is not None else "")
                for i, node_label in enumerate(frame.node_labels):
                    alpha = (repr(frame.alpha[i]) if frame.alpha is not None else "")
                    writer.writerow([clip.clip_id, frame.frame_index, node_label,
                                     alpha, beta, clip.prediction,
                                     "" if clip.label is None else clip.label])
