"""On-disk and in-memory driving-clip dataset model.

A dataset directory holds ``manifest.json`` plus one subdirectory per
clip, each with ``frames.jsonl`` (one frame per line) and an optional
``label.json``.  Frames either carry ground-truth object states or 2D
detections; the manifest declares which.  All distances are stored in
feet; meter-unit sources are converted on ingestion (3.28084 ft/m).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .errors import (
    DegenerateClasses,
    InvalidFoldCount,
    LabelMissing,
    NotFound,
    ParseError,
    SchemaError,
)

FEET_PER_METER = 3.28084

VARIANT_STATE = "state"
VARIANT_IMAGE = "image"

LIGHT_STATES = ("red", "yellow", "green", "off")


@dataclass(frozen=True)
class ObjectState:
    """One road actor's ground-truth state within a frame (ego frame, feet)."""

    id: str
    actor_type: str
    position: tuple[float, float, float]
    yaw: float = 0.0
    velocity: tuple[float, float] = (0.0, 0.0)
    lane_assignment: str | None = None
    light_status: str | None = None
    sign_value: float | None = None


@dataclass(frozen=True)
class Detection:
    """A 2D detector output: class label, pixel bbox, confidence."""

    class_label: str
    bbox: tuple[float, float, float, float]
    confidence: float = 1.0


@dataclass(frozen=True)
class FrameRecord:
    frame_index: int
    objects: tuple[ObjectState, ...] | None = None
    detections: tuple[Detection, ...] | None = None

    @property
    def variant(self) -> str:
        return VARIANT_STATE if self.objects is not None else VARIANT_IMAGE


@dataclass(frozen=True)
class Clip:
    clip_id: str
    frames: tuple[FrameRecord, ...]
    label: int | None = None
    metadata: dict = field(default_factory=dict)


@dataclass(frozen=True)
class Dataset:
    clips: tuple[Clip, ...]
    variant: str
    units: str = "feet"
    name: str = ""

    def labels(self) -> list[int]:
        out = []
        for clip in self.clips:
            if clip.label is None:
                raise LabelMissing(f"clip {clip.clip_id!r} has no label")
            out.append(clip.label)
        return out


@dataclass(frozen=True)
class SplitPlan:
    k: int
    seed: int
    assignments: dict[str, int]

    def fold_clip_ids(self, fold: int) -> list[str]:
        return sorted(cid for cid, f in self.assignments.items() if f == fold)


def _normalize_yaw(yaw: float) -> float:
    return (yaw + 180.0) % 360.0 - 180.0


def _parse_object(entry: dict, scale: float) -> ObjectState:
    pos = entry["position"]
    vel = entry.get("velocity", [0.0, 0.0])
    position = (float(pos[0]) * scale, float(pos[1]) * scale, float(pos[2]) * scale)
    if not all(math.isfinite(c) for c in position):
        raise ValueError(f"non-finite position {position}")
    light = entry.get("light")
    if light is not None and light not in LIGHT_STATES:
        raise ValueError(f"unknown light status {light!r}")
    return ObjectState(
        id=str(entry["id"]),
        actor_type=str(entry["actor_type"]),
        position=position,
        yaw=_normalize_yaw(float(entry.get("yaw", 0.0))),
        velocity=(float(vel[0]) * scale, float(vel[1]) * scale),
        lane_assignment=entry.get("lane"),
        light_status=light,
        sign_value=entry.get("sign"),
    )


def _parse_detection(entry: dict) -> Detection:
    x0, y0, x1, y1 = (float(v) for v in entry["bbox"])
    if not (x0 < x1 and y0 < y1):
        raise ValueError(f"degenerate bbox {entry['bbox']}")
    conf = float(entry.get("confidence", 1.0))
    if not 0.0 <= conf <= 1.0:
        raise ValueError(f"confidence {conf} outside [0, 1]")
    return Detection(class_label=str(entry["class"]), bbox=(x0, y0, x1, y1), confidence=conf)


def _parse_frame(entry: dict, variant: str, scale: float) -> FrameRecord:
    idx = int(entry["frame_index"])
    if idx < 0:
        raise ValueError(f"negative frame_index {idx}")
    if variant == VARIANT_STATE:
        if "objects" not in entry:
            raise SchemaError("state-variant frame without 'objects'")
        objects = tuple(_parse_object(o, scale) for o in entry["objects"])
        return FrameRecord(frame_index=idx, objects=objects)
    if "detections" not in entry:
        raise SchemaError("image-variant frame without 'detections'")
    detections = tuple(_parse_detection(d) for d in entry["detections"])
    return FrameRecord(frame_index=idx, detections=detections)


def load_dataset(path: str | Path, variant: str | None = None) -> Dataset:
    """Load a dataset directory; clips sorted by id, frames by index.

    ``variant`` overrides the manifest declaration when given; a clip
    whose frames disagree with the declared variant raises SchemaError.
    """
    root = Path(path)
    if not root.is_dir():
        raise NotFound(f"dataset directory not found: {root}")
    manifest_path = root / "manifest.json"
    if not manifest_path.exists():
        raise NotFound(f"manifest.json not found under {root}")
    manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
    declared = manifest.get("variant", VARIANT_STATE)
    if variant is not None and variant != declared:
        raise SchemaError(
            f"requested variant {variant!r} but manifest declares {declared!r}")
    units = manifest.get("units", "feet")
    if units not in ("feet", "meters"):
        raise SchemaError(f"unknown units {units!r}")
    scale = FEET_PER_METER if units == "meters" else 1.0

    clips = []
    for clip_dir in sorted(p for p in root.iterdir() if p.is_dir()):
        frames_path = clip_dir / "frames.jsonl"
        if not frames_path.exists():
            raise NotFound(f"frames.jsonl missing in clip {clip_dir.name!r}")
        frames = []
        with frames_path.open(encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                line = line.strip()
                if not line:
                    continue
                try:
                    entry = json.loads(line)
                    frames.append(_parse_frame(entry, declared, scale))
                except SchemaError:
                    raise
                except (ValueError, KeyError, TypeError) as exc:
                    raise ParseError(
                        f"clip {clip_dir.name!r} frames.jsonl line {lineno}: {exc}") from exc
        frames.sort(key=lambda f: f.frame_index)
        for prev, cur in zip(frames, frames[1:]):
            if cur.frame_index <= prev.frame_index:
                raise ParseError(
                    f"clip {clip_dir.name!r}: frame_index {cur.frame_index} not strictly increasing")
        if not frames:
            raise ParseError(f"clip {clip_dir.name!r} has no frames")

        label = None
        metadata: dict = {}
        label_path = clip_dir / "label.json"
        if label_path.exists():
            label_entry = json.loads(label_path.read_text(encoding="utf-8"))
            label = label_entry.get("label")
            if label not in (0, 1, None):
                raise SchemaError(
                    f"clip {clip_dir.name!r}: label must be 0 or 1, got {label!r}")
            metadata = {k: v for k, v in label_entry.items() if k != "label"}
        clips.append(Clip(clip_id=clip_dir.name, frames=tuple(frames),
                          label=label, metadata=metadata))

    return Dataset(clips=tuple(clips), variant=declared, units="feet",
                   name=manifest.get("name", root.name))


def _object_to_json(o: ObjectState) -> dict:
    entry: dict = {
        "id": o.id,
        "actor_type": o.actor_type,
        "position": list(o.position),
        "yaw": o.yaw,
        "velocity": list(o.velocity),
    }
    if o.lane_assignment is not None:
        entry["lane"] = o.lane_assignment
    if o.light_status is not None:
        entry["light"] = o.light_status
    if o.sign_value is not None:
        entry["sign"] = o.sign_value
    return entry


def _detection_to_json(d: Detection) -> dict:
    return {"class": d.class_label, "bbox": list(d.bbox), "confidence": d.confidence}


def _frame_to_json(f: FrameRecord) -> dict:
    if f.objects is not None:
        return {"frame_index": f.frame_index,
                "objects": [_object_to_json(o) for o in f.objects]}
    return {"frame_index": f.frame_index,
            "detections": [_detection_to_json(d) for d in f.detections]}


def save_dataset(dataset: Dataset, path: str | Path) -> None:
    """Write a dataset back to the on-disk layout (always feet)."""
    root = Path(path)
    root.mkdir(parents=True, exist_ok=True)
    manifest = {"variant": dataset.variant, "units": "feet", "name": dataset.name}
    (root / "manifest.json").write_text(
        json.dumps(manifest, sort_keys=True) + "\n", encoding="utf-8")
    for clip in dataset.clips:
        clip_dir = root / clip.clip_id
        clip_dir.mkdir(exist_ok=True)
        lines = [json.dumps(_frame_to_json(f), sort_keys=True) for f in clip.frames]
        (clip_dir / "frames.jsonl").write_text("\n".join(lines) + "\n", encoding="utf-8")
        if clip.label is not None or clip.metadata:
            entry = dict(clip.metadata)
            if clip.label is not None:
                entry["label"] = clip.label
            (clip_dir / "label.json").write_text(
                json.dumps(entry, sort_keys=True) + "\n", encoding="utf-8")


def _round_half_away(x: float) -> int:
    return int(math.floor(x + 0.5)) if x >= 0 else -int(math.floor(-x + 0.5))


def _by_class(dataset: Dataset) -> tuple[list[Clip], list[Clip]]:
    safe, risky = [], []
    for clip in dataset.clips:
        if clip.label is None:
            raise LabelMissing(f"clip {clip.clip_id!r} has no label")
        (risky if clip.label == 1 else safe).append(clip)
    return safe, risky


def stratified_indices(labels: list[int], train_ratio: float,
                       seed: int) -> tuple[list[int], list[int]]:
    """Index-level stratified split usable on any labeled clip list.

    Per-class train counts are rounded half away from zero, then the
    larger class absorbs any off-by-one so the total train size equals
    round(train_ratio * N).  Deterministic for a given seed.
    """
    if not 0.0 < train_ratio < 1.0:
        raise ValueError(f"train_ratio must be in (0, 1), got {train_ratio}")
    by_class = {0: [i for i, y in enumerate(labels) if y == 0],
                1: [i for i, y in enumerate(labels) if y == 1]}
    n = len(labels)
    target_total = _round_half_away(train_ratio * n)
    counts = {c: _round_half_away(train_ratio * len(idx)) for c, idx in by_class.items()}
    larger = 0 if len(by_class[0]) >= len(by_class[1]) else 1
    counts[larger] += target_total - (counts[0] + counts[1])
    for c in (0, 1):
        counts[c] = min(max(counts[c], 0), len(by_class[c]))

    rng = np.random.default_rng(seed)
    train, test = [], []
    for c in (0, 1):
        members = by_class[c]
        order = rng.permutation(len(members))
        chosen = {members[i] for i in order[:counts[c]].tolist()}
        train.extend(i for i in members if i in chosen)
        test.extend(i for i in members if i not in chosen)
    return sorted(train), sorted(test)


def fold_indices(labels: list[int], k: int, seed: int) -> list[int]:
    """Stratified fold id per index: seeded per-class round-robin."""
    if k < 2 or k > len(labels):
        raise InvalidFoldCount(f"fold count {k} invalid for {len(labels)} clips")
    rng = np.random.default_rng(seed)
    folds = [0] * len(labels)
    offset = 0
    for c in (1, 0):
        members = [i for i, y in enumerate(labels) if y == c]
        order = rng.permutation(len(members))
        for slot, j in enumerate(order):
            folds[members[j]] = (slot + offset) % k
        offset += len(members)
    return folds


def stratified_split(dataset: Dataset, train_ratio: float, seed: int) -> tuple[Dataset, Dataset]:
    """Split clips into train/test preserving per-class proportions."""
    train_idx, test_idx = stratified_indices(dataset.labels(), train_ratio, seed)
    train = tuple(dataset.clips[i] for i in train_idx)
    test = tuple(dataset.clips[i] for i in test_idx)
    return (replace(dataset, clips=train), replace(dataset, clips=test))


def kfold_plan(dataset: Dataset, k: int, seed: int) -> SplitPlan:
    """Assign every clip to one of k stratified folds (seeded round-robin)."""
    folds = fold_indices(dataset.labels(), k, seed)
    assignments = {clip.clip_id: fold for clip, fold in zip(dataset.clips, folds)}
    return SplitPlan(k=k, seed=seed, assignments=assignments)


def split_by_fold(dataset: Dataset, plan: SplitPlan, fold: int) -> tuple[Dataset, Dataset]:
    """Materialize (train, test) datasets for one fold of a plan."""
    test_ids = set(plan.fold_clip_ids(fold))
    train = tuple(c for c in dataset.clips if c.clip_id not in test_ids)
    test = tuple(c for c in dataset.clips if c.clip_id in test_ids)
    return replace(dataset, clips=train), replace(dataset, clips=test)


def downsample(dataset: Dataset, seed: int) -> Dataset:
    """Randomly cut the majority class down to the minority-class count."""
    safe, risky = _by_class(dataset)
    if len(safe) == len(risky):
        return dataset
    majority, minority = (safe, risky) if len(safe) > len(risky) else (risky, safe)
    rng = np.random.default_rng(seed)
    keep = set(rng.permutation(len(majority))[: len(minority)].tolist())
    kept_ids = {majority[i].clip_id for i in keep} | {c.clip_id for c in minority}
    clips = tuple(c for c in dataset.clips if c.clip_id in kept_ids)
    return replace(dataset, clips=clips)


def class_weights(dataset: Dataset) -> tuple[float, float]:
    """Inverse-frequency weights: w_c = N / (2 * N_c)."""
    safe, risky = _by_class(dataset)
    if not safe or not risky:
        raise DegenerateClasses("class weights need both classes present")
    n = len(safe) + len(risky)
    return n / (2.0 * len(safe)), n / (2.0 * len(risky))
