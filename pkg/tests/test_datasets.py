"""Dataset ingestion, splitting, folding, downsampling and weighting."""

from __future__ import annotations

import json
from collections import Counter
from pathlib import Path

import numpy as np
import pytest

from roadgraph.datasets import (
    Clip,
    Dataset,
    FrameRecord,
    ObjectState,
    class_weights,
    downsample,
    kfold_plan,
    load_dataset,
    save_dataset,
    stratified_split,
)
from roadgraph.errors import (
    DegenerateClasses,
    InvalidFoldCount,
    LabelMissing,
    NotFound,
    ParseError,
    SchemaError,
)


def write_clip(root: Path, clip_id: str, frames: list[dict], label=None) -> None:
    clip_dir = root / clip_id
    clip_dir.mkdir(parents=True)
    lines = [json.dumps(f) for f in frames]
    (clip_dir / "frames.jsonl").write_text("\n".join(lines) + "\n")
    if label is not None:
        (clip_dir / "label.json").write_text(json.dumps({"label": label}))


def state_frame(index: int, objects=()) -> dict:
    return {"frame_index": index, "objects": list(objects)}


def obj(oid="v1", pos=(0.0, 10.0, 0.0), actor="car", **extra) -> dict:
    entry = {"id": oid, "actor_type": actor, "position": list(pos),
             "yaw": 0.0, "velocity": [0.0, 0.0]}
    entry.update(extra)
    return entry


def make_dataset_dir(tmp_path: Path, units="feet") -> Path:
    root = tmp_path / "ds"
    root.mkdir()
    (root / "manifest.json").write_text(
        json.dumps({"variant": "state", "units": units, "name": "toy"}))
    return root


def labeled_dataset(n_safe: int, n_risky: int) -> Dataset:
    clips = []
    frame = FrameRecord(frame_index=0, objects=())
    for i in range(n_safe):
        clips.append(Clip(clip_id=f"s{i:03d}", frames=(frame,), label=0))
    for i in range(n_risky):
        clips.append(Clip(clip_id=f"r{i:03d}", frames=(frame,), label=1))
    return Dataset(clips=tuple(clips), variant="state", name="mem")


class TestLoadDataset:
    def test_identity_ingestion(self, tmp_path):
        root = make_dataset_dir(tmp_path)
        for cid in ("clip_b", "clip_a"):
            write_clip(root, cid, [state_frame(i, [obj()]) for i in range(3)], label=0)
        ds = load_dataset(root)
        assert [c.clip_id for c in ds.clips] == ["clip_a", "clip_b"]
        assert all(len(c.frames) == 3 for c in ds.clips)
        assert ds.clips[0].frames[0].objects[0].position == (0.0, 10.0, 0.0)

    def test_meter_conversion(self, tmp_path):
        root = make_dataset_dir(tmp_path, units="meters")
        write_clip(root, "c0", [state_frame(0, [obj(pos=(1.0, 2.0, 0.0))])])
        ds = load_dataset(root)
        position = ds.clips[0].frames[0].objects[0].position
        assert position == pytest.approx((3.28084, 6.56168, 0.0), abs=1e-12)

    def test_missing_label_is_none(self, tmp_path):
        root = make_dataset_dir(tmp_path)
        write_clip(root, "c0", [state_frame(0)])
        ds = load_dataset(root)
        assert ds.clips[0].label is None

    def test_missing_directory(self, tmp_path):
        with pytest.raises(NotFound):
            load_dataset(tmp_path / "nope")

    def test_malformed_line_names_clip_and_line(self, tmp_path):
        root = make_dataset_dir(tmp_path)
        clip_dir = root / "bad_clip"
        clip_dir.mkdir()
        (clip_dir / "frames.jsonl").write_text(
            json.dumps(state_frame(0)) + "\n{not json}\n")
        with pytest.raises(ParseError) as err:
            load_dataset(root)
        assert "bad_clip" in str(err.value)
        assert "line 2" in str(err.value)

    def test_mixed_variant_rejected(self, tmp_path):
        root = make_dataset_dir(tmp_path)
        write_clip(root, "c0", [
            {"frame_index": 0, "detections": [
                {"class": "car", "bbox": [0, 0, 4, 4], "confidence": 0.9}]}])
        with pytest.raises(SchemaError):
            load_dataset(root)

    def test_duplicate_frame_index_rejected(self, tmp_path):
        root = make_dataset_dir(tmp_path)
        write_clip(root, "c0", [state_frame(1), state_frame(1)])
        with pytest.raises(ParseError):
            load_dataset(root)

    def test_roundtrip_bit_identical(self, tmp_path):
        root = make_dataset_dir(tmp_path)
        write_clip(root, "c0", [state_frame(0, [obj(pos=(1.25, -3.5, 0.0))])], label=1)
        first = load_dataset(root)
        out1 = tmp_path / "out1"
        out2 = tmp_path / "out2"
        save_dataset(first, out1)
        save_dataset(load_dataset(out1), out2)
        for rel in ("manifest.json", "c0/frames.jsonl", "c0/label.json"):
            assert (out1 / rel).read_bytes() == (out2 / rel).read_bytes()


class TestStratifiedSplit:
    def test_per_class_rounding(self):
        # round(0.7*4)=3 risky and round(0.7*6)=4 safe in the train half.
        ds = labeled_dataset(6, 4)
        train, test = stratified_split(ds, 0.7, seed=0)
        train_labels = Counter(c.label for c in train.clips)
        test_labels = Counter(c.label for c in test.clips)
        assert train_labels == {0: 4, 1: 3}
        assert test_labels == {0: 2, 1: 1}

    def test_deterministic(self):
        ds = labeled_dataset(6, 4)
        a = stratified_split(ds, 0.7, seed=9)
        b = stratified_split(ds, 0.7, seed=9)
        assert [c.clip_id for c in a[0].clips] == [c.clip_id for c in b[0].clips]

    def test_single_class_still_splits(self):
        ds = labeled_dataset(10, 0)
        train, test = stratified_split(ds, 0.7, seed=1)
        assert len(train.clips) == 7
        assert len(test.clips) == 3

    def test_union_is_exact_partition(self):
        ds = labeled_dataset(7, 5)
        for seed in range(5):
            train, test = stratified_split(ds, 0.6, seed=seed)
            combined = sorted(c.clip_id for c in train.clips + test.clips)
            assert combined == sorted(c.clip_id for c in ds.clips)

    def test_unlabeled_clip_rejected(self):
        clip = Clip(clip_id="x", frames=(FrameRecord(0, objects=()),))
        ds = Dataset(clips=(clip,), variant="state")
        with pytest.raises(LabelMissing):
            stratified_split(ds, 0.5, seed=0)


class TestKFold:
    def test_balanced_folds(self):
        ds = labeled_dataset(5, 5)
        plan = kfold_plan(ds, 5, seed=3)
        for fold in range(5):
            ids = plan.fold_clip_ids(fold)
            labels = Counter(0 if i.startswith("s") else 1 for i in ids)
            assert labels == {0: 1, 1: 1}

    def test_small_even_split(self):
        ds = labeled_dataset(2, 2)
        plan = kfold_plan(ds, 2, seed=0)
        assert sorted(len(plan.fold_clip_ids(f)) for f in range(2)) == [2, 2]

    def test_too_many_folds(self):
        ds = labeled_dataset(5, 5)
        with pytest.raises(InvalidFoldCount):
            kfold_plan(ds, 11, seed=0)

    def test_stratification_within_one_clip(self):
        rng = np.random.default_rng(0)
        for _ in range(10):
            n_safe = int(rng.integers(5, 20))
            n_risky = int(rng.integers(5, 20))
            k = int(rng.integers(2, 5))
            ds = labeled_dataset(n_safe, n_risky)
            plan = kfold_plan(ds, k, seed=int(rng.integers(1000)))
            risky_counts = [sum(1 for i in plan.fold_clip_ids(f) if i.startswith("r"))
                            for f in range(k)]
            assert max(risky_counts) - min(risky_counts) <= 1

    def test_exhaustive_and_disjoint(self):
        ds = labeled_dataset(6, 4)
        plan = kfold_plan(ds, 3, seed=7)
        seen = [i for f in range(3) for i in plan.fold_clip_ids(f)]
        assert sorted(seen) == sorted(c.clip_id for c in ds.clips)

    def test_deterministic(self):
        ds = labeled_dataset(6, 4)
        assert kfold_plan(ds, 3, seed=5) == kfold_plan(ds, 3, seed=5)


class TestDownsample:
    def test_majority_reduced(self):
        ds = labeled_dataset(8, 2)
        out = downsample(ds, seed=0)
        labels = Counter(c.label for c in out.clips)
        assert labels == {0: 2, 1: 2}

    def test_no_new_clips(self):
        ds = labeled_dataset(8, 2)
        out = downsample(ds, seed=0)
        original = {c.clip_id for c in ds.clips}
        assert all(c.clip_id in original for c in out.clips)

    def test_balanced_unchanged(self):
        ds = labeled_dataset(3, 3)
        assert downsample(ds, seed=0) == ds

    def test_deterministic(self):
        ds = labeled_dataset(9, 4)
        a = downsample(ds, seed=12)
        b = downsample(ds, seed=12)
        assert [c.clip_id for c in a.clips] == [c.clip_id for c in b.clips]


class TestClassWeights:
    def test_imbalanced(self):
        assert class_weights(labeled_dataset(8, 2)) == (0.625, 2.5)

    def test_balanced(self):
        assert class_weights(labeled_dataset(5, 5)) == (1.0, 1.0)

    def test_single_class(self):
        with pytest.raises(DegenerateClasses):
            class_weights(labeled_dataset(10, 0))

    def test_weight_balance_identity(self):
        for n_safe, n_risky in ((3, 9), (7, 2), (5, 5)):
            w0, w1 = class_weights(labeled_dataset(n_safe, n_risky))
            assert w0 * n_safe == pytest.approx(w1 * n_risky)
