"""End-to-end CLI behavior: subcommands, artifacts, exit codes."""

from __future__ import annotations

import json
from pathlib import Path

import pytest

from roadgraph.cli import main
from roadgraph.extraction import load_scenegraph_dataset

SCENARIO = {"name": "cli-toy", "n_safe": 4, "n_risky": 4, "frames": 8}
LEARNING = {
    "model": {"layer_sizes": [8, 8], "lstm_hidden": 8, "dropout": 0.0},
    "training": {"epochs": 2, "learning_rate": 0.01, "seed": 3},
}


@pytest.fixture(scope="module")
def workspace(tmp_path_factory):
    root = tmp_path_factory.mktemp("cli")
    scenario = root / "scenario.json"
    scenario.write_text(json.dumps(SCENARIO))
    learning = root / "learning.json"
    learning.write_text(json.dumps(LEARNING))
    dataset_dir = root / "dataset"
    sgd_path = root / "graphs.jsonl"
    assert main(["synth", "--config", str(scenario),
                 "--out", str(dataset_dir), "--seed", "1"]) == 0
    assert main(["extract", "--dataset", str(dataset_dir),
                 "--out", str(sgd_path)]) == 0
    return {"root": root, "scenario": scenario, "learning": learning,
            "dataset_dir": dataset_dir, "sgd": sgd_path}


@pytest.fixture(scope="module")
def trained(workspace):
    out = workspace["root"] / "train"
    code = main(["train", "--dataset", str(workspace["sgd"]),
                 "--config", str(workspace["learning"]), "--out", str(out)])
    assert code == 0
    return out


class TestSynthAndExtract:
    def test_extract_output_loadable(self, workspace):
        sgd = load_scenegraph_dataset(workspace["sgd"])
        assert len(sgd.clips) == 8
        assert sgd.meta["name"] == "cli-toy"

    def test_extract_rerun_byte_identical(self, workspace):
        again = workspace["root"] / "graphs2.jsonl"
        assert main(["extract", "--dataset", str(workspace["dataset_dir"]),
                     "--out", str(again)]) == 0
        assert again.read_bytes() == workspace["sgd"].read_bytes()

    def test_synth_rerun_byte_identical(self, workspace, tmp_path):
        other = tmp_path / "dataset2"
        assert main(["synth", "--config", str(workspace["scenario"]),
                     "--out", str(other), "--seed", "1"]) == 0
        originals = sorted(p for p in workspace["dataset_dir"].rglob("*") if p.is_file())
        for path in originals:
            twin = other / path.relative_to(workspace["dataset_dir"])
            assert path.read_bytes() == twin.read_bytes()


class TestTrainEvaluate:
    def test_artifacts_exist(self, trained):
        assert (trained / "checkpoint.json").exists()
        assert (trained / "results.json").exists()
        assert (trained / "metrics.jsonl").exists()

    def test_results_structure(self, trained):
        results = json.loads((trained / "results.json").read_text())
        assert results["task"] == "sequence"
        assert len(results["epoch_losses"]) == 2
        assert "final_train" in results

    def test_metrics_lines_parse(self, trained):
        lines = (trained / "metrics.jsonl").read_text().strip().splitlines()
        for line in lines:
            entry = json.loads(line)
            assert "epoch" in entry and "loss" in entry

    def test_evaluate_writes_scores(self, workspace, trained):
        out = workspace["root"] / "eval"
        code = main(["evaluate", "--dataset", str(workspace["sgd"]),
                     "--checkpoint", str(trained / "checkpoint.json"),
                     "--out", str(out)])
        assert code == 0
        scores = json.loads((out / "results.json").read_text())["scores"]
        assert set(scores) >= {"accuracy", "auc", "mcc", "fpr", "fnr", "confusion"}

    def test_folds_flag_adds_cv_results(self, workspace, tmp_path):
        out = tmp_path / "cv"
        code = main(["train", "--dataset", str(workspace["sgd"]),
                     "--config", str(workspace["learning"]),
                     "--folds", "2", "--out", str(out)])
        assert code == 0
        results = json.loads((out / "results.json").read_text())
        assert results["folds"] == 2
        assert "mean" in results and "aggregate" in results
        assert len(results["aggregate"]["per_fold"]) == 2


class TestTransferExplainVisualize:
    def test_self_transfer_delta_zero(self, workspace, tmp_path):
        out = tmp_path / "transfer"
        code = main(["transfer", "--dataset", str(workspace["sgd"]),
                     "--target", str(workspace["sgd"]),
                     "--config", str(workspace["learning"]),
                     "--out", str(out)])
        assert code == 0
        results = json.loads((out / "results.json").read_text())
        assert "accuracy_delta" in results

    def test_explain_writes_csv(self, workspace, trained, tmp_path):
        out = tmp_path / "explain"
        code = main(["explain", "--dataset", str(workspace["sgd"]),
                     "--checkpoint", str(trained / "checkpoint.json"),
                     "--out", str(out)])
        assert code == 0
        header = (out / "attention.csv").read_text().splitlines()[0]
        assert header == "clip_id,frame_index,node_label,alpha,beta,prediction,label"

    def test_visualize_single_frame(self, workspace, tmp_path):
        sgd = load_scenegraph_dataset(workspace["sgd"])
        clip_id = sgd.clips[0].clip_id
        out = tmp_path / "frame.dot"
        code = main(["visualize", "--dataset", str(workspace["sgd"]),
                     "--clip", clip_id, "--frame", "0", "--out", str(out)])
        assert code == 0
        assert out.read_text().startswith("digraph")

    def test_visualize_all_frames(self, workspace, tmp_path):
        sgd = load_scenegraph_dataset(workspace["sgd"])
        clip_id = sgd.clips[0].clip_id
        out = tmp_path / "dots"
        code = main(["visualize", "--dataset", str(workspace["sgd"]),
                     "--clip", clip_id, "--all", "--out", str(out)])
        assert code == 0
        assert len(list(out.glob("*.dot"))) == SCENARIO["frames"]


class TestExitCodes:
    def test_image_variant_without_calibration(self, tmp_path):
        root = tmp_path / "imgset"
        root.mkdir()
        (root / "manifest.json").write_text(
            json.dumps({"variant": "image", "units": "feet", "name": "img"}))
        clip = root / "c0"
        clip.mkdir()
        (clip / "frames.jsonl").write_text(json.dumps(
            {"frame_index": 0, "detections": [
                {"class": "car", "bbox": [10, 10, 40, 40], "confidence": 0.9}]}) + "\n")
        code = main(["extract", "--dataset", str(root),
                     "--out", str(tmp_path / "out.jsonl")])
        assert code == 2

    def test_missing_dataset_is_data_error(self, tmp_path):
        code = main(["extract", "--dataset", str(tmp_path / "absent"),
                     "--out", str(tmp_path / "out.jsonl")])
        assert code == 3

    def test_unknown_flag_is_config_error(self):
        assert main(["extract", "--nope"]) == 2

    def test_missing_clip_is_data_error(self, workspace, tmp_path):
        code = main(["visualize", "--dataset", str(workspace["sgd"]),
                     "--clip", "ghost", "--out", str(tmp_path / "g.dot")])
        assert code == 3

    def test_bad_model_config_is_config_error(self, workspace, tmp_path):
        bad = tmp_path / "bad_model.json"
        bad.write_text(json.dumps({"pool_ratio": 0.0}))
        code = main(["train", "--dataset", str(workspace["sgd"]),
                     "--model-config", str(bad), "--out", str(tmp_path / "t")])
        assert code == 2
