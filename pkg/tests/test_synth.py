"""Synthetic scenario generator guarantees."""

from __future__ import annotations

import math

import pytest

from roadgraph.errors import ConfigError
from roadgraph.extraction import ExtractionConfig, extract_sequence
from roadgraph.synth import ScenarioConfig, generate_dataset
from roadgraph.datasets import save_dataset


def pairwise_min_distance(frame) -> float:
    points = [(0.0, 0.0)] + [(o.position[0], o.position[1]) for o in frame.objects]
    best = math.inf
    for i in range(len(points)):
        for j in range(i + 1, len(points)):
            dx = points[i][0] - points[j][0]
            dy = points[i][1] - points[j][1]
            best = min(best, math.hypot(dx, dy))
    return best


@pytest.fixture(scope="module")
def corpus():
    return generate_dataset(ScenarioConfig(n_safe=8, n_risky=8, frames=12), seed=33)


class TestSafeClips:
    def test_distances_above_threshold(self, corpus):
        for clip in corpus.clips:
            if clip.label != 0:
                continue
            for frame in clip.frames:
                assert pairwise_min_distance(frame) > 16.0

    def test_extraction_has_no_tight_bands(self, corpus):
        cfg = ExtractionConfig()
        for clip in corpus.clips:
            if clip.label != 0:
                continue
            for graph in extract_sequence(clip, cfg):
                assert all(e.relation != "Near_Collision" for e in graph.edges)


class TestRiskyClips:
    def test_final_frames_within_collision_distance(self, corpus):
        for clip in corpus.clips:
            if clip.label != 1:
                continue
            for frame in clip.frames[-3:]:
                approach = [o for o in frame.objects if o.id == "a0"]
                assert len(approach) == 1
                x, y, _ = approach[0].position
                assert math.hypot(x, y) <= 4.0

    def test_extraction_sees_near_collision(self, corpus):
        cfg = ExtractionConfig()
        for clip in corpus.clips:
            if clip.label != 1:
                continue
            graphs = extract_sequence(clip, cfg)
            for graph in graphs[-3:]:
                relations = {e.relation for e in graph.edges
                             if 0 in (e.src, e.dst)}
                assert "Near_Collision" in relations

    def test_approach_vehicle_is_car_one(self, corpus):
        cfg = ExtractionConfig()
        for clip in corpus.clips:
            if clip.label != 1:
                continue
            graph = extract_sequence(clip, cfg)[-1]
            approach = [n for n in graph.nodes
                        if n.attributes.get("source_id") == "a0"]
            assert approach and approach[0].label == "car_1"


class TestDeterminism:
    def test_same_seed_same_tree(self, tmp_path, corpus):
        other = generate_dataset(ScenarioConfig(n_safe=8, n_risky=8, frames=12), seed=33)
        assert other == corpus
        a, b = tmp_path / "a", tmp_path / "b"
        save_dataset(corpus, a)
        save_dataset(other, b)
        for path in sorted(a.rglob("*")):
            if path.is_file():
                twin = b / path.relative_to(a)
                assert path.read_bytes() == twin.read_bytes()

    def test_different_seed_differs(self, corpus):
        other = generate_dataset(ScenarioConfig(n_safe=8, n_risky=8, frames=12), seed=34)
        assert other != corpus


class TestConfigValidation:
    def test_too_few_frames(self):
        with pytest.raises(ConfigError):
            ScenarioConfig(frames=3).validate()

    def test_empty_corpus(self):
        with pytest.raises(ConfigError):
            ScenarioConfig(n_safe=0, n_risky=0).validate()
