"""Synthetic driving-scenario generator for tests and demos.

Produces labeled state-variant datasets with two scripted behaviors:

* safe clips keep every inter-vehicle ground distance (including to the
  ego) above 16 ft in every frame;
* risky clips script one vehicle closing on the ego until it sits within
  4 ft for the final three frames.

Kinematics are linear with seeded Gaussian position noise; generation is
fully deterministic given (config, seed).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .datasets import Clip, Dataset, FrameRecord, ObjectState
from .errors import ConfigError, NotFound

SAFE_MIN_DISTANCE = 16.0
RISKY_FINAL_DISTANCE = 4.0
_FINAL_HOLD_FRAMES = 3


@dataclass(frozen=True)
class ScenarioConfig:
    """Knobs of the synthetic corpus."""

    name: str = "synth"
    n_safe: int = 60
    n_risky: int = 60
    frames: int = 20
    noise_sigma: float = 0.5
    lane_width: float = 12.0
    speed_scale: float = 1.0
    fps: float = 10.0
    min_bystanders: int = 1
    max_bystanders: int = 2

    def validate(self) -> "ScenarioConfig":
        if self.frames < _FINAL_HOLD_FRAMES + 2:
            raise ConfigError(f"need at least {_FINAL_HOLD_FRAMES + 2} frames")
        if self.n_safe < 0 or self.n_risky < 0 or self.n_safe + self.n_risky == 0:
            raise ConfigError("clip counts must be non-negative and not both zero")
        if not 0 <= self.min_bystanders <= self.max_bystanders:
            raise ConfigError("bystander bounds are inconsistent")
        return self


def scenario_config_from_json(entry: dict) -> ScenarioConfig:
    base = ScenarioConfig()
    cfg = ScenarioConfig(
        name=entry.get("name", base.name),
        n_safe=int(entry.get("n_safe", base.n_safe)),
        n_risky=int(entry.get("n_risky", base.n_risky)),
        frames=int(entry.get("frames", base.frames)),
        noise_sigma=float(entry.get("noise_sigma", base.noise_sigma)),
        lane_width=float(entry.get("lane_width", base.lane_width)),
        speed_scale=float(entry.get("speed_scale", base.speed_scale)),
        fps=float(entry.get("fps", base.fps)),
        min_bystanders=int(entry.get("min_bystanders", base.min_bystanders)),
        max_bystanders=int(entry.get("max_bystanders", base.max_bystanders)),
    )
    return cfg.validate()


def load_scenario_config(path: str | Path) -> ScenarioConfig:
    p = Path(path)
    if not p.exists():
        raise NotFound(f"scenario config not found: {p}")
    return scenario_config_from_json(json.loads(p.read_text(encoding="utf-8")))


@dataclass
class _Track:
    """Linear trajectory of one vehicle, positions per frame."""

    vid: str
    xs: np.ndarray
    ys: np.ndarray
    vx: float
    vy: float


def _lateral_slot(rng: np.random.Generator, cfg: ScenarioConfig) -> float:
    lane = rng.integers(-1, 2)  # left, middle, right
    return lane * cfg.lane_width + rng.uniform(-1.0, 1.0)


def _bystander_track(rng: np.random.Generator, cfg: ScenarioConfig, slot: int,
                     vid: str) -> _Track:
    """A cruising vehicle parked in a longitudinal slot ahead of the ego."""
    spacing = 20.0 + 12.0 * max(cfg.speed_scale, 1.0)
    y0 = 21.0 + spacing * slot + rng.uniform(0.0, 4.0)
    x0 = _lateral_slot(rng, cfg)
    vy = rng.uniform(-0.15, 0.15) * cfg.speed_scale  # ft per frame, relative
    t = np.arange(cfg.frames, dtype=np.float64)
    return _Track(vid=vid, xs=np.full(cfg.frames, x0), ys=y0 + vy * t,
                  vx=0.0, vy=vy * cfg.fps)


def _min_pairwise_distance(tracks: list[_Track]) -> float:
    """Smallest distance over all frames among vehicles and to the ego."""
    best = np.inf
    for i, a in enumerate(tracks):
        best = min(best, float(np.min(np.hypot(a.xs, a.ys))))  # to ego at origin
        for b in tracks[i + 1:]:
            best = min(best, float(np.min(np.hypot(a.xs - b.xs, a.ys - b.ys))))
    return best


def _safe_tracks(rng: np.random.Generator, cfg: ScenarioConfig) -> list[_Track]:
    # Rejection keeps the >16 ft guarantee exact even after noise.
    for _ in range(200):
        count = int(rng.integers(cfg.min_bystanders, cfg.max_bystanders + 1))
        tracks = [_bystander_track(rng, cfg, slot, f"b{slot}")
                  for slot in range(count)]
        tracks = [_apply_noise(t, rng, cfg) for t in tracks]
        if _min_pairwise_distance(tracks) > SAFE_MIN_DISTANCE + 0.05:
            return tracks
    raise ConfigError("could not generate a safe clip; noise_sigma too large"
                      " for the configured geometry")


def _apply_noise(track: _Track, rng: np.random.Generator,
                 cfg: ScenarioConfig) -> _Track:
    if cfg.noise_sigma <= 0:
        return track
    xs = track.xs + rng.normal(0.0, cfg.noise_sigma, cfg.frames)
    ys = track.ys + rng.normal(0.0, cfg.noise_sigma, cfg.frames)
    return _Track(vid=track.vid, xs=xs, ys=ys, vx=track.vx, vy=track.vy)


def _risky_tracks(rng: np.random.Generator, cfg: ScenarioConfig) -> list[_Track]:
    """One closing vehicle, plus distant bystanders."""
    frames = cfg.frames
    approach_end = frames - _FINAL_HOLD_FRAMES
    y_start = rng.uniform(28.0, 38.0)
    y_final = rng.uniform(1.5, 3.5)
    ys = np.empty(frames)
    ramp = np.linspace(y_start, y_final, approach_end)
    ys[:approach_end] = ramp
    ys[approach_end:] = y_final
    xs = np.full(frames, rng.uniform(-0.8, 0.8))
    vy_frame = (y_final - y_start) / max(approach_end - 1, 1)
    approach = _Track(vid="a0", xs=xs, ys=ys, vx=0.0, vy=vy_frame * cfg.fps)
    approach = _apply_noise(approach, rng, cfg)
    # The closing guarantee is hard: clamp the held frames under 4 ft.
    hold = slice(frames - _FINAL_HOLD_FRAMES, frames)
    approach.ys[hold] = np.clip(approach.ys[hold], 0.5, RISKY_FINAL_DISTANCE - 0.1)
    approach.xs[hold] = np.clip(approach.xs[hold], -1.5, 1.5)

    tracks = [approach]
    extra = int(rng.integers(0, cfg.max_bystanders + 1))
    for slot in range(extra):
        far = _bystander_track(rng, cfg, slot + 2, f"b{slot + 2}")
        tracks.append(_apply_noise(far, rng, cfg))
    return tracks


def _track_to_states(tracks: list[_Track], frame: int, cfg: ScenarioConfig):
    states = []
    for track in tracks:
        states.append(ObjectState(
            id=track.vid,
            actor_type="car",
            position=(round(float(track.xs[frame]), 6),
                      round(float(track.ys[frame]), 6), 0.0),
            yaw=0.0,
            velocity=(round(track.vx, 6), round(track.vy, 6)),
        ))
    return states


def generate_dataset(cfg: ScenarioConfig, seed: int) -> Dataset:
    """Build the full labeled corpus in memory."""
    cfg.validate()
    rng = np.random.default_rng(seed)
    clips = []
    for kind, count, label in (("safe", cfg.n_safe, 0), ("risky", cfg.n_risky, 1)):
        for i in range(count):
            tracks = (_safe_tracks(rng, cfg) if label == 0
                      else _risky_tracks(rng, cfg))
            frames = tuple(
                FrameRecord(frame_index=t,
                            objects=tuple(_track_to_states(tracks, t, cfg)))
                for t in range(cfg.frames))
            clips.append(Clip(clip_id=f"{kind}_{i:04d}", frames=frames, label=label))
    clips.sort(key=lambda c: c.clip_id)
    return Dataset(clips=tuple(clips), variant="state", units="feet", name=cfg.name)
