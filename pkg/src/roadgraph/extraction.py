"""Frame-to-scene-graph conversion with a fully configurable rule surface.

Each frame becomes a typed multi-relational graph: an ego node, three
relative lane nodes (left/middle/right) and one node per detected or
ground-truth actor.  Edges carry one of three relation kinds:

* proximity   - distance bands (Near_Collision 4 ft ... Visible 25 ft),
  assigned cumulatively for every band whose threshold covers the
  ground-plane separation (inclusive), emitted in both directions;
* directional - 8-way bearing sectors, assigned inside a distance gate,
  each endpoint labeling the other from its own heading;
* belonging   - ``isIn`` edges from vehicles to lane nodes based on
  lateral offset against half the lane width, with an overlap margin
  that maps lane-changing vehicles to both lanes.

All rules, thresholds, actor vocabularies and pair eligibility lists
live in :class:`ExtractionConfig` and mirror the extraction_config.json
keys one-to-one.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

from .bev import BevCalibration, project_detection
from .datasets import Clip, Dataset, Detection, FrameRecord, ObjectState
from .errors import ConfigError, NotFound, SchemaError, UnknownActorClass

log = logging.getLogger(__name__)

EGO_LABEL = "ego_car"
LANE_LABELS = ("left_lane", "middle_lane", "right_lane")
IS_IN = "isIn"

DEFAULT_ACTOR_NAMES = ("car", "motorcycle", "bicycle", "pedestrian", "lane", "light", "sign")

DEFAULT_PROXIMITY_THRESHOLDS = (
    ("Near_Collision", 4.0),
    ("Super_Near", 7.0),
    ("Very_Near", 10.0),
    ("Near", 16.0),
    ("Visible", 25.0),
)

# Half-open bearing sectors over [-180, 180); 0 degrees is dead ahead and
# +90 is due right of the observer.
DEFAULT_DIRECTIONAL_THRESHOLDS = (
    ("Front_Right", (0.0, 45.0)),
    ("Right_Front", (45.0, 90.0)),
    ("Right_Rear", (90.0, 135.0)),
    ("Rear_Right", (135.0, 180.0)),
    ("Front_Left", (-45.0, 0.0)),
    ("Left_Front", (-90.0, -45.0)),
    ("Left_Rear", (-135.0, -90.0)),
    ("Rear_Left", (-180.0, -135.0)),
)

_MOVING = ("car", "motorcycle", "bicycle", "pedestrian")

DEFAULT_ALIASES = {
    "car": ["car", "truck", "bus", "vehicle.tesla.model3", "vehicle.audi.a2",
            "vehicle.bmw.grandtourer", "vehicle.lincoln.mkz2017",
            "vehicle.mustang.mustang", "vehicle.nissan.micra"],
    "motorcycle": ["motorcycle", "motorbike", "vehicle.harley-davidson.low_rider",
                   "vehicle.kawasaki.ninja", "vehicle.yamaha.yzf"],
    "bicycle": ["bicycle", "bike", "vehicle.bh.crossbike", "vehicle.diamondback.century",
                "vehicle.gazelle.omafiets"],
    "pedestrian": ["pedestrian", "person", "walker.pedestrian.0001",
                   "walker.pedestrian.0002"],
    "lane": ["lane"],
    "light": ["light", "traffic light", "traffic.traffic_light"],
    "sign": ["sign", "stop sign", "traffic.stop", "traffic.speed_limit.30",
             "traffic.speed_limit.60", "traffic.speed_limit.90"],
}

# JSON keys for alias lists: "<short>_names" at the top level of the config.
_ALIAS_KEYS = {
    "car": "car_names",
    "motorcycle": "moto_names",
    "bicycle": "bicycle_names",
    "pedestrian": "pedestrian_names",
    "lane": "lane_names",
    "light": "light_names",
    "sign": "sign_names",
}


def _default_pairs(include_static: bool):
    pairs = []
    for i, a in enumerate(_MOVING):
        for b in _MOVING[i:]:
            pairs.append((a, b))
    if include_static:
        for a in _MOVING:
            pairs.append((a, "light"))
            pairs.append((a, "sign"))
    return tuple(pairs)


@dataclass(frozen=True)
class ExtractionConfig:
    """Complete parameter surface controlling scene-graph construction."""

    actor_names: tuple[str, ...] = DEFAULT_ACTOR_NAMES
    alias_lists: dict = field(default_factory=lambda: {k: list(v) for k, v in DEFAULT_ALIASES.items()})
    proximity_thresholds: tuple = DEFAULT_PROXIMITY_THRESHOLDS
    proximity_relation_list: tuple = field(default_factory=lambda: _default_pairs(True))
    directional_thresholds: tuple = DEFAULT_DIRECTIONAL_THRESHOLDS
    directional_relation_list: tuple = field(default_factory=lambda: _default_pairs(False))
    directional_max_distance: float = 16.0
    lane_threshold: float = 6.0
    lane_overlap_margin: float = 1.5
    ego_only: bool = False
    cumulative_proximity: bool = True
    # Restricts which proximity bands apply to pairs involving a type;
    # by default lights and signs only ever receive the loosest band.
    proximity_bands_by_type: dict = field(
        default_factory=lambda: {"light": ["Visible"], "sign": ["Visible"]})
    vehicle_actor_types: tuple[str, ...] = ("car", "motorcycle", "bicycle")

    @property
    def relation_names(self) -> tuple[str, ...]:
        names = [IS_IN]
        names.extend(name for name, _ in self.proximity_thresholds)
        names.extend(name for name, _ in self.directional_thresholds)
        return tuple(names)

    def validate(self) -> "ExtractionConfig":
        thresholds = [t for _, t in self.proximity_thresholds]
        if any(b <= a for a, b in zip(thresholds, thresholds[1:])):
            raise ConfigError("proximity thresholds must be strictly increasing")
        if self.lane_threshold <= 0:
            raise ConfigError("lane_threshold must be positive")
        spans = sorted((lo, hi) for _, (lo, hi) in self.directional_thresholds)
        cursor = -180.0
        for lo, hi in spans:
            if lo != cursor or hi <= lo:
                raise ConfigError(
                    "directional sectors must partition [-180, 180) with half-open intervals")
            cursor = hi
        if cursor != 180.0:
            raise ConfigError("directional sectors must cover [-180, 180)")
        return self


def extraction_config_to_json(cfg: ExtractionConfig) -> dict:
    entry = {
        "actor_names": list(cfg.actor_names),
        "relation_names": list(cfg.relation_names),
        "proximity_thresholds": [[n, t] for n, t in cfg.proximity_thresholds],
        "proximity_relation_list": [list(p) for p in cfg.proximity_relation_list],
        "directional_thresholds": [[n, [lo, hi]] for n, (lo, hi) in cfg.directional_thresholds],
        "directional_relation_list": [list(p) for p in cfg.directional_relation_list],
        "directional_max_distance": cfg.directional_max_distance,
        "lane_threshold": cfg.lane_threshold,
        "lane_overlap_margin": cfg.lane_overlap_margin,
        "ego_only": cfg.ego_only,
        "cumulative_proximity": cfg.cumulative_proximity,
        "proximity_bands_by_type": {k: list(v) for k, v in cfg.proximity_bands_by_type.items()},
        "vehicle_actor_types": list(cfg.vehicle_actor_types),
    }
    for actor, key in _ALIAS_KEYS.items():
        if actor in cfg.alias_lists:
            entry[key] = list(cfg.alias_lists[actor])
    return entry


def extraction_config_from_json(entry: dict) -> ExtractionConfig:
    base = ExtractionConfig()
    aliases = {k: list(v) for k, v in base.alias_lists.items()}
    for actor, key in _ALIAS_KEYS.items():
        if key in entry:
            aliases[actor] = list(entry[key])
    cfg = ExtractionConfig(
        actor_names=tuple(entry.get("actor_names", base.actor_names)),
        alias_lists=aliases,
        proximity_thresholds=tuple(
            (n, float(t)) for n, t in entry.get(
                "proximity_thresholds", base.proximity_thresholds)),
        proximity_relation_list=tuple(
            tuple(p) for p in entry.get(
                "proximity_relation_list", base.proximity_relation_list)),
        directional_thresholds=tuple(
            (n, (float(span[0]), float(span[1]))) for n, span in entry.get(
                "directional_thresholds", base.directional_thresholds)),
        directional_relation_list=tuple(
            tuple(p) for p in entry.get(
                "directional_relation_list", base.directional_relation_list)),
        directional_max_distance=float(
            entry.get("directional_max_distance", base.directional_max_distance)),
        lane_threshold=float(entry.get("lane_threshold", base.lane_threshold)),
        lane_overlap_margin=float(
            entry.get("lane_overlap_margin", base.lane_overlap_margin)),
        ego_only=bool(entry.get("ego_only", base.ego_only)),
        cumulative_proximity=bool(
            entry.get("cumulative_proximity", base.cumulative_proximity)),
        proximity_bands_by_type={
            k: list(v) for k, v in entry.get(
                "proximity_bands_by_type", base.proximity_bands_by_type).items()},
        vehicle_actor_types=tuple(
            entry.get("vehicle_actor_types", base.vehicle_actor_types)),
    )
    return cfg.validate()


def load_extraction_config(path: str | Path) -> ExtractionConfig:
    p = Path(path)
    if not p.exists():
        raise NotFound(f"extraction config not found: {p}")
    return extraction_config_from_json(json.loads(p.read_text(encoding="utf-8")))


# -- graph types ---------------------------------------------------------------


@dataclass(frozen=True)
class SceneGraphNode:
    node_id: int
    label: str
    actor_type: str
    attributes: dict = field(default_factory=dict)


@dataclass(frozen=True)
class SceneGraphEdge:
    src: int
    dst: int
    relation: str


@dataclass(frozen=True)
class SceneGraph:
    nodes: tuple[SceneGraphNode, ...]
    edges: tuple[SceneGraphEdge, ...]
    frame_index: int = 0

    def node_labels(self) -> list[str]:
        return [n.label for n in self.nodes]


# -- rule primitives -----------------------------------------------------------


def resolve_actor_type(class_label: str, cfg: ExtractionConfig) -> str:
    """Map a source class label onto a configured actor type.

    Exact alias match wins; a case-insensitive pass runs as fallback.
    """
    if not class_label:
        raise UnknownActorClass("empty class label")
    for actor in cfg.actor_names:
        if class_label in cfg.alias_lists.get(actor, ()):
            return actor
    lowered = class_label.lower()
    for actor in cfg.actor_names:
        if lowered in (a.lower() for a in cfg.alias_lists.get(actor, ())):
            return actor
    raise UnknownActorClass(f"class label {class_label!r} matches no alias list")


def _pair_allowed(type_a: str, type_b: str, pair_list) -> bool:
    return (type_a, type_b) in pair_list or (type_b, type_a) in pair_list


def _euclidean_xy(a: ObjectState, b: ObjectState) -> float:
    return math.hypot(a.position[0] - b.position[0], a.position[1] - b.position[1])


def proximity_relations(a: ObjectState, b: ObjectState, cfg: ExtractionConfig) -> list[str]:
    """All distance bands covering the pair's ground-plane separation."""
    type_a = resolve_actor_type(a.actor_type, cfg)
    type_b = resolve_actor_type(b.actor_type, cfg)
    if not _pair_allowed(type_a, type_b, cfg.proximity_relation_list):
        return []
    allowed_bands = None
    for t in (type_a, type_b):
        if t in cfg.proximity_bands_by_type:
            bands = set(cfg.proximity_bands_by_type[t])
            allowed_bands = bands if allowed_bands is None else allowed_bands & bands
    d = _euclidean_xy(a, b)
    names = [name for name, threshold in cfg.proximity_thresholds
             if d <= threshold and (allowed_bands is None or name in allowed_bands)]
    if names and not cfg.cumulative_proximity:
        names = names[:1]
    return names


def _relative_azimuth_deg(observer: ObjectState, other: ObjectState) -> float:
    """Bearing of ``other`` in the observer's own frame, in [-180, 180)."""
    dx = other.position[0] - observer.position[0]
    dy = other.position[1] - observer.position[1]
    yaw = math.radians(observer.yaw)
    # Observer heading rotates +yaw from +y toward +x; project onto its axes.
    x_local = dx * math.cos(yaw) - dy * math.sin(yaw)
    y_local = dx * math.sin(yaw) + dy * math.cos(yaw)
    theta = math.degrees(math.atan2(x_local, y_local))
    return (theta + 180.0) % 360.0 - 180.0


def directional_relation(observer: ObjectState, other: ObjectState,
                         cfg: ExtractionConfig) -> str | None:
    """Bearing-sector label of ``other`` seen from ``observer``, if gated in."""
    type_a = resolve_actor_type(observer.actor_type, cfg)
    type_b = resolve_actor_type(other.actor_type, cfg)
    if not _pair_allowed(type_a, type_b, cfg.directional_relation_list):
        return None
    if _euclidean_xy(observer, other) > cfg.directional_max_distance:
        return None
    theta = _relative_azimuth_deg(observer, other)
    for name, (lo, hi) in cfg.directional_thresholds:
        if lo <= theta < hi:
            return name
    return None


def lane_membership(obj: ObjectState, cfg: ExtractionConfig) -> list[str]:
    """Lane node labels an actor belongs to, from its lateral offset.

    Within the overlap margin of the lane boundary the actor straddles
    both the middle and the corresponding side lane (a lane change).
    """
    d = obj.position[0]
    t = cfg.lane_threshold
    if abs(abs(d) - t) <= cfg.lane_overlap_margin:
        side = LANE_LABELS[2] if d >= 0 else LANE_LABELS[0]
        return [LANE_LABELS[1], side]
    if abs(d) <= t:
        return [LANE_LABELS[1]]
    return [LANE_LABELS[2] if d > t else LANE_LABELS[0]]


# -- graph construction ----------------------------------------------------------


def _ego_state() -> ObjectState:
    return ObjectState(id="ego", actor_type="car", position=(0.0, 0.0, 0.0))


def _object_attributes(obj: ObjectState, extra: dict | None = None) -> dict:
    attrs: dict = {
        "source_id": obj.id,
        "position": [obj.position[0], obj.position[1], obj.position[2]],
        "yaw": obj.yaw,
        "velocity": [obj.velocity[0], obj.velocity[1]],
    }
    if obj.lane_assignment is not None:
        attrs["lane"] = obj.lane_assignment
    if obj.light_status is not None:
        attrs["light"] = obj.light_status
    if obj.sign_value is not None:
        attrs["sign"] = obj.sign_value
    if extra:
        attrs.update(extra)
    return attrs


def _states_from_detections(detections, cfg: ExtractionConfig,
                            calibration: BevCalibration | None,
                            warnings: list[str]):
    """Project detections to ego-frame ground states; unknowns are skipped."""
    from .errors import OutOfCalibratedRegion

    if calibration is None:
        raise ConfigError("image-variant frames require a BEV calibration")
    states = []
    for i, det in enumerate(detections):
        try:
            actor = resolve_actor_type(det.class_label, cfg)
        except UnknownActorClass:
            warnings.append(f"unknown class {det.class_label!r}")
            continue
        extra: dict = {"bbox": list(det.bbox), "confidence": det.confidence}
        if actor in ("light", "sign"):
            extra["elevated"] = True
        try:
            point = project_detection(det, calibration)
        except OutOfCalibratedRegion:
            point = project_detection(det, calibration, force=True)
            extra["extrapolated"] = True
            warnings.append(
                f"detection {i} ({det.class_label!r}) outside calibrated region")
        states.append((ObjectState(id=f"det{i:03d}", actor_type=det.class_label,
                                   position=(point.x, point.y, 0.0)), extra))
    return states


def extract_graph(frame: FrameRecord, cfg: ExtractionConfig,
                  calibration: BevCalibration | None = None) -> SceneGraph:
    """Build the typed multi-relational scene-graph of one frame.

    Unresolvable object classes are skipped with one aggregated warning
    per frame; everything else is deterministic in the frame content.
    """
    warnings: list[str] = []
    entries: list[tuple[ObjectState, dict]] = []
    if frame.objects is not None:
        for obj in sorted(frame.objects, key=lambda o: o.id):
            try:
                resolve_actor_type(obj.actor_type, cfg)
            except UnknownActorClass:
                warnings.append(f"unknown class {obj.actor_type!r}")
                continue
            entries.append((obj, {}))
    else:
        entries = _states_from_detections(frame.detections, cfg, calibration, warnings)
        entries.sort(key=lambda pair: pair[0].id)
    if warnings:
        log.warning("frame %d: skipped or flagged objects: %s",
                    frame.frame_index, "; ".join(warnings))

    ego = _ego_state()
    nodes = [SceneGraphNode(0, EGO_LABEL, "car", _object_attributes(ego))]
    for i, lane in enumerate(LANE_LABELS):
        nodes.append(SceneGraphNode(1 + i, lane, "lane"))
    type_counts: dict[str, int] = {}
    actor_states: list[tuple[int, ObjectState]] = [(0, ego)]
    for obj, extra in entries:
        actor = resolve_actor_type(obj.actor_type, cfg)
        type_counts[actor] = type_counts.get(actor, 0) + 1
        node_id = len(nodes)
        nodes.append(SceneGraphNode(node_id, f"{actor}_{type_counts[actor]}",
                                    actor, _object_attributes(obj, extra)))
        actor_states.append((node_id, obj))

    lane_ids = {label: 1 + i for i, label in enumerate(LANE_LABELS)}
    edges: list[SceneGraphEdge] = [SceneGraphEdge(0, lane_ids[LANE_LABELS[1]], IS_IN)]
    for node_id, obj in actor_states[1:]:
        actor = resolve_actor_type(obj.actor_type, cfg)
        if actor not in cfg.vehicle_actor_types:
            continue
        for lane in lane_membership(obj, cfg):
            edges.append(SceneGraphEdge(node_id, lane_ids[lane], IS_IN))

    for i in range(len(actor_states)):
        for j in range(i + 1, len(actor_states)):
            id_a, a = actor_states[i]
            id_b, b = actor_states[j]
            if cfg.ego_only and id_a != 0 and id_b != 0:
                continue
            for name in proximity_relations(a, b, cfg):
                edges.append(SceneGraphEdge(id_a, id_b, name))
                edges.append(SceneGraphEdge(id_b, id_a, name))
            fwd = directional_relation(a, b, cfg)
            if fwd is not None:
                edges.append(SceneGraphEdge(id_a, id_b, fwd))
            rev = directional_relation(b, a, cfg)
            if rev is not None:
                edges.append(SceneGraphEdge(id_b, id_a, rev))

    return SceneGraph(nodes=tuple(nodes), edges=tuple(edges),
                      frame_index=frame.frame_index)


def extract_sequence(clip: Clip, cfg: ExtractionConfig,
                     calibration: BevCalibration | None = None) -> list[SceneGraph]:
    """Scene-graphs of every frame of a clip, in frame order."""
    from .errors import EmptyClip, RoadGraphError

    if not clip.frames:
        raise EmptyClip(f"clip {clip.clip_id!r} has no frames")
    graphs = []
    for frame in clip.frames:
        try:
            graphs.append(extract_graph(frame, cfg, calibration))
        except RoadGraphError as exc:
            raise type(exc)(
                f"clip {clip.clip_id!r} frame {frame.frame_index}: {exc}") from exc
    return graphs


# -- DOT export ------------------------------------------------------------------

_KIND_COLORS = {"belonging": "darkorange", "proximity": "steelblue",
                "directional": "forestgreen"}


def _relation_kinds(cfg: ExtractionConfig | None) -> dict[str, str]:
    cfg = cfg or ExtractionConfig()
    kinds = {IS_IN: "belonging"}
    kinds.update({name: "proximity" for name, _ in cfg.proximity_thresholds})
    kinds.update({name: "directional" for name, _ in cfg.directional_thresholds})
    return kinds


def export_dot(graph: SceneGraph, cfg: ExtractionConfig | None = None) -> str:
    """Render a scene-graph as DOT text, color-coded by relation kind."""
    kinds = _relation_kinds(cfg)
    lines = ["digraph scene_graph {", "  rankdir=LR;"]
    for node in graph.nodes:
        lines.append(f'  n{node.node_id} [label="{node.label}:{node.actor_type}"];')
    for edge in graph.edges:
        color = _KIND_COLORS.get(kinds.get(edge.relation, ""), "black")
        lines.append(
            f'  n{edge.src} -> n{edge.dst} [label="{edge.relation}", color="{color}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"


# -- scene-graph dataset container -------------------------------------------------

SGD_VERSION = "sgd.v1"


@dataclass(frozen=True)
class SceneGraphClip:
    clip_id: str
    graphs: tuple[SceneGraph, ...]
    label: int | None = None
    metadata: dict = field(default_factory=dict)


@dataclass(frozen=True)
class SceneGraphDataset:
    clips: tuple[SceneGraphClip, ...]
    meta: dict = field(default_factory=dict)

    @property
    def actor_names(self) -> tuple[str, ...]:
        return tuple(self.meta.get("actor_names", DEFAULT_ACTOR_NAMES))

    @property
    def relation_names(self) -> tuple[str, ...]:
        return tuple(self.meta.get("relation_names", ExtractionConfig().relation_names))


def extract_dataset(dataset: Dataset, cfg: ExtractionConfig,
                    calibration: BevCalibration | None = None) -> SceneGraphDataset:
    """Run extraction over every clip of a dataset."""
    clips = tuple(
        SceneGraphClip(clip_id=c.clip_id,
                       graphs=tuple(extract_sequence(c, cfg, calibration)),
                       label=c.label, metadata=dict(c.metadata))
        for c in dataset.clips)
    meta = {
        "name": dataset.name,
        "variant": dataset.variant,
        "actor_names": list(cfg.actor_names),
        "relation_names": list(cfg.relation_names),
        "extraction_config": extraction_config_to_json(cfg),
    }
    return SceneGraphDataset(clips=clips, meta=meta)


def _graph_to_json(g: SceneGraph) -> dict:
    return {
        "frame_index": g.frame_index,
        "nodes": [{"node_id": n.node_id, "label": n.label,
                   "actor_type": n.actor_type, "attributes": n.attributes}
                  for n in g.nodes],
        "edges": [[e.src, e.dst, e.relation] for e in g.edges],
    }


def _graph_from_json(entry: dict) -> SceneGraph:
    nodes = tuple(SceneGraphNode(n["node_id"], n["label"], n["actor_type"],
                                 n.get("attributes", {}))
                  for n in entry["nodes"])
    edges = tuple(SceneGraphEdge(s, d, r) for s, d, r in entry["edges"])
    return SceneGraph(nodes=nodes, edges=edges, frame_index=entry["frame_index"])


def save_scenegraph_dataset(sgd: SceneGraphDataset, path: str | Path) -> None:
    """Write the JSONL container: a version header line, then one clip per line."""
    lines = [json.dumps({"version": SGD_VERSION, "meta": sgd.meta}, sort_keys=True)]
    for clip in sgd.clips:
        lines.append(json.dumps({
            "clip_id": clip.clip_id,
            "label": clip.label,
            "metadata": clip.metadata,
            "graphs": [_graph_to_json(g) for g in clip.graphs],
        }, sort_keys=True))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_scenegraph_dataset(path: str | Path) -> SceneGraphDataset:
    p = Path(path)
    if not p.exists():
        raise NotFound(f"scene-graph dataset not found: {p}")
    with p.open(encoding="utf-8") as fh:
        header_line = fh.readline()
        try:
            header = json.loads(header_line)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"bad scene-graph dataset header: {exc}") from exc
        if header.get("version") != SGD_VERSION:
            raise SchemaError(
                f"unsupported scene-graph dataset version {header.get('version')!r}")
        clips = []
        for line in fh:
            line = line.strip()
            if not line:
                continue
            entry = json.loads(line)
            clips.append(SceneGraphClip(
                clip_id=entry["clip_id"],
                graphs=tuple(_graph_from_json(g) for g in entry["graphs"]),
                label=entry.get("label"),
                metadata=entry.get("metadata", {}),
            ))
    return SceneGraphDataset(clips=tuple(clips), meta=header.get("meta", {}))
