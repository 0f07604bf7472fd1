"""Configurable spatial-temporal models over scene-graph sequences.

The spatial stack is a pair of from-scratch multi-relational graph
convolutions (GCN-style mean aggregation or GIN-style sum aggregation
with jumping-knowledge readout), an optional attention or projection
pooling layer, and a permutation-invariant readout.  The temporal side
is a single LSTM cell whose per-step outputs feed either a
sequence-level readout (last state, sum, or additive attention) for
whole-clip classification, or a per-frame MLP head for stepwise
prediction.

All frames of a clip are packed into one disjoint-union graph before the
spatial stack runs; message passing never crosses frame boundaries, so
the result is identical to running frame by frame but costs one pass.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import autodiff as ad
from .autodiff import Tensor
from .errors import (
    ConfigError,
    DegenerateProjection,
    EmptyClip,
    NotFound,
    RelationIndexError,
)
from .extraction import SceneGraph

CONV_KINDS = ("mrgcn", "mrgin")
POOL_KINDS = ("sagpool", "topk", "none")
READOUT_KINDS = ("max", "mean", "add")
TEMPORAL_KINDS = ("lstm_last", "lstm_sum", "lstm_attn", "none")
TASK_KINDS = ("sequence", "per_frame")

# Scales used when numeric attributes are appended to the one-hot input.
_POSITION_SCALE = 25.0
_VELOCITY_SCALE = 50.0


@dataclass(frozen=True)
class ModelConfig:
    """Declarative architecture choices for a scene-graph model."""

    conv_kind: str = "mrgcn"
    layer_sizes: tuple[int, ...] = (64, 64)
    pool: str = "sagpool"
    pool_ratio: float = 0.5
    readout: str = "add"
    temporal: str = "lstm_attn"
    lstm_hidden: int = 64
    mlp_sizes: tuple[int, ...] = ()
    task: str = "sequence"
    dropout: float = 0.1
    seed: int = 0
    attribute_features: bool = False

    def validate(self) -> "ModelConfig":
        if self.conv_kind not in CONV_KINDS:
            raise ConfigError(f"unknown conv_kind {self.conv_kind!r}")
        if self.pool not in POOL_KINDS:
            raise ConfigError(f"unknown pool {self.pool!r}")
        if self.readout not in READOUT_KINDS:
            raise ConfigError(f"unknown readout {self.readout!r}")
        if self.temporal not in TEMPORAL_KINDS:
            raise ConfigError(f"unknown temporal {self.temporal!r}")
        if self.task not in TASK_KINDS:
            raise ConfigError(f"unknown task {self.task!r}")
        if not self.layer_sizes:
            raise ConfigError("at least one graph convolution layer is required")
        if not 0.0 < self.pool_ratio <= 1.0:
            raise ConfigError(f"pool_ratio must be in (0, 1], got {self.pool_ratio}")
        if self.task == "per_frame" and self.temporal == "none":
            raise ConfigError("per-frame prediction requires an LSTM temporal model")
        if not 0.0 <= self.dropout < 1.0:
            raise ConfigError(f"dropout must be in [0, 1), got {self.dropout}")
        return self


def model_config_to_json(cfg: ModelConfig) -> dict:
    return {
        "conv_kind": cfg.conv_kind,
        "layer_sizes": list(cfg.layer_sizes),
        "pool": cfg.pool,
        "pool_ratio": cfg.pool_ratio,
        "readout": cfg.readout,
        "temporal": cfg.temporal,
        "lstm_hidden": cfg.lstm_hidden,
        "mlp_sizes": list(cfg.mlp_sizes),
        "task": cfg.task,
        "dropout": cfg.dropout,
        "seed": cfg.seed,
        "attribute_features": cfg.attribute_features,
    }


def model_config_from_json(entry: dict) -> ModelConfig:
    base = ModelConfig()
    cfg = ModelConfig(
        conv_kind=entry.get("conv_kind", base.conv_kind),
        layer_sizes=tuple(entry.get("layer_sizes", base.layer_sizes)),
        pool=entry.get("pool", base.pool),
        pool_ratio=float(entry.get("pool_ratio", base.pool_ratio)),
        readout=entry.get("readout", base.readout),
        temporal=entry.get("temporal", base.temporal),
        lstm_hidden=int(entry.get("lstm_hidden", base.lstm_hidden)),
        mlp_sizes=tuple(entry.get("mlp_sizes", base.mlp_sizes)),
        task=entry.get("task", base.task),
        dropout=float(entry.get("dropout", base.dropout)),
        seed=int(entry.get("seed", base.seed)),
        attribute_features=bool(entry.get("attribute_features", base.attribute_features)),
    )
    return cfg.validate()


def load_model_config(path: str | Path) -> ModelConfig:
    p = Path(path)
    if not p.exists():
        raise NotFound(f"model config not found: {p}")
    return model_config_from_json(json.loads(p.read_text(encoding="utf-8")))


# -- graph encoding --------------------------------------------------------------


@dataclass
class GraphBatch:
    """A clip's frames packed into one disjoint-union graph."""

    x: np.ndarray                       # (total nodes, feature dim)
    rel_edges: list                     # per relation id: (src, dst) int arrays
    frame_slices: list                  # per frame: (start, stop) node range
    node_labels: list                   # per frame: node label strings

    @property
    def num_frames(self) -> int:
        return len(self.frame_slices)

    @property
    def num_nodes(self) -> int:
        return self.x.shape[0]


def encode_graphs(graphs: list[SceneGraph], actor_names, relation_names,
                  attribute_features: bool = False) -> GraphBatch:
    """One-hot featurize and pack a graph sequence into a GraphBatch."""
    if not graphs:
        raise EmptyClip("cannot encode an empty graph sequence")
    actor_index = {name: i for i, name in enumerate(actor_names)}
    relation_index = {name: i for i, name in enumerate(relation_names)}
    feat_dim = len(actor_names) + (4 if attribute_features else 0)

    total = sum(len(g.nodes) for g in graphs)
    x = np.zeros((total, feat_dim))
    srcs: list[list[int]] = [[] for _ in relation_names]
    dsts: list[list[int]] = [[] for _ in relation_names]
    frame_slices = []
    node_labels = []
    offset = 0
    for g in graphs:
        for n in g.nodes:
            row = offset + n.node_id
            try:
                x[row, actor_index[n.actor_type]] = 1.0
            except KeyError:
                raise RelationIndexError(
                    f"actor type {n.actor_type!r} missing from vocabulary") from None
            if attribute_features:
                pos = n.attributes.get("position", (0.0, 0.0, 0.0))
                vel = n.attributes.get("velocity", (0.0, 0.0))
                base = len(actor_names)
                x[row, base] = pos[0] / _POSITION_SCALE
                x[row, base + 1] = pos[1] / _POSITION_SCALE
                x[row, base + 2] = vel[0] / _VELOCITY_SCALE
                x[row, base + 3] = vel[1] / _VELOCITY_SCALE
        for e in g.edges:
            try:
                rid = relation_index[e.relation]
            except KeyError:
                raise RelationIndexError(
                    f"relation {e.relation!r} missing from vocabulary") from None
            srcs[rid].append(offset + e.src)
            dsts[rid].append(offset + e.dst)
        frame_slices.append((offset, offset + len(g.nodes)))
        node_labels.append([n.label for n in g.nodes])
        offset += len(g.nodes)

    rel_edges = [(np.asarray(s, dtype=np.int64), np.asarray(d, dtype=np.int64))
                 for s, d in zip(srcs, dsts)]
    return GraphBatch(x=x, rel_edges=rel_edges, frame_slices=frame_slices,
                      node_labels=node_labels)


# -- layers ----------------------------------------------------------------------


class AffineLayer:
    def __init__(self, in_dim: int, out_dim: int, rng: np.random.Generator):
        self.w = ad.glorot_from(rng, (in_dim, out_dim))
        self.b = Tensor(np.zeros(out_dim), requires_grad=True)

    def __call__(self, x: Tensor) -> Tensor:
        return ad.add(ad.matmul(x, self.w), self.b)

    def params(self, prefix: str) -> dict[str, Tensor]:
        return {f"{prefix}.w": self.w, f"{prefix}.b": self.b}


class MRGCNLayer:
    """Per-relation graph convolution with mean neighborhood aggregation."""

    def __init__(self, in_dim: int, out_dim: int, num_relations: int,
                 rng: np.random.Generator, activation: str = "relu"):
        self.num_relations = num_relations
        self.activation = activation
        self.w_self = ad.glorot_from(rng, (in_dim, out_dim))
        self.w_rel = [ad.glorot_from(rng, (in_dim, out_dim))
                      for _ in range(num_relations)]
        self.b = Tensor(np.zeros(out_dim), requires_grad=True)

    def __call__(self, x: Tensor, rel_edges) -> Tensor:
        if len(rel_edges) != self.num_relations:
            raise RelationIndexError(
                f"expected {self.num_relations} relations, got {len(rel_edges)}")
        n = x.shape[0]
        out = ad.matmul(x, self.w_self)
        for rid, (src, dst) in enumerate(rel_edges):
            if len(src) == 0:
                continue
            messages = ad.gather_rows(ad.matmul(x, self.w_rel[rid]), src)
            counts = np.bincount(dst, minlength=n).astype(np.float64)
            coef = np.repeat((1.0 / counts[dst])[:, None], messages.shape[1], axis=1)
            messages = ad.mul(messages, Tensor(coef))
            out = ad.add(out, ad.scatter_add_rows(messages, dst, n))
        out = ad.add(out, self.b)
        return ad.relu(out) if self.activation == "relu" else out

    def params(self, prefix: str) -> dict[str, Tensor]:
        named = {f"{prefix}.w_self": self.w_self, f"{prefix}.b": self.b}
        for i, w in enumerate(self.w_rel):
            named[f"{prefix}.w_rel{i}"] = w
        return named


class MRGINLayer:
    """Per-relation graph isomorphism layer: sum aggregation, learnable eps."""

    def __init__(self, in_dim: int, out_dim: int, num_relations: int,
                 rng: np.random.Generator):
        self.num_relations = num_relations
        self.w_rel = [ad.glorot_from(rng, (in_dim, in_dim))
                      for _ in range(num_relations)]
        self.eps = Tensor(0.0, requires_grad=True)
        self.mlp1 = AffineLayer(in_dim, out_dim, rng)
        self.mlp2 = AffineLayer(out_dim, out_dim, rng)

    def __call__(self, x: Tensor, rel_edges) -> Tensor:
        if len(rel_edges) != self.num_relations:
            raise RelationIndexError(
                f"expected {self.num_relations} relations, got {len(rel_edges)}")
        n = x.shape[0]
        agg = ad.add(x, ad.mul(x, self.eps))  # (1 + eps) * x
        for rid, (src, dst) in enumerate(rel_edges):
            if len(src) == 0:
                continue
            messages = ad.gather_rows(ad.matmul(x, self.w_rel[rid]), src)
            agg = ad.add(agg, ad.scatter_add_rows(messages, dst, n))
        return self.mlp2(ad.relu(self.mlp1(agg)))

    def params(self, prefix: str) -> dict[str, Tensor]:
        named = {f"{prefix}.eps": self.eps}
        for i, w in enumerate(self.w_rel):
            named[f"{prefix}.w_rel{i}"] = w
        named.update(self.mlp1.params(f"{prefix}.mlp1"))
        named.update(self.mlp2.params(f"{prefix}.mlp2"))
        return named


def _select_topk(scores: np.ndarray, frame_slices, ratio: float):
    """Per-frame top-k node selection; ties keep the lower node index."""
    kept: list[int] = []
    new_slices = []
    start_new = 0
    for start, stop in frame_slices:
        n = stop - start
        k = max(1, math.ceil(ratio * n)) if n > 0 else 0
        local = scores[start:stop]
        order = np.argsort(-local, kind="stable")[:k]
        kept.extend(sorted(start + int(i) for i in order))
        new_slices.append((start_new, start_new + k))
        start_new += k
    return np.asarray(kept, dtype=np.int64), new_slices


def _reindex_edges(rel_edges, kept: np.ndarray, total: int):
    keep_mask = np.zeros(total, dtype=bool)
    keep_mask[kept] = True
    new_index = np.full(total, -1, dtype=np.int64)
    new_index[kept] = np.arange(len(kept))
    out = []
    for src, dst in rel_edges:
        if len(src) == 0:
            out.append((src, dst))
            continue
        mask = keep_mask[src] & keep_mask[dst]
        out.append((new_index[src[mask]], new_index[dst[mask]]))
    return out


def _gate_rows(x: Tensor, scores: Tensor) -> Tensor:
    """Multiply each row of x by its (column-vector) score."""
    ones = Tensor(np.ones((1, x.shape[1])))
    return ad.mul(x, ad.matmul(scores, ones))


class SAGPoolLayer:
    """Self-attention pooling: scores from an auxiliary graph convolution."""

    def __init__(self, dim: int, num_relations: int, rng: np.random.Generator):
        self.score_layer = MRGCNLayer(dim, 1, num_relations, rng, activation="none")

    def __call__(self, x: Tensor, rel_edges, frame_slices, ratio: float):
        scores = ad.tanh(self.score_layer(x, rel_edges))
        kept, new_slices = _select_topk(scores.data[:, 0], frame_slices, ratio)
        x_kept = _gate_rows(ad.gather_rows(x, kept), ad.gather_rows(scores, kept))
        new_edges = _reindex_edges(rel_edges, kept, x.shape[0])
        alphas = [scores.data[start:stop, 0].copy() for start, stop in frame_slices]
        return x_kept, new_edges, new_slices, alphas

    def params(self, prefix: str) -> dict[str, Tensor]:
        return self.score_layer.params(f"{prefix}.score")


class TopKPoolLayer:
    """Projection pooling: scores are the normalized projection onto p."""

    def __init__(self, dim: int, rng: np.random.Generator):
        self.p = ad.glorot_from(rng, (dim, 1))

    def __call__(self, x: Tensor, rel_edges, frame_slices, ratio: float):
        if not np.any(self.p.data):
            raise DegenerateProjection("top-k projection vector is zero")
        norm = ad.sqrt(ad.sum_(ad.mul(self.p, self.p)))
        scores = ad.tanh(ad.div(ad.matmul(x, self.p), norm))
        kept, new_slices = _select_topk(scores.data[:, 0], frame_slices, ratio)
        x_kept = _gate_rows(ad.gather_rows(x, kept), ad.gather_rows(scores, kept))
        new_edges = _reindex_edges(rel_edges, kept, x.shape[0])
        alphas = [scores.data[start:stop, 0].copy() for start, stop in frame_slices]
        return x_kept, new_edges, new_slices, alphas

    def params(self, prefix: str) -> dict[str, Tensor]:
        return {f"{prefix}.p": self.p}


def readout(x: Tensor, frame_slices, kind: str) -> Tensor:
    """Column-wise reduction of each frame's node rows into one row."""
    t = len(frame_slices)
    dim = x.shape[1]
    if kind in ("add", "mean"):
        frame_ids = np.concatenate([
            np.full(stop - start, i, dtype=np.int64)
            for i, (start, stop) in enumerate(frame_slices)]) if x.shape[0] else np.zeros(0, np.int64)
        summed = ad.scatter_add_rows(x, frame_ids, t)
        if kind == "add":
            return summed
        counts = np.array([max(stop - start, 1) for start, stop in frame_slices],
                          dtype=np.float64)
        return ad.mul(summed, Tensor(np.repeat((1.0 / counts)[:, None], dim, axis=1)))
    rows = []
    for start, stop in frame_slices:
        if stop == start:
            rows.append(Tensor(np.zeros((1, dim))))
        else:
            rows.append(ad.max_(ad.gather_rows(x, np.arange(start, stop)), axis=0))
    return ad.concat(rows, axis=0)


class LSTMCell:
    """Standard LSTM cell with separate per-gate weights."""

    GATES = ("i", "f", "g", "o")

    def __init__(self, in_dim: int, hidden: int, rng: np.random.Generator):
        self.hidden = hidden
        self.w_x = {g: ad.glorot_from(rng, (in_dim, hidden)) for g in self.GATES}
        self.w_h = {g: ad.glorot_from(rng, (hidden, hidden)) for g in self.GATES}
        self.b = {g: Tensor(np.zeros(hidden), requires_grad=True) for g in self.GATES}

    def initial_state(self) -> tuple[Tensor, Tensor]:
        return Tensor(np.zeros((1, self.hidden))), Tensor(np.zeros((1, self.hidden)))

    def step(self, x: Tensor, state: tuple[Tensor, Tensor]) -> tuple[Tensor, Tensor]:
        h, c = state

        def gate(name: str) -> Tensor:
            return ad.add(ad.add(ad.matmul(x, self.w_x[name]),
                                 ad.matmul(h, self.w_h[name])), self.b[name])

        i = ad.sigmoid(gate("i"))
        f = ad.sigmoid(gate("f"))
        g = ad.tanh(gate("g"))
        o = ad.sigmoid(gate("o"))
        c_next = ad.add(ad.mul(f, c), ad.mul(i, g))
        h_next = ad.mul(o, ad.tanh(c_next))
        return h_next, c_next

    def params(self, prefix: str) -> dict[str, Tensor]:
        named = {}
        for g in self.GATES:
            named[f"{prefix}.w_x{g}"] = self.w_x[g]
            named[f"{prefix}.w_h{g}"] = self.w_h[g]
            named[f"{prefix}.b{g}"] = self.b[g]
        return named


class TemporalAttention:
    """Additive attention over per-step LSTM outputs."""

    def __init__(self, hidden: int, rng: np.random.Generator):
        self.w_a = ad.glorot_from(rng, (hidden, hidden))
        self.v = ad.glorot_from(rng, (hidden, 1))

    def __call__(self, p: Tensor) -> tuple[Tensor, Tensor]:
        logits = ad.matmul(ad.tanh(ad.matmul(p, self.w_a)), self.v)
        beta = ad.softmax(logits, axis=0)
        z = ad.sum_(_gate_rows(p, beta), axis=0)
        return z, beta

    def params(self, prefix: str) -> dict[str, Tensor]:
        return {f"{prefix}.w_a": self.w_a, f"{prefix}.v": self.v}


class MLPHead:
    def __init__(self, in_dim: int, hidden_sizes, out_dim: int,
                 rng: np.random.Generator):
        self.layers = []
        current = in_dim
        for size in hidden_sizes:
            self.layers.append(AffineLayer(current, size, rng))
            current = size
        self.layers.append(AffineLayer(current, out_dim, rng))

    def __call__(self, x: Tensor) -> Tensor:
        for layer in self.layers[:-1]:
            x = ad.relu(layer(x))
        return self.layers[-1](x)

    def params(self, prefix: str) -> dict[str, Tensor]:
        named = {}
        for i, layer in enumerate(self.layers):
            named.update(layer.params(f"{prefix}.{i}"))
        return named


def _apply_dropout(x: Tensor, p: float, rng: np.random.Generator | None,
                   training: bool) -> Tensor:
    if not training or p <= 0.0 or rng is None:
        return x
    mask = (rng.random(x.shape) >= p) / (1.0 - p)
    return ad.mul(x, Tensor(mask))


# -- model ------------------------------------------------------------------------


@dataclass
class SequenceOutput:
    y0: float
    y1: float
    label: int
    logits: Tensor
    alphas: list | None
    beta: np.ndarray | None


@dataclass
class FrameOutput:
    labels: list[int]
    probs: list[float]
    logits: Tensor
    alphas: list | None


class SceneGraphModel:
    """A full spatial-temporal classifier assembled from a ModelConfig."""

    def __init__(self, config: ModelConfig, actor_names, relation_names):
        self.config = config.validate()
        self.actor_names = tuple(actor_names)
        self.relation_names = tuple(relation_names)
        rng = np.random.default_rng(config.seed)
        num_relations = len(self.relation_names)
        in_dim = len(self.actor_names) + (4 if config.attribute_features else 0)

        self.convs = []
        current = in_dim
        for size in config.layer_sizes:
            if config.conv_kind == "mrgcn":
                self.convs.append(MRGCNLayer(current, size, num_relations, rng))
            else:
                self.convs.append(MRGINLayer(current, size, num_relations, rng))
            current = size

        if config.pool == "sagpool":
            self.pool = SAGPoolLayer(current, num_relations, rng)
        elif config.pool == "topk":
            self.pool = TopKPoolLayer(current, rng)
        else:
            self.pool = None

        # Jumping-knowledge concatenation for GIN: the graph embedding is
        # each layer's readout stacked side by side.
        self.embedding_dim = (sum(config.layer_sizes)
                              if config.conv_kind == "mrgin" else current)

        if config.temporal == "none":
            self.lstm = None
            self.attention = None
            head_in = self.embedding_dim
        else:
            self.lstm = LSTMCell(self.embedding_dim, config.lstm_hidden, rng)
            self.attention = (TemporalAttention(config.lstm_hidden, rng)
                              if config.temporal == "lstm_attn" else None)
            head_in = config.lstm_hidden
        self.head = MLPHead(head_in, config.mlp_sizes, 2, rng)

    def parameters(self) -> dict[str, Tensor]:
        named: dict[str, Tensor] = {}
        for i, conv in enumerate(self.convs):
            named.update(conv.params(f"conv{i}"))
        if self.pool is not None:
            named.update(self.pool.params("pool"))
        if self.lstm is not None:
            named.update(self.lstm.params("lstm"))
        if self.attention is not None:
            named.update(self.attention.params("attn"))
        named.update(self.head.params("head"))
        return named

    def encode(self, graphs: list[SceneGraph]) -> GraphBatch:
        return encode_graphs(graphs, self.actor_names, self.relation_names,
                             self.config.attribute_features)

    def spatial(self, batch: GraphBatch, training: bool = False,
                rng: np.random.Generator | None = None):
        """Graph embeddings (one row per frame) plus pooling attention."""
        x = Tensor(batch.x)
        rel_edges = batch.rel_edges
        slices = batch.frame_slices
        layer_outputs = []
        for conv in self.convs:
            x = conv(x, rel_edges)
            x = _apply_dropout(x, self.config.dropout, rng, training)
            layer_outputs.append(x)

        alphas = None
        if self.pool is not None:
            x, rel_edges, pooled_slices, alphas = self.pool(
                x, rel_edges, slices, self.config.pool_ratio)
        else:
            pooled_slices = slices

        if self.config.conv_kind == "mrgin":
            parts = [readout(h, slices, self.config.readout)
                     for h in layer_outputs[:-1]]
            parts.append(readout(x, pooled_slices, self.config.readout))
            hg = ad.concat(parts, axis=1)
        else:
            hg = readout(x, pooled_slices, self.config.readout)
        return hg, alphas

    def _lstm_states(self, hg: Tensor) -> list[Tensor]:
        state = self.lstm.initial_state()
        outputs = []
        for t in range(hg.shape[0]):
            x_t = ad.gather_rows(hg, [t])
            h, c = self.lstm.step(x_t, state)
            state = (h, c)
            outputs.append(h)
        return outputs

    def forward_sequence(self, batch: GraphBatch, training: bool = False,
                         rng: np.random.Generator | None = None) -> SequenceOutput:
        """Whole-clip risk scores; prediction ties resolve to risky."""
        if batch.num_frames == 0:
            raise EmptyClip("sequence forward needs at least one frame")
        hg, alphas = self.spatial(batch, training, rng)
        beta = None
        if self.config.temporal == "none":
            z = ad.mean_(hg, axis=0)
        else:
            outputs = self._lstm_states(hg)
            p = ad.concat(outputs, axis=0) if len(outputs) > 1 else outputs[0]
            if self.config.temporal == "lstm_last":
                z = outputs[-1]
            elif self.config.temporal == "lstm_sum":
                z = ad.sum_(p, axis=0)
            else:
                z, beta_t = self.attention(p)
                beta = beta_t.data[:, 0].copy()
        logits = self.head(z)
        probs = ad.softmax(logits, axis=1)
        y0, y1 = float(probs.data[0, 0]), float(probs.data[0, 1])
        return SequenceOutput(y0=y0, y1=y1, label=1 if y1 >= y0 else 0,
                              logits=logits, alphas=alphas, beta=beta)

    def forward_frames(self, batch: GraphBatch, training: bool = False,
                       rng: np.random.Generator | None = None) -> FrameOutput:
        """One prediction per frame with the recurrent state threaded through."""
        if batch.num_frames == 0:
            raise EmptyClip("per-frame forward needs at least one frame")
        hg, alphas = self.spatial(batch, training, rng)
        outputs = self._lstm_states(hg)
        logits_rows = [self.head(h) for h in outputs]
        logits = (ad.concat(logits_rows, axis=0)
                  if len(logits_rows) > 1 else logits_rows[0])
        probs = ad.softmax(logits, axis=1)
        labels = [1 if p1 >= p0 else 0 for p0, p1 in probs.data]
        return FrameOutput(labels=labels, probs=[float(v) for v in probs.data[:, 1]],
                           logits=logits, alphas=alphas)


def seq_forward(graphs: list[SceneGraph], model: SceneGraphModel) -> SequenceOutput:
    """Convenience wrapper: encode then classify a whole graph sequence."""
    return model.forward_sequence(model.encode(graphs))


def frame_forward(graphs: list[SceneGraph], model: SceneGraphModel) -> FrameOutput:
    """Convenience wrapper: encode then predict per frame."""
    return model.forward_frames(model.encode(graphs))


def save_model(model: SceneGraphModel, path: str | Path) -> None:
    ad.save_checkpoint(path, model.parameters(),
                       model_config_to_json(model.config),
                       vocab={"actor_names": list(model.actor_names),
                              "relation_names": list(model.relation_names)})


def load_model(path: str | Path) -> SceneGraphModel:
    params, config_json, vocab = ad.load_checkpoint(path)
    config = model_config_from_json(config_json)
    model = SceneGraphModel(config, vocab["actor_names"], vocab["relation_names"])
    own = model.parameters()
    if set(own) != set(params):
        from .errors import SchemaError
        raise SchemaError("checkpoint parameters do not match the model layout")
    for name, tensor in own.items():
        tensor.data[...] = params[name].data
    return model
