"""Minimal dense-tensor reverse-mode automatic differentiation.

Float64 throughout.  A :class:`Tape` is opened per forward episode; every
primitive applied while a tape is active records a backward rule onto it
when any input requires gradients.  :func:`backward` replays the tape in
reverse and accumulates gradients into leaf tensors.

Broadcasting is deliberately narrow: elementwise ops accept equal shapes,
a scalar on either side, or (for ``add``) a row vector bias against a
matrix.  Everything else is a :class:`ShapeError`.
"""

from __future__ import annotations

import base64
import json
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import LabelError, MissingGradient, RankError, ShapeError

__all__ = [
    "Tensor", "Tape", "backward",
    "matmul", "add", "mul", "div", "relu", "tanh", "sigmoid", "sqrt",
    "softmax", "concat", "sum_", "mean_", "max_",
    "gather_rows", "scatter_add_rows", "cross_entropy",
    "SGD", "Adam", "glorot_init",
    "save_checkpoint", "load_checkpoint",
]

_ACTIVE_TAPE: "Tape | None" = None

# Monotone counter stamped onto leaves by backward(); optimizers use it to
# detect a step() with no intervening backward pass.
_BACKWARD_EPOCH = 0


class Tensor:
    """A dense float64 array with an optional gradient buffer."""

    __slots__ = ("data", "requires_grad", "grad", "_grad_epoch")

    def __init__(self, data, requires_grad: bool = False):
        self.data = np.asarray(data, dtype=np.float64)
        self.requires_grad = requires_grad
        self.grad: np.ndarray | None = np.zeros_like(self.data) if requires_grad else None
        self._grad_epoch = 0

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    def zero_grad(self) -> None:
        if self.grad is not None:
            self.grad.fill(0.0)

    def item(self) -> float:
        return float(self.data)

    def __repr__(self) -> str:
        return f"Tensor(shape={self.shape}, requires_grad={self.requires_grad})"

    # Small amount of operator sugar; model code reads better with it.
    def __matmul__(self, other: "Tensor") -> "Tensor":
        return matmul(self, other)

    def __add__(self, other: "Tensor") -> "Tensor":
        return add(self, other)

    def __mul__(self, other: "Tensor") -> "Tensor":
        return mul(self, other)


class Tape:
    """Ordered record of primitive applications for one forward episode."""

    def __init__(self):
        self._records: list[tuple[tuple[Tensor, ...], Tensor, Callable[[np.ndarray], None]]] = []

    def __enter__(self) -> "Tape":
        global _ACTIVE_TAPE
        if _ACTIVE_TAPE is not None:
            raise RuntimeError("a Tape is already recording; tapes do not nest")
        _ACTIVE_TAPE = self
        return self

    def __exit__(self, *exc) -> None:
        global _ACTIVE_TAPE
        _ACTIVE_TAPE = None

    def __len__(self) -> int:
        return len(self._records)


def _record(inputs: Sequence[Tensor], output: Tensor,
            backward_fn: Callable[[np.ndarray], None]) -> Tensor:
    tape = _ACTIVE_TAPE
    if tape is not None and any(t.requires_grad for t in inputs):
        output.requires_grad = True
        tape._records.append((tuple(inputs), output, backward_fn))
    return output


def _accumulate(t: Tensor, grad: np.ndarray) -> None:
    if not t.requires_grad:
        return
    if t.grad is None:
        t.grad = np.zeros_like(t.data)
    t.grad += grad
    t._grad_epoch = _BACKWARD_EPOCH


def backward(tape: Tape, loss: Tensor) -> None:
    """Populate gradients of every tensor reachable from ``loss``.

    ``loss`` must be a scalar recorded on ``tape``.  Intermediate
    gradients live in a side table; only leaf tensors (never produced by
    a recorded op) receive contributions into their ``.grad`` buffers.
    """
    global _BACKWARD_EPOCH
    if loss.data.size != 1:
        raise RankError(f"backward requires a scalar loss, got shape {loss.shape}")
    _BACKWARD_EPOCH += 1
    seeds: dict[int, np.ndarray] = {id(loss): np.ones_like(loss.data)}
    holders: dict[int, Tensor] = {id(loss): loss}

    def sink(t: Tensor, g: np.ndarray) -> None:
        if not t.requires_grad:
            return
        key = id(t)
        if key in seeds:
            seeds[key] = seeds[key] + g
        else:
            seeds[key] = np.array(g, dtype=np.float64, copy=True)
            holders[key] = t

    for inputs, output, backward_fn in reversed(tape._records):
        out_grad = seeds.pop(id(output), None)
        if out_grad is None:
            continue  # not on the path to the loss
        holders.pop(id(output), None)
        backward_fn(out_grad, sink)

    # Records are in topological order, so every intermediate gradient was
    # popped by its producing record; the remainder belongs to leaves.
    for key, grad in seeds.items():
        _accumulate(holders[key], grad)


def _check_same_shape(op: str, a: Tensor, b: Tensor) -> None:
    if a.shape != b.shape:
        raise ShapeError(f"{op}: shapes {a.shape} and {b.shape} differ")


def matmul(a: Tensor, b: Tensor) -> Tensor:
    if a.data.ndim != 2 or b.data.ndim != 2 or a.shape[1] != b.shape[0]:
        raise ShapeError(f"matmul: shapes {a.shape} and {b.shape} are incompatible")
    out = Tensor(a.data @ b.data)

    def bwd(g, sink):
        sink(a, g @ b.data.T)
        sink(b, a.data.T @ g)

    return _record((a, b), out, bwd)


def add(a: Tensor, b: Tensor) -> Tensor:
    if a.shape == b.shape:
        reduce_b = None
    elif b.data.ndim == 1 and a.data.ndim == 2 and a.shape[1] == b.shape[0]:
        reduce_b = "rows"  # row-vector bias
    elif b.data.ndim == 0:
        reduce_b = "all"
    elif a.data.ndim == 0:
        # scalar + tensor: delegate to the symmetric case
        return add(b, a)
    else:
        raise ShapeError(f"add: shapes {a.shape} and {b.shape} are incompatible")
    out = Tensor(a.data + b.data)

    def bwd(g, sink):
        sink(a, g)
        if reduce_b is None:
            sink(b, g)
        elif reduce_b == "rows":
            sink(b, g.sum(axis=0))
        else:
            sink(b, np.asarray(g.sum()))

    return _record((a, b), out, bwd)


def _elementwise_pair(op: str, a: Tensor, b: Tensor) -> str | None:
    """Return broadcast mode: None (same shape) or 'a'/'b' scalar side."""
    if a.shape == b.shape:
        return None
    if b.data.ndim == 0:
        return "b"
    if a.data.ndim == 0:
        return "a"
    raise ShapeError(f"{op}: shapes {a.shape} and {b.shape} are incompatible")


def mul(a: Tensor, b: Tensor) -> Tensor:
    scalar_side = _elementwise_pair("mul", a, b)
    out = Tensor(a.data * b.data)

    def bwd(g, sink):
        ga, gb = g * b.data, g * a.data
        sink(a, np.asarray(ga.sum()) if scalar_side == "a" else ga)
        sink(b, np.asarray(gb.sum()) if scalar_side == "b" else gb)

    return _record((a, b), out, bwd)


def div(a: Tensor, b: Tensor) -> Tensor:
    scalar_side = _elementwise_pair("div", a, b)
    out = Tensor(a.data / b.data)

    def bwd(g, sink):
        ga = g / b.data
        gb = -g * a.data / (b.data * b.data)
        sink(a, np.asarray(ga.sum()) if scalar_side == "a" else ga)
        sink(b, np.asarray(gb.sum()) if scalar_side == "b" else gb)

    return _record((a, b), out, bwd)


def relu(x: Tensor) -> Tensor:
    out = Tensor(np.maximum(x.data, 0.0))

    def bwd(g, sink):
        sink(x, g * (x.data > 0.0))

    return _record((x,), out, bwd)


def tanh(x: Tensor) -> Tensor:
    out = Tensor(np.tanh(x.data))

    def bwd(g, sink):
        sink(x, g * (1.0 - out.data * out.data))

    return _record((x,), out, bwd)


def sigmoid(x: Tensor) -> Tensor:
    # Split by sign so exp never overflows; keeps outputs strictly in (0, 1).
    z = x.data
    pos = 1.0 / (1.0 + np.exp(-np.clip(z, 0.0, None)))
    e = np.exp(np.clip(z, None, 0.0))
    neg = e / (1.0 + e)
    out = Tensor(np.where(z >= 0.0, pos, neg))

    def bwd(g, sink):
        sink(x, g * out.data * (1.0 - out.data))

    return _record((x,), out, bwd)


def sqrt(x: Tensor) -> Tensor:
    out = Tensor(np.sqrt(x.data))

    def bwd(g, sink):
        sink(x, g * 0.5 / out.data)

    return _record((x,), out, bwd)


def softmax(x: Tensor, axis: int = -1) -> Tensor:
    shifted = x.data - x.data.max(axis=axis, keepdims=True)
    e = np.exp(shifted)
    out = Tensor(e / e.sum(axis=axis, keepdims=True))

    def bwd(g, sink):
        y = out.data
        sink(x, y * (g - (g * y).sum(axis=axis, keepdims=True)))

    return _record((x,), out, bwd)


def concat(tensors: Sequence[Tensor], axis: int = 0) -> Tensor:
    if not tensors:
        raise ShapeError("concat: empty tensor list")
    out = Tensor(np.concatenate([t.data for t in tensors], axis=axis))
    sizes = [t.shape[axis] for t in tensors]
    offsets = np.cumsum([0] + sizes)

    def bwd(g, sink):
        for t, lo, hi in zip(tensors, offsets[:-1], offsets[1:]):
            index = [slice(None)] * g.ndim
            index[axis] = slice(lo, hi)
            sink(t, g[tuple(index)])

    return _record(tuple(tensors), out, bwd)


def sum_(x: Tensor, axis: int | None = None) -> Tensor:
    out = Tensor(x.data.sum() if axis is None else x.data.sum(axis=axis, keepdims=True))

    def bwd(g, sink):
        sink(x, np.broadcast_to(g, x.shape).copy())

    return _record((x,), out, bwd)


def mean_(x: Tensor, axis: int | None = None) -> Tensor:
    n = x.data.size if axis is None else x.shape[axis]
    out = Tensor(x.data.mean() if axis is None else x.data.mean(axis=axis, keepdims=True))

    def bwd(g, sink):
        sink(x, np.broadcast_to(g, x.shape).copy() / n)

    return _record((x,), out, bwd)


def max_(x: Tensor, axis: int | None = None) -> Tensor:
    """Max reduction; gradient flows to the first occurrence of the max."""
    if axis is None:
        out = Tensor(x.data.max())
        flat_idx = int(x.data.argmax())

        def bwd(g, sink):
            gx = np.zeros_like(x.data)
            gx.flat[flat_idx] = g
            sink(x, gx)
    else:
        out = Tensor(x.data.max(axis=axis, keepdims=True))
        arg = np.expand_dims(x.data.argmax(axis=axis), axis)

        def bwd(g, sink):
            gx = np.zeros_like(x.data)
            np.put_along_axis(gx, arg, g, axis)
            sink(x, gx)

    return _record((x,), out, bwd)


def gather_rows(x: Tensor, indices) -> Tensor:
    idx = np.asarray(indices, dtype=np.int64)
    if x.data.ndim != 2:
        raise ShapeError(f"gather_rows: expected a matrix, got shape {x.shape}")
    out = Tensor(x.data[idx])

    def bwd(g, sink):
        gx = np.zeros_like(x.data)
        np.add.at(gx, idx, g)
        sink(x, gx)

    return _record((x,), out, bwd)


def scatter_add_rows(x: Tensor, indices, num_rows: int) -> Tensor:
    idx = np.asarray(indices, dtype=np.int64)
    if x.data.ndim != 2 or len(idx) != x.shape[0]:
        raise ShapeError(
            f"scatter_add_rows: rows {x.shape} do not match {len(idx)} indices")
    acc = np.zeros((num_rows, x.shape[1]), dtype=np.float64)
    np.add.at(acc, idx, x.data)
    out = Tensor(acc)

    def bwd(g, sink):
        sink(x, g[idx])

    return _record((x,), out, bwd)


def cross_entropy(logits: Tensor, targets, weights: tuple[float, float] = (1.0, 1.0)) -> Tensor:
    """Class-weighted mean negative log-likelihood over binary targets.

    ``logits`` is N rows of two unnormalized scores; loss for row i is
    ``-w[y_i] * log softmax(logits_i)[y_i]`` averaged over the N rows.
    Log-sum-exp keeps confident logits from overflowing.
    """
    y = np.asarray(targets, dtype=np.int64).reshape(-1)
    if logits.data.ndim != 2 or logits.shape[1] != 2 or logits.shape[0] != y.shape[0]:
        raise ShapeError(
            f"cross_entropy: logits {logits.shape} incompatible with {y.shape[0]} targets")
    if np.any((y != 0) & (y != 1)):
        raise LabelError("cross_entropy: targets must be 0 or 1")
    w = np.asarray([weights[0], weights[1]], dtype=np.float64)[y]
    n = y.shape[0]

    z = logits.data
    zmax = z.max(axis=1, keepdims=True)
    lse = zmax[:, 0] + np.log(np.exp(z - zmax).sum(axis=1))
    nll = lse - z[np.arange(n), y]
    out = Tensor(float((w * nll).mean()))

    def bwd(g, sink):
        p = np.exp(z - lse[:, None])
        p[np.arange(n), y] -= 1.0
        sink(logits, g * (w[:, None] * p) / n)

    return _record((logits,), out, bwd)


# -- optimizers ---------------------------------------------------------------

class SGD:
    """Plain gradient descent over a fixed parameter list."""

    def __init__(self, params: Iterable[Tensor], learning_rate: float):
        self.params = list(params)
        self.learning_rate = learning_rate
        self._seen_epoch = _BACKWARD_EPOCH

    def step(self) -> None:
        _require_fresh_gradients(self.params, self._seen_epoch)
        self._seen_epoch = _BACKWARD_EPOCH
        for p in self.params:
            p.data -= self.learning_rate * p.grad
            p.zero_grad()


class Adam:
    """Adam with the standard bias-corrected update."""

    def __init__(self, params: Iterable[Tensor], learning_rate: float,
                 beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        self.params = list(params)
        self.learning_rate = learning_rate
        self.beta1, self.beta2, self.eps = beta1, beta2, eps
        self.t = 0
        self._m = [np.zeros_like(p.data) for p in self.params]
        self._v = [np.zeros_like(p.data) for p in self.params]
        self._seen_epoch = _BACKWARD_EPOCH

    def step(self) -> None:
        _require_fresh_gradients(self.params, self._seen_epoch)
        self._seen_epoch = _BACKWARD_EPOCH
        self.t += 1
        b1, b2 = self.beta1, self.beta2
        for p, m, v in zip(self.params, self._m, self._v):
            g = p.grad
            m *= b1
            m += (1 - b1) * g
            v *= b2
            v += (1 - b2) * g * g
            m_hat = m / (1 - b1 ** self.t)
            v_hat = v / (1 - b2 ** self.t)
            p.data -= self.learning_rate * m_hat / (np.sqrt(v_hat) + self.eps)
            p.zero_grad()


def _require_fresh_gradients(params: list[Tensor], seen_epoch: int) -> None:
    if not params:
        return
    if all(p._grad_epoch <= seen_epoch for p in params):
        raise MissingGradient("optimizer stepped before any backward pass")


def make_optimizer(kind: str, params: Iterable[Tensor], learning_rate: float):
    if kind == "sgd":
        return SGD(params, learning_rate)
    if kind == "adam":
        return Adam(params, learning_rate)
    raise ValueError(f"unknown optimizer kind: {kind!r}")


# -- initialization -----------------------------------------------------------

def glorot_init(shape: tuple[int, ...], seed: int) -> Tensor:
    """Glorot-uniform tensor from a seeded PCG64 generator."""
    rng = np.random.default_rng(seed)
    return glorot_from(rng, shape)


def glorot_from(rng: np.random.Generator, shape: tuple[int, ...]) -> Tensor:
    if len(shape) >= 2:
        fan_in, fan_out = shape[0], shape[1]
    else:
        fan_in = fan_out = shape[0] if shape else 1
    a = np.sqrt(6.0 / (fan_in + fan_out))
    return Tensor(rng.uniform(-a, a, size=shape), requires_grad=True)


# -- checkpoints --------------------------------------------------------------

CHECKPOINT_VERSION = "ckpt.v1"


def save_checkpoint(path, params: dict[str, Tensor], model_config: dict,
                    vocab: dict | None = None) -> None:
    """Write named parameters as base64 little-endian float64 JSON."""
    payload = {
        "version": CHECKPOINT_VERSION,
        "model_config": model_config,
        "vocab": vocab or {},
        "params": {
            name: {
                "shape": list(t.shape),
                "data": base64.b64encode(
                    np.ascontiguousarray(t.data, dtype="<f8").tobytes()).decode("ascii"),
            }
            for name, t in params.items()
        },
    }
    Path(path).write_text(json.dumps(payload, indent=1, sort_keys=True), encoding="utf-8")


def load_checkpoint(path) -> tuple[dict[str, Tensor], dict, dict]:
    """Read a checkpoint; returns (params, model_config, vocab)."""
    from .errors import SchemaError
    p = Path(path)
    if not p.exists():
        from .errors import NotFound
        raise NotFound(f"checkpoint not found: {p}")
    payload = json.loads(p.read_text(encoding="utf-8"))
    if payload.get("version") != CHECKPOINT_VERSION:
        raise SchemaError(
            f"unsupported checkpoint version {payload.get('version')!r}")
    params = {}
    for name, entry in payload["params"].items():
        raw = base64.b64decode(entry["data"])
        arr = np.frombuffer(raw, dtype="<f8").astype(np.float64).reshape(entry["shape"])
        params[name] = Tensor(arr, requires_grad=True)
    return params, payload["model_config"], payload.get("vocab", {})
