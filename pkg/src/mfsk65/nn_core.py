"""From-scratch dense softmax classifier on numpy: batch normalization,
fully connected layers, ReLU, categorical cross-entropy, backprop, and Adam.

The default stack classifies one 4096-sample frame into 64 symbols:
BatchNorm(4096) -> Dense(4096,256) -> ReLU -> BatchNorm(256)
-> Dense(256,128) -> ReLU -> BatchNorm(128) -> Dense(128,64) -> Softmax,
1,107,904 parameters of which 1,098,944 are trainable.

Training math runs in float32 by default; a float64 stack can be built for
gradient checking.  A model in inference mode is immutable and shareable
across threads; training mutates layer caches and must stay single-writer.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .errors import FormatError

DEFAULT_WIDTHS = (4096, 256, 128, 64)

#: Predictions are clamped to [LOG_CLAMP, 1] before the cross-entropy log.
LOG_CLAMP = 1e-7

MODEL_MAGIC = b"MFSK65NN"
MODEL_VERSION = 1
_MODEL_HEADER = struct.Struct("<8sHH")
_LAYER_DESC = struct.Struct("<BII")
_KIND_BATCH_NORM, _KIND_DENSE, _KIND_RELU, _KIND_SOFTMAX = 0, 1, 2, 3


class Dense:
    """Fully connected layer, weights stored (out, in) row-major."""

    def __init__(self, in_dim: int, out_dim: int, rng: Optional[np.random.Generator],
                 dtype=np.float32):
        self.in_dim, self.out_dim = in_dim, out_dim
        if rng is None:
            self.weights = np.zeros((out_dim, in_dim), dtype=dtype)
        else:
            # Symmetric fan-based uniform init.
            limit = math.sqrt(6.0 / (in_dim + out_dim))
            self.weights = rng.uniform(-limit, limit, (out_dim, in_dim)).astype(dtype)
        self.bias = np.zeros(out_dim, dtype=dtype)
        self.grad_weights = None
        self.grad_bias = None
        self._inputs = None

    def forward(self, x: np.ndarray, training: bool) -> np.ndarray:
        if training:
            self._inputs = x
        return x @ self.weights.T + self.bias

    def backward(self, grad: np.ndarray) -> np.ndarray:
        if self._inputs is None:
            raise RuntimeError("backward called without a cached training forward pass")
        self.grad_weights = grad.T @ self._inputs
        self.grad_bias = grad.sum(axis=0)
        return grad @ self.weights

    def parameters(self):
        return [self.weights, self.bias]

    def gradients(self):
        return [self.grad_weights, self.grad_bias]


class ReLU:
    def __init__(self, width: int):
        self.width = width
        self._mask = None

    def forward(self, x: np.ndarray, training: bool) -> np.ndarray:
        out = np.maximum(x, 0)
        if training:
            self._mask = x > 0
        return out

    def backward(self, grad: np.ndarray) -> np.ndarray:
        if self._mask is None:
            raise RuntimeError("backward called without a cached training forward pass")
        return grad * self._mask

    def parameters(self):
        return []

    def gradients(self):
        return []


class BatchNorm:
    """Per-feature normalization with trainable scale/shift and moving
    statistics for inference."""

    def __init__(self, width: int, momentum: float = 0.99, epsilon: float = 1e-3,
                 dtype=np.float32):
        self.width = width
        self.momentum = momentum
        self.epsilon = epsilon
        self.gamma = np.ones(width, dtype=dtype)
        self.beta = np.zeros(width, dtype=dtype)
        self.moving_mean = np.zeros(width, dtype=dtype)
        self.moving_var = np.ones(width, dtype=dtype)
        self.grad_gamma = None
        self.grad_beta = None
        self._x_hat = None
        self._inv_std = None

    def forward(self, x: np.ndarray, training: bool) -> np.ndarray:
        if training:
            mean = x.mean(axis=0)
            var = x.var(axis=0)
            m = x.dtype.type(self.momentum)
            self.moving_mean = m * self.moving_mean + (1 - m) * mean
            self.moving_var = m * self.moving_var + (1 - m) * var
            inv_std = 1.0 / np.sqrt(var + x.dtype.type(self.epsilon))
            x_hat = (x - mean) * inv_std
            self._x_hat, self._inv_std = x_hat, inv_std
        else:
            inv_std = 1.0 / np.sqrt(self.moving_var + self.moving_var.dtype.type(self.epsilon))
            x_hat = (x - self.moving_mean) * inv_std
        return self.gamma * x_hat + self.beta

    def backward(self, grad: np.ndarray) -> np.ndarray:
        if self._x_hat is None:
            raise RuntimeError("backward called without a cached training forward pass")
        x_hat, inv_std = self._x_hat, self._inv_std
        self.grad_gamma = (grad * x_hat).sum(axis=0)
        self.grad_beta = grad.sum(axis=0)
        d_hat = grad * self.gamma
        b = grad.shape[0]
        return (inv_std / b) * (
            b * d_hat - d_hat.sum(axis=0) - x_hat * (d_hat * x_hat).sum(axis=0)
        )

    def parameters(self):
        return [self.gamma, self.beta]

    def gradients(self):
        return [self.grad_gamma, self.grad_beta]

    def moving_statistics(self):
        return [self.moving_mean, self.moving_var]


def softmax(logits: np.ndarray) -> np.ndarray:
    """Row-wise softmax, shift-invariant by construction."""
    shifted = logits - logits.max(axis=-1, keepdims=True)
    exp = np.exp(shifted)
    return exp / exp.sum(axis=-1, keepdims=True)


@dataclass
class ParameterCounts:
    total: int
    trainable: int
    non_trainable: int


@dataclass
class Batch:
    """A training batch: inputs and one-hot targets."""

    inputs: np.ndarray
    targets: np.ndarray

    def __post_init__(self):
        if self.inputs.ndim != 2 or self.targets.ndim != 2:
            raise ValueError("batch inputs and targets must be 2-D")
        if self.inputs.shape[0] != self.targets.shape[0]:
            raise ValueError("inputs and targets disagree on batch size")
        rows = self.targets.sum(axis=1)
        if not (np.all(rows == 1) and np.all(self.targets.max(axis=1) == 1)):
            raise ValueError("each target row must be one-hot")


def one_hot(labels: np.ndarray, num_classes: int, dtype=np.float32) -> np.ndarray:
    labels = np.asarray(labels)
    if labels.size and (labels.min() < 0 or labels.max() >= num_classes):
        raise ValueError("label outside class range")
    out = np.zeros((labels.shape[0], num_classes), dtype=dtype)
    out[np.arange(labels.shape[0]), labels] = 1
    return out


class DenseModel:
    """Layer stack ending in a softmax over the symbol alphabet."""

    def __init__(self, layers: list, widths: Sequence[int], dtype=np.float32):
        self.layers = layers
        self.widths = tuple(widths)
        self.dtype = np.dtype(dtype)
        self.training = False
        self._probs = None

    @property
    def input_width(self) -> int:
        return self.widths[0]

    @property
    def output_width(self) -> int:
        return self.widths[-1]

    def forward(self, inputs: np.ndarray) -> np.ndarray:
        """Class probabilities for a batch of frames (rows sum to 1)."""
        x = np.asarray(inputs, dtype=self.dtype)
        if x.ndim != 2 or x.shape[1] != self.input_width:
            raise ValueError(
                f"expected inputs of shape (batch, {self.input_width}), got {x.shape}"
            )
        if x.shape[0] == 0:
            raise ValueError("batch must contain at least one frame")
        for layer in self.layers:
            x = layer.forward(x, self.training)
        probs = softmax(x)
        if self.training:
            self._probs = probs
        return probs

    def backward(self, targets: np.ndarray) -> list:
        """Gradients of the mean cross-entropy w.r.t. every trainable
        parameter; requires a preceding training-mode forward pass."""
        if not self.training or self._probs is None:
            raise RuntimeError("backward requires a training-mode forward pass first")
        targets = np.asarray(targets, dtype=self.dtype)
        if targets.shape != self._probs.shape:
            raise ValueError(
                f"targets shape {targets.shape} != predictions shape {self._probs.shape}"
            )
        # Softmax + cross-entropy collapse to (q - p) / B at the logits.
        grad = (self._probs - targets) / self.dtype.type(targets.shape[0])
        for layer in reversed(self.layers):
            grad = layer.backward(grad)
        return self.gradients()

    def predict(self, inputs: np.ndarray) -> np.ndarray:
        return np.argmax(self.forward(inputs), axis=1)

    def trainable_parameters(self) -> list:
        return [p for layer in self.layers for p in layer.parameters()]

    def gradients(self) -> list:
        return [g for layer in self.layers for g in layer.gradients()]

    def parameter_counts(self) -> ParameterCounts:
        trainable = sum(p.size for p in self.trainable_parameters())
        non_trainable = sum(
            s.size for layer in self.layers if isinstance(layer, BatchNorm)
            for s in layer.moving_statistics()
        )
        return ParameterCounts(trainable + non_trainable, trainable, non_trainable)

    def descriptors(self) -> list[tuple[int, int, int]]:
        """(kind, in_dim, out_dim) triples describing the stack, softmax
        included."""
        descs = []
        for layer in self.layers:
            if isinstance(layer, BatchNorm):
                descs.append((_KIND_BATCH_NORM, layer.width, layer.width))
            elif isinstance(layer, Dense):
                descs.append((_KIND_DENSE, layer.in_dim, layer.out_dim))
            elif isinstance(layer, ReLU):
                descs.append((_KIND_RELU, layer.width, layer.width))
        descs.append((_KIND_SOFTMAX, self.output_width, self.output_width))
        return descs


def init_model(
    seed: int, widths: Sequence[int] = DEFAULT_WIDTHS, dtype=np.float32
) -> DenseModel:
    """Build and initialize the stack for the given layer widths.

    Batch norm sits at the input and after each hidden ReLU; dense weights
    use the symmetric fan-based uniform init, biases start at zero, and
    batch-norm statistics start at (0, 1).  Deterministic under seed.
    """
    if len(widths) < 2:
        raise ValueError("need at least input and output widths")
    rng = np.random.default_rng(seed)
    layers: list = [BatchNorm(widths[0], dtype=dtype)]
    for i in range(len(widths) - 1):
        layers.append(Dense(widths[i], widths[i + 1], rng, dtype=dtype))
        if i < len(widths) - 2:
            layers.append(ReLU(widths[i + 1]))
            layers.append(BatchNorm(widths[i + 1], dtype=dtype))
    return DenseModel(layers, widths, dtype=dtype)


def cross_entropy(targets: np.ndarray, predictions: np.ndarray) -> float:
    """Mean categorical cross-entropy over the batch, with predictions
    clamped to [LOG_CLAMP, 1] before the log."""
    targets = np.asarray(targets)
    predictions = np.asarray(predictions)
    if targets.shape != predictions.shape:
        raise ValueError(
            f"targets shape {targets.shape} != predictions shape {predictions.shape}"
        )
    q = np.clip(predictions.astype(np.float64), LOG_CLAMP, 1.0)
    return float(-(targets * np.log(q)).sum(axis=1).mean())


@dataclass
class AdamState:
    """First/second-moment accumulators mirroring the trainable parameters."""

    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-7
    t: int = 0
    m: list = field(default_factory=list)
    v: list = field(default_factory=list)

    @classmethod
    def for_parameters(cls, params: Sequence[np.ndarray], lr: float = 1e-3) -> "AdamState":
        return cls(
            lr=lr,
            m=[np.zeros_like(p) for p in params],
            v=[np.zeros_like(p) for p in params],
        )


def adam_step(state: AdamState, params: Sequence[np.ndarray],
              grads: Sequence[np.ndarray]) -> AdamState:
    """Apply one bias-corrected Adam update in place."""
    if len(params) != len(state.m) or len(params) != len(grads):
        raise ValueError("parameter, gradient, and accumulator counts disagree")
    state.t += 1
    b1, b2 = state.beta1, state.beta2
    corr1 = 1.0 - b1 ** state.t
    corr2 = 1.0 - b2 ** state.t
    for p, g, m, v in zip(params, grads, state.m, state.v):
        if g.shape != p.shape:
            raise ValueError(f"gradient shape {g.shape} != parameter shape {p.shape}")
        m *= b1
        m += (1.0 - b1) * g
        v *= b2
        v += (1.0 - b2) * np.square(g)
        p -= state.lr * (m / corr1) / (np.sqrt(v / corr2) + state.epsilon)
    return state


def _blobs(model: DenseModel) -> list[np.ndarray]:
    blobs = []
    for layer in model.layers:
        if isinstance(layer, BatchNorm):
            blobs += [layer.gamma, layer.beta, layer.moving_mean, layer.moving_var]
        elif isinstance(layer, Dense):
            blobs += [layer.weights, layer.bias]
    return blobs


def save_model(model: DenseModel, path) -> None:
    """Serialize the stack: magic, version, layer-descriptor table, then
    float32 parameter blobs in stack order."""
    descs = model.descriptors()
    with open(path, "wb") as fh:
        fh.write(_MODEL_HEADER.pack(MODEL_MAGIC, MODEL_VERSION, len(descs)))
        for kind, din, dout in descs:
            fh.write(_LAYER_DESC.pack(kind, din, dout))
        for blob in _blobs(model):
            fh.write(np.ascontiguousarray(blob, dtype="<f4").tobytes())


def load_model(path) -> DenseModel:
    """Rebuild a model from :func:`save_model` output, in inference mode.

    Raises FormatError on bad magic/version, an incoherent layer table, or
    a truncated/oversized file.
    """
    raw = Path(path).read_bytes()
    if len(raw) < _MODEL_HEADER.size:
        raise FormatError(f"{path}: file shorter than the model header")
    magic, version, n_layers = _MODEL_HEADER.unpack_from(raw)
    if magic != MODEL_MAGIC:
        raise FormatError(f"{path}: bad magic {magic!r}")
    if version != MODEL_VERSION:
        raise FormatError(f"{path}: unsupported model version {version}")
    offset = _MODEL_HEADER.size
    descs = []
    for _ in range(n_layers):
        if offset + _LAYER_DESC.size > len(raw):
            raise FormatError(f"{path}: truncated layer table")
        descs.append(_LAYER_DESC.unpack_from(raw, offset))
        offset += _LAYER_DESC.size

    def read_vec(count: int) -> np.ndarray:
        nonlocal offset
        nbytes = 4 * count
        if offset + nbytes > len(raw):
            raise FormatError(f"{path}: truncated parameter data")
        out = np.frombuffer(raw, dtype="<f4", count=count, offset=offset).copy()
        offset += nbytes
        return out

    if not descs or descs[-1][0] != _KIND_SOFTMAX:
        raise FormatError(f"{path}: layer table must end with a softmax entry")
    layers: list = []
    widths = [descs[0][1]]
    prev_out = descs[0][1]
    for kind, din, dout in descs[:-1]:
        if din != prev_out:
            raise FormatError(f"{path}: layer table dims are inconsistent")
        if kind == _KIND_BATCH_NORM:
            if dout != din:
                raise FormatError(f"{path}: batch-norm entry must be square")
            layer = BatchNorm(din)
            layer.gamma = read_vec(din)
            layer.beta = read_vec(din)
            layer.moving_mean = read_vec(din)
            layer.moving_var = read_vec(din)
            layers.append(layer)
        elif kind == _KIND_DENSE:
            layer = Dense(din, dout, rng=None)
            layer.weights = read_vec(din * dout).reshape(dout, din)
            layer.bias = read_vec(dout)
            layers.append(layer)
            widths.append(dout)
        elif kind == _KIND_RELU:
            if dout != din:
                raise FormatError(f"{path}: relu entry must be square")
            layers.append(ReLU(din))
        else:
            raise FormatError(f"{path}: unknown layer kind {kind}")
        prev_out = dout
    if descs[-1][1] != prev_out or descs[-1][2] != prev_out:
        raise FormatError(f"{path}: softmax entry dims are inconsistent")
    if offset != len(raw):
        raise FormatError(f"{path}: {len(raw) - offset} unexpected trailing bytes")
    return DenseModel(layers, widths, dtype=np.float32)
