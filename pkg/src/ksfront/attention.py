"""Attention kernels (dot-product, additive, location-aware, multi-head) and
output-shape arithmetic for the convolutional listener front ends."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import BadAlignmentError, IndivisibleHeadsError, InputTooSmallError, ShapeMismatchError

# recurrent layer sizes of the baseline listener/speller; used for bookkeeping only
LISTENER_BLSTM = {"layers": 3, "units_per_direction": 512}
SPELLER_LSTM = {"layers": 2, "units": 1024}


@dataclass(frozen=True)
class AttentionInput:
    Q: np.ndarray
    K: np.ndarray
    V: np.ndarray

    def __post_init__(self):
        for name in ("Q", "K", "V"):
            a = np.asarray(getattr(self, name), dtype=np.float64)
            if a.ndim != 2:
                raise ShapeMismatchError(f"{name} must be 2-D, got shape {a.shape}")
            object.__setattr__(self, name, a)
        if self.K.shape[0] != self.V.shape[0]:
            raise ShapeMismatchError(f"K has {self.K.shape[0]} rows but V has {self.V.shape[0]}")
        if self.K.shape[0] == 0:
            raise ShapeMismatchError("need at least one key")


@dataclass(frozen=True)
class AttentionResult:
    weights: np.ndarray
    context: np.ndarray


def softmax(logits, axis=-1):
    shifted = logits - np.max(logits, axis=axis, keepdims=True)
    e = np.exp(shifted)
    return e / np.sum(e, axis=axis, keepdims=True)


def _check_same_dk(inp: AttentionInput):
    if inp.Q.shape[1] != inp.K.shape[1]:
        raise ShapeMismatchError(f"query dim {inp.Q.shape[1]} != key dim {inp.K.shape[1]}")


def dot_attention(inp: AttentionInput, scaled=True) -> AttentionResult:
    """softmax(Q K^T [/ sqrt(d_k)]) V."""
    _check_same_dk(inp)
    logits = inp.Q @ inp.K.T
    if scaled:
        logits = logits / math.sqrt(inp.K.shape[1])
    weights = softmax(logits)
    return AttentionResult(weights, weights @ inp.V)


@dataclass(frozen=True)
class AdditiveParams:
    """Single hidden layer scorer; W1 acts on the concatenation [q; k]."""

    W1: np.ndarray
    w2: np.ndarray

    def __post_init__(self):
        W1 = np.asarray(self.W1, dtype=np.float64)
        w2 = np.asarray(self.w2, dtype=np.float64).reshape(-1)
        if W1.ndim != 2 or W1.shape[0] != w2.size:
            raise ShapeMismatchError(f"W1 {W1.shape} incompatible with w2 of size {w2.size}")
        if not (np.isfinite(W1).all() and np.isfinite(w2).all()):
            raise ValueError("additive attention parameters must be finite")
        object.__setattr__(self, "W1", W1)
        object.__setattr__(self, "w2", w2)


def additive_scores(Q, K, W1, w2):
    d_q = Q.shape[1]
    hq = Q @ W1[:, :d_q].T
    hk = K @ W1[:, d_q:].T
    return np.tanh(hq[:, None, :] + hk[None, :, :]) @ w2


def additive_attention(inp: AttentionInput, p: AdditiveParams) -> AttentionResult:
    """score(q, k) = w2 . tanh(W1 [q; k]); query and key sizes may differ."""
    d_q, d_k = inp.Q.shape[1], inp.K.shape[1]
    if p.W1.shape[1] != d_q + d_k:
        raise ShapeMismatchError(f"W1 has {p.W1.shape[1]} columns, expected d_q + d_k = {d_q + d_k}")
    weights = softmax(additive_scores(inp.Q, inp.K, p.W1, p.w2))
    return AttentionResult(weights, weights @ inp.V)


@dataclass(frozen=True)
class LocationParams:
    """Parameters of location-aware scoring.

    ``conv_kernel`` is (r filters, c taps) with c odd; ``U`` maps the r
    location features into the hidden space of size h.
    """

    conv_kernel: np.ndarray
    U: np.ndarray
    W_q: np.ndarray
    W_k: np.ndarray
    w: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        for name in ("conv_kernel", "U", "W_q", "W_k", "w", "b"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=np.float64))
        r, c = self.conv_kernel.shape
        h = self.w.size
        if c % 2 == 0:
            raise ShapeMismatchError(f"convolution width must be odd, got {c}")
        if self.U.shape != (h, r) or self.b.shape != (h,):
            raise ShapeMismatchError(f"U must be {(h, r)} and b {(h,)}")
        if self.W_q.shape[0] != h or self.W_k.shape[0] != h:
            raise ShapeMismatchError("W_q and W_k must have h rows")

    @classmethod
    def zeros(cls, d_q, d_k, hidden=8, filters=10, width=3):
        return cls(np.zeros((filters, width)), np.zeros((hidden, filters)), np.zeros((hidden, d_q)),
                   np.zeros((hidden, d_k)), np.zeros(hidden), np.zeros(hidden))


def location_features(prev_alignment, kernel) -> np.ndarray:
    """Same-length, zero-padded, centered correlation of the alignment with
    each kernel row; returns (n_k, r)."""
    r, c = kernel.shape
    pad = c // 2
    padded = np.pad(prev_alignment, pad)
    windows = np.lib.stride_tricks.sliding_window_view(padded, c)  # (n_k, c)
    return windows @ kernel.T


def location_aware_attention(inp: AttentionInput, prev_alignment, p: LocationParams) -> AttentionResult:
    """One decoding step of location-aware attention.

    score_j = w . tanh(W_q q + W_k k_j + U f_j + b), where f_j are the
    convolved previous-alignment features at key j. The all-zero alignment
    is accepted as the initial state.
    """
    prev = np.asarray(prev_alignment, dtype=np.float64).reshape(-1)
    n_k = inp.K.shape[0]
    if prev.size != n_k:
        raise ShapeMismatchError(f"alignment has {prev.size} entries for {n_k} keys")
    if np.any(prev < 0):
        raise BadAlignmentError("alignment has negative entries")
    total = prev.sum()
    if total != 0.0 and abs(total - 1.0) > 1e-6:
        raise BadAlignmentError(f"alignment sums to {total}, expected 1 or 0")
    if p.W_q.shape[1] != inp.Q.shape[1] or p.W_k.shape[1] != inp.K.shape[1]:
        raise ShapeMismatchError("W_q/W_k column counts do not match query/key sizes")

    feats = location_features(prev, p.conv_kernel)
    hk = inp.K @ p.W_k.T + feats @ p.U.T + p.b  # (n_k, h)
    hq = inp.Q @ p.W_q.T  # (n_q, h)
    scores = np.tanh(hq[:, None, :] + hk[None, :, :]) @ p.w
    weights = softmax(scores)
    return AttentionResult(weights, weights @ inp.V)


@dataclass(frozen=True)
class MultiHeadParams:
    """Per-head projections stacked as (h, d_model, d_model // h) arrays and an
    output projection W_o of shape (d_model, d_model)."""

    W_q: np.ndarray
    W_k: np.ndarray
    W_v: np.ndarray
    W_o: np.ndarray

    def __post_init__(self):
        for name in ("W_q", "W_k", "W_v", "W_o"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=np.float64))
        h, d_model, d_head = self.W_q.shape
        if d_head * h != d_model:
            raise IndivisibleHeadsError(f"{h} heads of size {d_head} do not tile d_model={d_model}")
        for name in ("W_k", "W_v"):
            if getattr(self, name).shape != self.W_q.shape:
                raise ShapeMismatchError(f"{name} shape differs from W_q")
        if self.W_o.shape != (d_model, d_model):
            raise ShapeMismatchError(f"W_o must be {(d_model, d_model)}")

    @property
    def heads(self):
        return self.W_q.shape[0]

    @property
    def d_model(self):
        return self.W_q.shape[1]

    @classmethod
    def random(cls, d_model, heads=4, rng=None):
        if d_model % heads:
            raise IndivisibleHeadsError(f"d_model={d_model} is not divisible by {heads} heads")
        rng = rng if rng is not None else np.random.default_rng()
        d_head = d_model // heads
        scale = 1.0 / math.sqrt(d_model)
        proj = [rng.normal(0, scale, (heads, d_model, d_head)) for _ in range(3)]
        return cls(*proj, rng.normal(0, scale, (d_model, d_model)))

    @classmethod
    def identity(cls, d_model):
        eye = np.eye(d_model)[None]
        return cls(eye, eye, eye, np.eye(d_model))


def multi_head_attention(inp: AttentionInput, p: MultiHeadParams) -> AttentionResult:
    """Scaled dot attention per head on projected inputs; head contexts are
    concatenated then projected by W_o. Weights come back as (n_q, n_k, h)."""
    for name, a in (("Q", inp.Q), ("K", inp.K), ("V", inp.V)):
        if a.shape[1] != p.d_model:
            raise ShapeMismatchError(f"{name} has {a.shape[1]} columns, expected d_model={p.d_model}")
    results = [
        dot_attention(AttentionInput(inp.Q @ p.W_q[i], inp.K @ p.W_k[i], inp.V @ p.W_v[i]), scaled=True)
        for i in range(p.heads)
    ]
    weights = np.stack([r.weights for r in results], axis=-1)
    concat = np.concatenate([r.context for r in results], axis=1)
    return AttentionResult(weights, concat @ p.W_o)


def scaled_dot_backward(inp: AttentionInput, upstream):
    """Gradients of <upstream, context> for scaled dot attention w.r.t. Q, K, V."""
    _check_same_dk(inp)
    G = np.asarray(upstream, dtype=np.float64)
    if G.shape != (inp.Q.shape[0], inp.V.shape[1]):
        raise ShapeMismatchError(f"upstream must be {(inp.Q.shape[0], inp.V.shape[1])}, got {G.shape}")
    scale = 1.0 / math.sqrt(inp.K.shape[1])
    W = softmax(inp.Q @ inp.K.T * scale)
    dV = W.T @ G
    dW = G @ inp.V.T
    # row-wise softmax Jacobian: diag(w) - w w^T
    dS = W * (dW - np.sum(dW * W, axis=1, keepdims=True))
    dQ = dS @ inp.K * scale
    dK = dS.T @ inp.Q * scale
    return dQ, dK, dV


@dataclass(frozen=True)
class Layer:
    """Conv or pooling layer geometry on (time, freq) axes."""

    name: str
    kernel: tuple
    stride: tuple = (1, 1)
    padding: tuple = (0, 0)
    out_channels: int | None = None  # None keeps the incoming channel count

    def __post_init__(self):
        if min(self.kernel) <= 0 or min(self.stride) <= 0 or min(self.padding) < 0:
            raise ValueError(f"layer {self.name}: kernel and stride must be positive")


@dataclass(frozen=True)
class ExtractorSpec:
    kind: str
    layers: tuple = field(default_factory=tuple)


def vgg_extractor() -> ExtractorSpec:
    conv = lambda c: Layer("conv3x3", (3, 3), (1, 1), (1, 1), c)  # noqa: E731
    pool = Layer("maxpool3x3", (3, 3), (2, 2))
    return ExtractorSpec("vgg", (conv(64), conv(64), pool, conv(128), conv(128), pool))


def ds2_extractor(strides=((2, 2), (1, 2))) -> ExtractorSpec:
    """Two convolutions; filters 41x11 and 21x11 are (freq x time), so the
    (time, freq) kernels are (11, 41) and (11, 21)."""
    return ExtractorSpec("ds2", (
        Layer("conv41x11", (11, 41), strides[0], (0, 0), 32),
        Layer("conv21x11", (11, 21), strides[1], (0, 0), 32),
    ))


EXTRACTORS = {"vgg": vgg_extractor, "ds2": ds2_extractor}


def layer_output_len(n, kernel, stride, padding=0):
    span = n + 2 * padding - kernel
    if span < 0:
        return None
    return span // stride + 1


def extractor_output_shape(spec: ExtractorSpec | str, input_shape):
    """(time, freq) -> (time', freq', channels) after every layer of ``spec``."""
    if isinstance(spec, str):
        spec = EXTRACTORS[spec]()
    t, f = input_shape
    channels = 1
    for layer in spec.layers:
        t_out = layer_output_len(t, layer.kernel[0], layer.stride[0], layer.padding[0])
        f_out = layer_output_len(f, layer.kernel[1], layer.stride[1], layer.padding[1])
        if t_out is None or f_out is None:
            raise InputTooSmallError(f"{spec.kind} layer {layer.name}: input ({t}, {f}) smaller than kernel {layer.kernel}")
        t, f = t_out, f_out
        if layer.out_channels is not None:
            channels = layer.out_channels
    return t, f, channels
