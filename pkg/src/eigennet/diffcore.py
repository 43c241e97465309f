"""
Second-order jets through a tanh MLP, with exact parameter gradients.

The network maps a scalar x to m outputs. Every forward pass carries the value,
first and second input derivatives of each unit, so u(x), u'(x) and u''(x) come
out of a single sweep. ``backward`` runs the closed-form adjoint of that sweep and
returns gradients of any scalar loss assembled from those three quantities.
"""

import logging
from dataclasses import dataclass, field
from typing import Callable, Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np

from .errors import InvalidConfigError, NumericError

logger = logging.getLogger(__name__)

ArrayLike = Union[float, np.ndarray]


@dataclass(frozen=True)
class Jet2:
    """Value with first and second derivatives with respect to the scalar input."""
    v: ArrayLike
    d1: ArrayLike
    d2: ArrayLike

    @classmethod
    def identity(cls, x: ArrayLike) -> "Jet2":
        x = np.asarray(x, dtype=np.float64)
        return cls(x, np.ones_like(x), np.zeros_like(x))

    @classmethod
    def constant(cls, c: ArrayLike) -> "Jet2":
        c = np.asarray(c, dtype=np.float64)
        return cls(c, np.zeros_like(c), np.zeros_like(c))

    def compose(self, g: Callable, g1: Callable, g2: Callable) -> "Jet2":
        """Jet of g(self), given g and its first two derivatives."""
        gp = g1(self.v)
        return Jet2(g(self.v), gp * self.d1, g2(self.v) * self.d1**2 + gp * self.d2)

    def tanh(self) -> "Jet2":
        t = np.tanh(self.v)
        s = 1.0 - t * t
        return Jet2(t, s * self.d1, s * self.d2 - 2.0 * t * s * self.d1**2)

    def __add__(self, other: "Jet2") -> "Jet2":
        if not isinstance(other, Jet2):
            other = Jet2.constant(other)
        return Jet2(self.v + other.v, self.d1 + other.d1, self.d2 + other.d2)

    __radd__ = __add__

    def __mul__(self, other: ArrayLike) -> "Jet2":
        if isinstance(other, Jet2):
            return Jet2(
                self.v * other.v,
                self.d1 * other.v + self.v * other.d1,
                self.d2 * other.v + 2.0 * self.d1 * other.d1 + self.v * other.d2,
            )
        return Jet2(self.v * other, self.d1 * other, self.d2 * other)

    __rmul__ = __mul__

    def head(self, i: int) -> "Jet2":
        """Jet of output i (last axis)."""
        return Jet2(self.v[..., i], self.d1[..., i], self.d2[..., i])

    def heads(self) -> List["Jet2"]:
        m = np.shape(self.v)[-1]
        return [self.head(i) for i in range(m)]


@dataclass
class MlpParams:
    """Weights (out x in) and biases of every layer; hidden layers use tanh."""
    weights: List[np.ndarray]
    biases: List[np.ndarray]

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        if not self.weights or len(self.weights) != len(self.biases):
            raise InvalidConfigError("parameters need one bias per weight matrix")
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            if w.ndim != 2 or b.shape != (w.shape[0],):
                raise InvalidConfigError(
                    f"layer {i}: weight {w.shape} does not match bias {b.shape}"
                )
            if i > 0 and w.shape[1] != self.weights[i - 1].shape[0]:
                raise InvalidConfigError(
                    f"layer {i}: input width {w.shape[1]} != previous output width "
                    f"{self.weights[i - 1].shape[0]}"
                )
            if not (np.all(np.isfinite(w)) and np.all(np.isfinite(b))):
                raise NumericError(f"layer {i} holds non-finite parameters", layer=i)

    @property
    def widths(self) -> List[int]:
        return [self.weights[0].shape[1]] + [w.shape[0] for w in self.weights]

    @property
    def num_outputs(self) -> int:
        return self.weights[-1].shape[0]

    @property
    def num_layers(self) -> int:
        return len(self.weights)

    def blocks(self) -> Iterator[Tuple[str, np.ndarray]]:
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            yield f"W{i}", w
            yield f"b{i}", b

    def copy(self) -> "MlpParams":
        return MlpParams([w.copy() for w in self.weights], [b.copy() for b in self.biases])

    def to_arrays(self) -> dict:
        return dict(self.blocks())

    @classmethod
    def from_arrays(cls, arrays: dict) -> "MlpParams":
        n = sum(1 for key in arrays if key.startswith("W"))
        return cls(
            [np.asarray(arrays[f"W{i}"], dtype=np.float64) for i in range(n)],
            [np.asarray(arrays[f"b{i}"], dtype=np.float64) for i in range(n)],
        )


@dataclass
class ParamGrad:
    """d(loss)/d(parameter), shape-congruent with an MlpParams."""
    weights: List[np.ndarray]
    biases: List[np.ndarray]

    @classmethod
    def zeros_like(cls, params: Union[MlpParams, "ParamGrad"]) -> "ParamGrad":
        return cls(
            [np.zeros_like(w) for w in params.weights],
            [np.zeros_like(b) for b in params.biases],
        )

    def blocks(self) -> Iterator[Tuple[str, np.ndarray]]:
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            yield f"W{i}", w
            yield f"b{i}", b

    def global_norm(self) -> float:
        return float(np.sqrt(sum(np.sum(g * g) for _, g in self.blocks())))

    def scaled(self, factor: float) -> "ParamGrad":
        return ParamGrad([w * factor for w in self.weights], [b * factor for b in self.biases])

    def check_finite(self) -> None:
        for name, g in self.blocks():
            if not np.all(np.isfinite(g)):
                raise NumericError(f"non-finite gradient in parameter block {name}", block=name)


@dataclass
class _LayerCache:
    # jet of the layer input
    a: Jet2
    # tanh pieces at the pre-activation (hidden layers only)
    z_d1: Optional[np.ndarray] = None
    z_d2: Optional[np.ndarray] = None
    t: Optional[np.ndarray] = None
    s: Optional[np.ndarray] = None


@dataclass
class JetTape:
    """Recorded forward sweep: per-layer caches plus the output jets (N x m)."""
    x: np.ndarray
    layers: List[_LayerCache]
    output: Jet2


@dataclass
class LossGraph:
    """A scalar loss recorded as cotangents on the output jets of one or more tapes.

    Each entry pairs a tape with a Jet2 of arrays dL/du, dL/du', dL/du''. The
    parameter-level term ``weight_decay * sum(W**2)`` is kept separately.
    """
    entries: List[Tuple[JetTape, Jet2]] = field(default_factory=list)
    weight_decay: float = 0.0

    def add(self, tape: JetTape, cotangent: Jet2) -> None:
        self.entries.append((tape, cotangent))


def init_gaussian(widths: Sequence[int], seed: int, std: float = 1.0) -> MlpParams:
    """N(0, std^2) weights, zero biases, drawn from a generator seeded with ``seed``."""
    widths = list(widths)
    if not widths or any(int(w) != w or w < 1 for w in widths):
        raise InvalidConfigError(f"widths must be positive integers, got {widths}",
                                 field="network.hidden_widths")
    if widths[0] != 1:
        raise InvalidConfigError(f"input width must be 1, got {widths[0]}",
                                 field="network.hidden_widths")
    if len(widths) < 3:
        raise InvalidConfigError(f"need at least one hidden layer, got widths {widths}",
                                 field="network.hidden_widths")

    rng = np.random.default_rng(seed)
    weights = []
    biases = []
    for fan_in, fan_out in zip(widths[:-1], widths[1:]):
        weights.append(rng.standard_normal((fan_out, fan_in)) * std)
        biases.append(np.zeros(fan_out))
    return MlpParams(weights, biases)


def _check_finite(values: np.ndarray, layer: int) -> None:
    if not np.all(np.isfinite(values)):
        raise NumericError(f"non-finite activation in layer {layer}", layer=layer)


def record_forward(params: MlpParams, x: ArrayLike) -> JetTape:
    """Forward sweep over a batch of inputs, keeping what ``backward`` needs."""
    x = np.atleast_1d(np.asarray(x, dtype=np.float64))
    if x.ndim != 1:
        raise InvalidConfigError(f"inputs must be a 1-D array, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise NumericError("non-finite network input", layer=0)

    col = x[:, None]
    a = Jet2(col, np.ones_like(col), np.zeros_like(col))
    last = params.num_layers - 1
    layers = []
    for i, (w, b) in enumerate(zip(params.weights, params.biases)):
        z_v = a.v @ w.T + b
        z_d1 = a.d1 @ w.T
        z_d2 = a.d2 @ w.T
        _check_finite(z_v, i)
        if i == last:
            layers.append(_LayerCache(a))
            a = Jet2(z_v, z_d1, z_d2)
            break
        t = np.tanh(z_v)
        s = 1.0 - t * t
        q = -2.0 * t * s
        layers.append(_LayerCache(a, z_d1, z_d2, t, s))
        a = Jet2(t, s * z_d1, s * z_d2 + q * z_d1 * z_d1)
        _check_finite(a.d2, i)
    return JetTape(x, layers, a)


def forward_jet(params: MlpParams, x: ArrayLike) -> Jet2:
    """u, u', u'' of every output.

    A scalar x gives arrays of shape (m,), an array of N inputs gives (N, m).
    """
    out = record_forward(params, x).output
    if np.ndim(x) == 0:
        return Jet2(out.v[0], out.d1[0], out.d2[0])
    return out


def forward_jet_at(params: MlpParams, x: float) -> List[Jet2]:
    """Per-output list of scalar jets at a single point."""
    jet = forward_jet(params, float(x))
    return [Jet2(float(jet.v[i]), float(jet.d1[i]), float(jet.d2[i]))
            for i in range(params.num_outputs)]


def _backward_tape(params: MlpParams, tape: JetTape, cotangent: Jet2, grad: ParamGrad) -> None:
    g_v = np.asarray(cotangent.v, dtype=np.float64)
    g_d1 = np.asarray(cotangent.d1, dtype=np.float64)
    g_d2 = np.asarray(cotangent.d2, dtype=np.float64)
    last = params.num_layers - 1

    for i in range(last, -1, -1):
        cache = tape.layers[i]
        if i != last:
            # from the post-activation jet back to the pre-activation jet
            t, s = cache.t, cache.s
            q = -2.0 * t * s
            q3 = -2.0 * s * s + 4.0 * t * t * s
            z_d1, z_d2 = cache.z_d1, cache.z_d2
            g_zv = g_v * s + g_d1 * q * z_d1 + g_d2 * (q * z_d2 + q3 * z_d1 * z_d1)
            g_zd1 = g_d1 * s + 2.0 * g_d2 * q * z_d1
            g_zd2 = g_d2 * s
        else:
            g_zv, g_zd1, g_zd2 = g_v, g_d1, g_d2

        a = cache.a
        grad.weights[i] += g_zv.T @ a.v + g_zd1.T @ a.d1 + g_zd2.T @ a.d2
        grad.biases[i] += g_zv.sum(axis=0)
        if i > 0:
            w = params.weights[i]
            g_v, g_d1, g_d2 = g_zv @ w, g_zd1 @ w, g_zd2 @ w


def backward(params: MlpParams, graph: LossGraph) -> ParamGrad:
    """Exact gradient of the recorded scalar loss with respect to every parameter."""
    grad = ParamGrad.zeros_like(params)
    for tape, cotangent in graph.entries:
        _backward_tape(params, tape, cotangent, grad)
    if graph.weight_decay:
        for i, w in enumerate(params.weights):
            grad.weights[i] += 2.0 * graph.weight_decay * w
    grad.check_finite()
    return grad
