"""Convolutional network workload: topology, parameters, and forward math.

The network is a small LeNet-style classifier over 3x32x32 images:

    conv 3->6 5x5, act, pool 2x2/2,
    conv 6->16 5x5, act, pool 2x2/2,
    flatten, fc 400->120, act, fc 120->84, act, fc 84->10.

For pipelined execution the layers are grouped into five stages cut at the
activation sites, so every stage boundary carries exactly the tensor an
activation consumes. All functional math is float64 and single-threaded
numpy, which makes outputs reproducible bit for bit on one platform
regardless of which execution scenario drives the schedule.

Parameters and inputs come from a splitmix64 stream, implemented here on
integers so the draw sequence is identical everywhere.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import ConfigurationError, UsageError

_MASK64 = (1 << 64) - 1
_INPUT_SEED_SALT = 0xA5A5_5A5A_0F0F_F0F0


class SplitMix64:
    """splitmix64 generator; uniform doubles use the top 53 bits."""

    def __init__(self, seed: int):
        self.state = seed & _MASK64

    def next_u64(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & _MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        return z ^ (z >> 31)

    def next_unit(self) -> float:
        return (self.next_u64() >> 11) * 2.0**-53

    def fill(self, shape: tuple[int, ...]) -> np.ndarray:
        """Array of uniforms in [-0.5, 0.5), drawn in C order."""
        flat = np.empty(int(np.prod(shape)), dtype=np.float64)
        for i in range(flat.size):
            flat[i] = self.next_unit() - 0.5
        return flat.reshape(shape)


class ActivationKind(Enum):
    HEAVISIDE = "heaviside"
    TANH = "tanh"
    SIGMOID = "sigmoid"
    RELU = "relu"
    LEAKY_RELU = "leaky_relu"
    ELU = "elu"
    SOFTPLUS = "softplus"

    @property
    def key(self) -> str:
        return self.value


def activation_from_key(key: str) -> ActivationKind:
    try:
        return ActivationKind(key)
    except ValueError:
        known = ", ".join(k.value for k in ActivationKind)
        raise UsageError(f"unknown activation '{key}'; known: {known}") from None


def apply_activation(
    kind: ActivationKind, x: np.ndarray, elu_alpha: float = 1.0
) -> np.ndarray:
    """Elementwise activation in float64, stable for large |x|."""
    x = np.asarray(x, dtype=np.float64)
    if kind is ActivationKind.HEAVISIDE:
        return (x > 0.0).astype(np.float64)
    if kind is ActivationKind.TANH:
        return np.tanh(x)
    if kind is ActivationKind.SIGMOID:
        out = np.empty_like(x)
        pos = x >= 0.0
        out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
        ex = np.exp(x[~pos])
        out[~pos] = ex / (1.0 + ex)
        return out
    if kind is ActivationKind.RELU:
        return np.maximum(x, 0.0)
    if kind is ActivationKind.LEAKY_RELU:
        return np.where(x > 0.0, x, 0.01 * x)
    if kind is ActivationKind.ELU:
        if elu_alpha <= 0.0:
            raise ConfigurationError(f"elu_alpha must be > 0, got {elu_alpha}")
        neg = elu_alpha * np.expm1(np.minimum(x, 0.0))
        return np.where(x > 0.0, x, neg)
    if kind is ActivationKind.SOFTPLUS:
        return np.log1p(np.exp(-np.abs(x))) + np.maximum(x, 0.0)
    raise ConfigurationError(f"unhandled activation {kind!r}")


class LayerOp(Enum):
    CONV = "conv"
    POOL = "pool"
    FC = "fc"


@dataclass(frozen=True)
class LayerSpec:
    name: str
    op: LayerOp
    in_shape: tuple[int, ...]
    out_shape: tuple[int, ...]
    param_count: int

    @property
    def out_elements(self) -> int:
        return int(np.prod(self.out_shape))


@dataclass(frozen=True)
class Model:
    """Layer list plus the activation sites and stage grouping."""

    layers: tuple[LayerSpec, ...]
    activation_sites: tuple[int, ...]
    stage_groups: tuple[tuple[int, ...], ...]

    @property
    def input_shape(self) -> tuple[int, ...]:
        return self.layers[0].in_shape

    @property
    def output_elements(self) -> int:
        return self.layers[-1].out_elements

    def activation_site_elements(self) -> tuple[int, ...]:
        return tuple(self.layers[i].out_elements for i in self.activation_sites)

    def stage_param_counts(self) -> tuple[int, ...]:
        return tuple(
            sum(self.layers[i].param_count for i in group)
            for group in self.stage_groups
        )

    def stage_in_elements(self) -> tuple[int, ...]:
        return tuple(
            int(np.prod(self.layers[group[0]].in_shape))
            for group in self.stage_groups
        )

    def stage_out_elements(self) -> tuple[int, ...]:
        return tuple(
            self.layers[group[-1]].out_elements for group in self.stage_groups
        )

    @property
    def param_count(self) -> int:
        return sum(layer.param_count for layer in self.layers)


def build_model() -> Model:
    layers = (
        LayerSpec("conv1", LayerOp.CONV, (3, 32, 32), (6, 28, 28), 6 * 3 * 25 + 6),
        LayerSpec("pool1", LayerOp.POOL, (6, 28, 28), (6, 14, 14), 0),
        LayerSpec("conv2", LayerOp.CONV, (6, 14, 14), (16, 10, 10), 16 * 6 * 25 + 16),
        LayerSpec("pool2", LayerOp.POOL, (16, 10, 10), (16, 5, 5), 0),
        LayerSpec("fc1", LayerOp.FC, (400,), (120,), 400 * 120 + 120),
        LayerSpec("fc2", LayerOp.FC, (120,), (84,), 120 * 84 + 84),
        LayerSpec("fc3", LayerOp.FC, (84,), (10,), 84 * 10 + 10),
    )
    return Model(
        layers=layers,
        activation_sites=(0, 2, 4, 5),
        stage_groups=((0,), (1, 2), (3, 4), (5,), (6,)),
    )


@dataclass(frozen=True)
class NetworkParams:
    """Per-layer (weights, bias) pairs; pool layers hold None."""

    seed: int
    tensors: tuple[tuple[np.ndarray, np.ndarray] | None, ...]

    def layer(self, index: int) -> tuple[np.ndarray, np.ndarray]:
        pair = self.tensors[index]
        if pair is None:
            raise ConfigurationError(f"layer {index} has no parameters")
        return pair


def init_params(model: Model, seed: int) -> NetworkParams:
    """Draw all weights and biases from one splitmix64 stream, layer order."""
    rng = SplitMix64(seed)
    tensors: list[tuple[np.ndarray, np.ndarray] | None] = []
    for layer in model.layers:
        if layer.op is LayerOp.POOL:
            tensors.append(None)
            continue
        if layer.op is LayerOp.CONV:
            out_c, in_c = layer.out_shape[0], layer.in_shape[0]
            weights = rng.fill((out_c, in_c, 5, 5))
            bias = rng.fill((out_c,))
        else:
            weights = rng.fill((layer.out_shape[0], layer.in_shape[0]))
            bias = rng.fill((layer.out_shape[0],))
        tensors.append((weights, bias))
    return NetworkParams(seed=seed, tensors=tuple(tensors))


def make_input(seed: int, index: int = 0) -> np.ndarray:
    """The `index`-th 3x32x32 sample of the input stream for `seed`."""
    rng = SplitMix64(seed ^ _INPUT_SEED_SALT)
    sample = None
    for _ in range(index + 1):
        sample = rng.fill((3, 32, 32))
    return sample


def _conv2d(x: np.ndarray, weights: np.ndarray, bias: np.ndarray) -> np.ndarray:
    k = weights.shape[-1]
    windows = np.lib.stride_tricks.sliding_window_view(x, (k, k), axis=(1, 2))
    out = np.einsum("ocuv,cijuv->oij", weights, windows, optimize=False)
    return out + bias[:, None, None]


def _pool2x2(x: np.ndarray) -> np.ndarray:
    c, h, w = x.shape
    return x.reshape(c, h // 2, 2, w // 2, 2).max(axis=(2, 4))


def run_layer(
    layer: LayerSpec, params: NetworkParams, index: int, x: np.ndarray
) -> np.ndarray:
    if tuple(x.shape) != layer.in_shape and layer.op is not LayerOp.FC:
        raise ConfigurationError(
            f"layer {layer.name} expects shape {layer.in_shape}, got {x.shape}"
        )
    if layer.op is LayerOp.CONV:
        weights, bias = params.layer(index)
        return _conv2d(x, weights, bias)
    if layer.op is LayerOp.POOL:
        return _pool2x2(x)
    weights, bias = params.layer(index)
    return weights @ x.reshape(-1) + bias


def run_stage(
    model: Model, params: NetworkParams, stage_index: int, x: np.ndarray
) -> np.ndarray:
    for layer_index in model.stage_groups[stage_index]:
        x = run_layer(model.layers[layer_index], params, layer_index, x)
    return x


def run_network(
    model: Model,
    params: NetworkParams,
    x: np.ndarray,
    kind: ActivationKind,
    elu_alpha: float = 1.0,
) -> tuple[np.ndarray, tuple[np.ndarray, ...]]:
    """Full forward pass.

    Returns the logits and the post-activation tensor at each activation
    site, in order. Stage-by-stage execution composes to exactly this because
    stages are cut at the activation sites.
    """
    boundary_values = []
    for stage_index in range(len(model.stage_groups)):
        x = run_stage(model, params, stage_index, x)
        if stage_index < len(model.stage_groups) - 1:
            x = apply_activation(kind, x, elu_alpha=elu_alpha)
            boundary_values.append(x)
    return x, tuple(boundary_values)
