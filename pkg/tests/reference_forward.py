"""Independent brute-force reference for the network forward pass.

Everything here is recomputed from first principles: the splitmix64 draw
stream, the parameter draw order, and every layer as explicit loops over
output positions. Nothing is imported from the package, so agreement between
this module and the simulator's functional path is a real check of both.
"""

from __future__ import annotations

import math

import numpy as np

MASK64 = (1 << 64) - 1
INPUT_SEED_SALT = 0xA5A5_5A5A_0F0F_F0F0


def splitmix64_stream(seed: int):
    state = seed & MASK64
    while True:
        state = (state + 0x9E3779B97F4A7C15) & MASK64
        z = state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
        yield z ^ (z >> 31)


def uniform_stream(seed: int):
    for word in splitmix64_stream(seed):
        yield (word >> 11) * 2.0**-53 - 0.5


def draw(stream, shape):
    flat = [next(stream) for _ in range(int(np.prod(shape)))]
    return np.array(flat, dtype=np.float64).reshape(shape)


def reference_params(seed: int) -> dict:
    stream = uniform_stream(seed)
    params = {}
    params["conv1_w"] = draw(stream, (6, 3, 5, 5))
    params["conv1_b"] = draw(stream, (6,))
    params["conv2_w"] = draw(stream, (16, 6, 5, 5))
    params["conv2_b"] = draw(stream, (16,))
    params["fc1_w"] = draw(stream, (120, 400))
    params["fc1_b"] = draw(stream, (120,))
    params["fc2_w"] = draw(stream, (84, 120))
    params["fc2_b"] = draw(stream, (84,))
    params["fc3_w"] = draw(stream, (10, 84))
    params["fc3_b"] = draw(stream, (10,))
    return params


def reference_input(seed: int) -> np.ndarray:
    return draw(uniform_stream(seed ^ INPUT_SEED_SALT), (3, 32, 32))


def scalar_activation(key: str, x: float, elu_alpha: float = 1.0) -> float:
    if key == "heaviside":
        return 1.0 if x > 0.0 else 0.0
    if key == "tanh":
        return math.tanh(x)
    if key == "sigmoid":
        if x >= 0.0:
            return 1.0 / (1.0 + math.exp(-x))
        ex = math.exp(x)
        return ex / (1.0 + ex)
    if key == "relu":
        return x if x > 0.0 else 0.0
    if key == "leaky_relu":
        return x if x > 0.0 else 0.01 * x
    if key == "elu":
        return x if x > 0.0 else elu_alpha * math.expm1(x)
    if key == "softplus":
        return math.log1p(math.exp(-abs(x))) + max(x, 0.0)
    raise ValueError(f"unknown activation {key!r}")


def activate(key: str, x: np.ndarray, elu_alpha: float = 1.0) -> np.ndarray:
    flat = [scalar_activation(key, float(v), elu_alpha) for v in x.reshape(-1)]
    return np.array(flat, dtype=np.float64).reshape(x.shape)


def conv2d(x: np.ndarray, weights: np.ndarray, bias: np.ndarray) -> np.ndarray:
    out_c = weights.shape[0]
    k = weights.shape[-1]
    h = x.shape[1] - k + 1
    w = x.shape[2] - k + 1
    out = np.zeros((out_c, h, w), dtype=np.float64)
    for o in range(out_c):
        for i in range(h):
            for j in range(w):
                window = x[:, i : i + k, j : j + k]
                out[o, i, j] = float(np.sum(weights[o] * window)) + bias[o]
    return out


def pool2x2(x: np.ndarray) -> np.ndarray:
    c, h, w = x.shape
    out = np.zeros((c, h // 2, w // 2), dtype=np.float64)
    for ch in range(c):
        for i in range(h // 2):
            for j in range(w // 2):
                out[ch, i, j] = max(
                    x[ch, 2 * i, 2 * j],
                    x[ch, 2 * i, 2 * j + 1],
                    x[ch, 2 * i + 1, 2 * j],
                    x[ch, 2 * i + 1, 2 * j + 1],
                )
    return out


def fc(x: np.ndarray, weights: np.ndarray, bias: np.ndarray) -> np.ndarray:
    out = np.zeros(weights.shape[0], dtype=np.float64)
    flat = x.reshape(-1)
    for r in range(weights.shape[0]):
        out[r] = float((weights[r] * flat).sum()) + bias[r]
    return out


def reference_forward(seed: int, key: str, elu_alpha: float = 1.0) -> np.ndarray:
    p = reference_params(seed)
    x = reference_input(seed)
    x = activate(key, conv2d(x, p["conv1_w"], p["conv1_b"]), elu_alpha)
    x = pool2x2(x)
    x = activate(key, conv2d(x, p["conv2_w"], p["conv2_b"]), elu_alpha)
    x = pool2x2(x)
    x = activate(key, fc(x, p["fc1_w"], p["fc1_b"]), elu_alpha)
    x = activate(key, fc(x, p["fc2_w"], p["fc2_b"]), elu_alpha)
    return fc(x, p["fc3_w"], p["fc3_b"])
