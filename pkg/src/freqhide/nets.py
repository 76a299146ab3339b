"""Tiny convolutional nets in plain numpy with explicit backprop.

Everything here operates on float64 ``(N, C, H, W)`` batches. The layers are
deliberately minimal: 3x3 same-padding convolution, leaky ReLU, 2x2 average
pooling and a sigmoid head. Parameters live in flat vectors whose layout is
fully determined by an :class:`ArchSpec`, which keeps serialization and
finite-difference gradient checks straightforward.

The generator is residual with a zero-initialized final layer, so a freshly
initialized generator is exactly the identity map. The discriminator emits a
map of per-patch scores in (0, 1).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np

from .errors import ValidationError

LEAKY_SLOPE = 0.2


@dataclass(frozen=True)
class ArchSpec:
    """Architecture descriptor; fully determines parameter vector lengths."""

    channels: int = 3
    features: int = 8
    kernel: int = 3

    def __post_init__(self):
        if self.channels < 1 or self.features < 1:
            raise ValidationError("channels and features must be >= 1")
        if self.kernel % 2 != 1 or self.kernel < 1:
            raise ValidationError("kernel size must be odd and positive")


def generator_shapes(arch: ArchSpec) -> List[Tuple[int, ...]]:
    c, f, k = arch.channels, arch.features, arch.kernel
    return [(f, c, k, k), (f,), (f, f, k, k), (f,), (c, f, k, k), (c,)]


def discriminator_shapes(arch: ArchSpec) -> List[Tuple[int, ...]]:
    c, f, k = arch.channels, arch.features, arch.kernel
    return [(f, c, k, k), (f,), (f, f, k, k), (f,), (1, f, k, k), (1,)]


def param_count(shapes: Sequence[Tuple[int, ...]]) -> int:
    return int(sum(np.prod(s) for s in shapes))


def pack(arrays: Sequence[np.ndarray]) -> np.ndarray:
    return np.concatenate([np.asarray(a, dtype=np.float64).ravel() for a in arrays])


def unpack(flat: np.ndarray, shapes: Sequence[Tuple[int, ...]]) -> List[np.ndarray]:
    flat = np.asarray(flat, dtype=np.float64)
    if flat.shape != (param_count(shapes),):
        raise ValidationError(
            f"parameter vector length {flat.shape} does not match "
            f"architecture ({param_count(shapes)} expected)"
        )
    out, offset = [], 0
    for shape in shapes:
        size = int(np.prod(shape))
        out.append(flat[offset : offset + size].reshape(shape))
        offset += size
    return out


def init_generator(arch: ArchSpec, rng: np.random.Generator) -> np.ndarray:
    """Random hidden layers, zero final layer: the net starts as identity."""
    c, f, k = arch.channels, arch.features, arch.kernel
    w1 = rng.normal(0.0, np.sqrt(2.0 / (c * k * k)), size=(f, c, k, k))
    w2 = rng.normal(0.0, np.sqrt(2.0 / (f * k * k)), size=(f, f, k, k))
    w3 = np.zeros((c, f, k, k))
    return pack([w1, np.zeros(f), w2, np.zeros(f), w3, np.zeros(c)])


def init_discriminator(arch: ArchSpec, rng: np.random.Generator) -> np.ndarray:
    c, f, k = arch.channels, arch.features, arch.kernel
    w1 = rng.normal(0.0, np.sqrt(2.0 / (c * k * k)), size=(f, c, k, k))
    w2 = rng.normal(0.0, np.sqrt(2.0 / (f * k * k)), size=(f, f, k, k))
    w3 = rng.normal(0.0, 0.05, size=(1, f, k, k))
    return pack([w1, np.zeros(f), w2, np.zeros(f), w3, np.zeros(1)])


# ---------------------------------------------------------------------------
# layer primitives (forward + backward)
# ---------------------------------------------------------------------------

def _windows(xp: np.ndarray, k: int) -> np.ndarray:
    # (N, C, H, W, k, k) view over the padded input
    return np.lib.stride_tricks.sliding_window_view(xp, (k, k), axis=(2, 3))


def conv_forward(x: np.ndarray, w: np.ndarray, b: np.ndarray):
    k = w.shape[-1]
    p = k // 2
    xp = np.pad(x, ((0, 0), (0, 0), (p, p), (p, p)))
    cols = _windows(xp, k)
    y = np.einsum("nchwij,fcij->nfhw", cols, w, optimize=True)
    y += b[None, :, None, None]
    return y, (x, w, cols)


def conv_backward(dy: np.ndarray, cache):
    x, w, cols = cache
    k = w.shape[-1]
    p = k // 2
    n, _, h, wd = x.shape
    db = dy.sum(axis=(0, 2, 3))
    dw = np.einsum("nchwij,nfhw->fcij", cols, dy, optimize=True)
    dcols = np.einsum("nfhw,fcij->nchwij", dy, w, optimize=True)
    dxp = np.zeros((n, x.shape[1], h + 2 * p, wd + 2 * p))
    for i in range(k):
        for j in range(k):
            dxp[:, :, i : i + h, j : j + wd] += dcols[..., i, j]
    dx = dxp[:, :, p : p + h, p : p + wd]
    return dx, dw, db


def leaky_relu_forward(x: np.ndarray):
    y = np.where(x >= 0, x, LEAKY_SLOPE * x)
    return y, x


def leaky_relu_backward(dy: np.ndarray, cache):
    x = cache
    return dy * np.where(x >= 0, 1.0, LEAKY_SLOPE)


def avgpool2_forward(x: np.ndarray):
    """2x2 stride-2 average pooling; a trailing odd row/column is dropped."""
    n, c, h, w = x.shape
    h2, w2 = h // 2, w // 2
    if h2 < 1 or w2 < 1:
        raise ValidationError(f"input too small to pool: {h}x{w}")
    xc = x[:, :, : 2 * h2, : 2 * w2]
    y = xc.reshape(n, c, h2, 2, w2, 2).mean(axis=(3, 5))
    return y, x.shape


def avgpool2_backward(dy: np.ndarray, cache):
    n, c, h, w = cache
    h2, w2 = dy.shape[2], dy.shape[3]
    dx = np.zeros((n, c, h, w))
    spread = np.repeat(np.repeat(dy, 2, axis=2), 2, axis=3) / 4.0
    dx[:, :, : 2 * h2, : 2 * w2] = spread
    return dx


def sigmoid(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


# ---------------------------------------------------------------------------
# generator: residual conv net, identity at zero-init final layer
# ---------------------------------------------------------------------------

def generator_forward(params: np.ndarray, arch: ArchSpec, x: np.ndarray):
    w1, b1, w2, b2, w3, b3 = unpack(params, generator_shapes(arch))
    z1, c1 = conv_forward(x, w1, b1)
    a1, r1 = leaky_relu_forward(z1)
    z2, c2 = conv_forward(a1, w2, b2)
    a2, r2 = leaky_relu_forward(z2)
    z3, c3 = conv_forward(a2, w3, b3)
    y = x + z3
    return y, (c1, r1, c2, r2, c3)


def generator_backward(dy: np.ndarray, cache):
    """Returns (dx, flat gradient w.r.t. generator params)."""
    c1, r1, c2, r2, c3 = cache
    dz3 = dy
    da2, dw3, db3 = conv_backward(dz3, c3)
    dz2 = leaky_relu_backward(da2, r2)
    da1, dw2, db2 = conv_backward(dz2, c2)
    dz1 = leaky_relu_backward(da1, r1)
    dx_branch, dw1, db1 = conv_backward(dz1, c1)
    dx = dy + dx_branch
    return dx, pack([dw1, db1, dw2, db2, dw3, db3])


def run_generator(params: np.ndarray, arch: ArchSpec, x: np.ndarray) -> np.ndarray:
    y, _ = generator_forward(params, arch, x)
    return y


# ---------------------------------------------------------------------------
# discriminator: conv -> pool -> conv -> pool -> conv -> sigmoid patch scores
# ---------------------------------------------------------------------------

def discriminator_forward(params: np.ndarray, arch: ArchSpec, x: np.ndarray):
    w1, b1, w2, b2, w3, b3 = unpack(params, discriminator_shapes(arch))
    z1, c1 = conv_forward(x, w1, b1)
    a1, r1 = leaky_relu_forward(z1)
    p1, s1 = avgpool2_forward(a1)
    z2, c2 = conv_forward(p1, w2, b2)
    a2, r2 = leaky_relu_forward(z2)
    p2, s2 = avgpool2_forward(a2)
    z3, c3 = conv_forward(p2, w3, b3)
    scores = sigmoid(z3)
    return scores, (c1, r1, s1, c2, r2, s2, c3, scores)


def discriminator_backward(dscores: np.ndarray, cache):
    """Returns (dx, flat gradient w.r.t. discriminator params)."""
    c1, r1, s1, c2, r2, s2, c3, scores = cache
    dz3 = dscores * scores * (1.0 - scores)
    dp2, dw3, db3 = conv_backward(dz3, c3)
    da2 = avgpool2_backward(dp2, s2)
    dz2 = leaky_relu_backward(da2, r2)
    dp1, dw2, db2 = conv_backward(dz2, c2)
    da1 = avgpool2_backward(dp1, s1)
    dz1 = leaky_relu_backward(da1, r1)
    dx, dw1, db1 = conv_backward(dz1, c1)
    return dx, pack([dw1, db1, dw2, db2, dw3, db3])


def clip_gradient(grad: np.ndarray, max_norm: float) -> np.ndarray:
    """Global-norm gradient clipping; identity when already within bounds."""
    norm = float(np.linalg.norm(grad))
    if norm > max_norm > 0:
        return grad * (max_norm / norm)
    return grad
