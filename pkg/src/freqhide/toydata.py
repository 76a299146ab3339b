"""Procedural toy images for demos and tests.

Two generators live here:

* a tiny labeled dataset whose two classes differ in the strength of two
  low-frequency stripe patterns, so the class signal survives amplitude
  blending and is visible to a linear probe on downsampled pixels;
* a color-cast restoration task for exercising the enhancer: synthetic
  inputs are clean images plus a fixed channel cast, and the reference
  domain is the clean images themselves.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import List, Tuple

import numpy as np

from .dataset import save_image

CLASS_NAMES = ("a", "b")


def _coarse_noise(rng: np.random.Generator, channels: int, height: int, width: int,
                  grid: int = 6) -> np.ndarray:
    """Smooth random field: a coarse grid upsampled bilinearly."""
    coarse = rng.standard_normal((channels, grid, grid))
    ys = np.linspace(0.0, grid - 1.0, height)
    xs = np.linspace(0.0, grid - 1.0, width)
    y0 = np.clip(ys.astype(int), 0, grid - 2)
    x0 = np.clip(xs.astype(int), 0, grid - 2)
    wy = (ys - y0)[None, :, None]
    wx = (xs - x0)[None, None, :]
    c00 = coarse[:, y0][:, :, x0]
    c01 = coarse[:, y0][:, :, x0 + 1]
    c10 = coarse[:, y0 + 1][:, :, x0]
    c11 = coarse[:, y0 + 1][:, :, x0 + 1]
    top = c00 * (1.0 - wx) + c01 * wx
    bottom = c10 * (1.0 - wx) + c11 * wx
    return top * (1.0 - wy) + bottom * wy


def make_host_image(channels: int = 3, size: Tuple[int, int] = (64, 64),
                    seed: int = 0) -> np.ndarray:
    """Smooth structured host: radial rings over a gentle random field."""
    height, width = size
    rng = np.random.default_rng([7, seed])
    yy = (np.arange(height) - height / 2.0)[:, None] / max(height, 1)
    xx = (np.arange(width) - width / 2.0)[None, :] / max(width, 1)
    radius = np.sqrt(yy**2 + xx**2)
    rings = 0.5 + 0.22 * np.cos(2.0 * np.pi * 3.0 * radius)
    tilt = 0.08 * (yy + xx)
    base = rings[None, :, :] + tilt[None, :, :]
    base = base + 0.10 * _coarse_noise(rng, channels, height, width)
    shade = np.array([0.04, 0.0, -0.04][:channels]).reshape(-1, 1, 1)
    return np.clip(base + shade, 0.05, 0.95)


def make_class_image(label: str, index: int, size: Tuple[int, int] = (64, 64),
                     seed: int = 0, channels: int = 3) -> np.ndarray:
    """One labeled sample; classes differ in two low-frequency stripe strengths."""
    if label not in CLASS_NAMES:
        raise ValueError(f"unknown toy class {label!r}")
    height, width = size
    rng = np.random.default_rng([11, seed, CLASS_NAMES.index(label), index])
    rows = np.cos(2.0 * np.pi * 2.0 * np.arange(height) / height)[:, None]
    cols = np.cos(2.0 * np.pi * 2.0 * np.arange(width) / width)[None, :]
    strong = rng.uniform(0.16, 0.24)
    weak = rng.uniform(0.0, 0.03)
    if label == "a":
        signal = strong * rows + weak * cols
    else:
        signal = weak * rows + strong * cols
    base = 0.5 + 0.10 * _coarse_noise(rng, channels, height, width)
    fine = 0.02 * rng.standard_normal((channels, height, width))
    return np.clip(base + signal[None, :, :] + fine, 0.0, 1.0)


def write_demo_dataset(root, n_per_class: int = 5, size: Tuple[int, int] = (64, 64),
                       seed: int = 0) -> List[str]:
    """Write the labeled toy set as PNGs, one directory per class.

    Returns the written ids (paths relative to ``root``).
    """
    root = Path(root)
    ids: List[str] = []
    for label in CLASS_NAMES:
        for index in range(n_per_class):
            image = make_class_image(label, index, size=size, seed=seed)
            rel = f"{label}/{label}_{index:03d}.png"
            save_image(image, root / rel)
            ids.append(rel)
    return ids


@dataclass(frozen=True)
class ColorCastTask:
    """Fixed-cast restoration problem for enhancer tests.

    ``train_synthetics`` carry the cast; ``host`` is a clean reference image.
    ``eval_clean[i]`` and ``eval_cast[i]`` are aligned held-out pairs.
    """

    host: np.ndarray
    train_synthetics: List[np.ndarray]
    eval_clean: List[np.ndarray]
    eval_cast: List[np.ndarray]
    cast: Tuple[float, float, float]


def make_color_cast_task(seed: int = 0, n_train: int = 4, n_eval: int = 6,
                         size: Tuple[int, int] = (48, 48),
                         cast: Tuple[float, float, float] = (0.14, -0.10, 0.08)) -> ColorCastTask:
    shift = np.array(cast).reshape(3, 1, 1)
    host = make_host_image(3, size, seed=seed)
    train = [np.clip(make_host_image(3, size, seed=seed * 1000 + 1 + i) + shift, 0.0, 1.0)
             for i in range(n_train)]
    eval_clean = [make_host_image(3, size, seed=seed * 1000 + 500 + j) for j in range(n_eval)]
    eval_cast = [np.clip(img + shift, 0.0, 1.0) for img in eval_clean]
    return ColorCastTask(host=host, train_synthetics=train, eval_clean=eval_clean,
                         eval_cast=eval_cast, cast=cast)
