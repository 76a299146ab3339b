"""Adversarially trained image enhancer.

A small residual generator maps first-pass hidden images toward the host
image's domain; a patch-level discriminator is trained against it with the
standard two-player cross-entropy objective. The generator additionally
carries an L1 content anchor toward its own input so it cannot collapse to
reproducing the host outright.

Training is desk scale: plain SGD with a fixed learning rate on small
patches, alternating one discriminator and one generator step per batch,
fully deterministic for a given seed.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .errors import TrainingDivergedError, ValidationError
from .nets import (
    ArchSpec,
    clip_gradient,
    discriminator_backward,
    discriminator_forward,
    discriminator_shapes,
    generator_backward,
    generator_forward,
    generator_shapes,
    init_discriminator,
    init_generator,
    param_count,
    run_generator,
)
from .spectral import validate_image

SCORE_EPS = 1e-7

MODEL_MAGIC = b"FQEN"
MODEL_FORMAT_VERSION = 1


def gan_losses(d_real: np.ndarray, d_fake: np.ndarray) -> Tuple[float, float]:
    """(generator loss, discriminator loss) from post-sigmoid score arrays.

    The discriminator loss is the negated two-player objective it maximizes,
    ``-mean log d_real - mean log(1 - d_fake)``; the generator loss is the
    non-saturating form ``-mean log d_fake``. Scores are clamped into
    [1e-7, 1 - 1e-7] rather than rejected.
    """
    d_real = np.clip(np.asarray(d_real, dtype=np.float64), SCORE_EPS, 1.0 - SCORE_EPS)
    d_fake = np.clip(np.asarray(d_fake, dtype=np.float64), SCORE_EPS, 1.0 - SCORE_EPS)
    disc_loss = float(-np.mean(np.log(d_real)) - np.mean(np.log(1.0 - d_fake)))
    gen_loss = float(-np.mean(np.log(d_fake)))
    return gen_loss, disc_loss


def _dloss_dscore_real(scores: np.ndarray) -> np.ndarray:
    # derivative of -mean log(clip(s)); zero in the clamped regions
    s = np.clip(scores, SCORE_EPS, 1.0 - SCORE_EPS)
    interior = (scores > SCORE_EPS) & (scores < 1.0 - SCORE_EPS)
    return np.where(interior, -1.0 / (scores.size * s), 0.0)


def _dloss_dscore_fake_disc(scores: np.ndarray) -> np.ndarray:
    # derivative of -mean log(1 - clip(s))
    s = np.clip(scores, SCORE_EPS, 1.0 - SCORE_EPS)
    interior = (scores > SCORE_EPS) & (scores < 1.0 - SCORE_EPS)
    return np.where(interior, 1.0 / (scores.size * (1.0 - s)), 0.0)


def discriminator_loss_and_grad(
    disc_params: np.ndarray, arch: ArchSpec, real: np.ndarray, fake: np.ndarray
) -> Tuple[float, np.ndarray]:
    """Discriminator loss and its analytic gradient w.r.t. disc parameters."""
    s_real, cache_r = discriminator_forward(disc_params, arch, real)
    s_fake, cache_f = discriminator_forward(disc_params, arch, fake)
    _, loss = gan_losses(s_real, s_fake)
    _, grad_r = discriminator_backward(_dloss_dscore_real(s_real), cache_r)
    _, grad_f = discriminator_backward(_dloss_dscore_fake_disc(s_fake), cache_f)
    return loss, grad_r + grad_f


def generator_loss_and_grad(
    gen_params: np.ndarray,
    disc_params: np.ndarray,
    arch: ArchSpec,
    x: np.ndarray,
    content_weight: float,
) -> Tuple[float, np.ndarray, Dict[str, float]]:
    """Total generator objective (adversarial + L1 anchor) and its gradient.

    Returns (loss, flat gradient w.r.t. generator params, parts) where parts
    splits the loss into its adversarial and content terms.
    """
    y, gen_cache = generator_forward(gen_params, arch, x)
    scores, disc_cache = discriminator_forward(disc_params, arch, y)
    adv = float(-np.mean(np.log(np.clip(scores, SCORE_EPS, 1.0 - SCORE_EPS))))
    content = float(np.mean(np.abs(y - x)))
    loss = adv + content_weight * content

    ds = _dloss_dscore_real(scores)  # same derivative form as -mean log s
    dy_adv, _ = discriminator_backward(ds, disc_cache)
    dy = dy_adv + content_weight * np.sign(y - x) / y.size
    _, grad = generator_backward(dy, gen_cache)
    return loss, grad, {"adversarial": adv, "content": content}


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 200
    batch_size: int = 4
    learning_rate: float = 0.02
    content_weight: float = 0.5
    seed: int = 0
    patch_size: int = 32
    features: int = 8
    clip_norm: float = 5.0  # global gradient-norm cap; keeps fixed-lr SGD stable

    def __post_init__(self):
        if self.epochs < 0:
            raise ValidationError("epochs must be >= 0")
        if self.batch_size < 1:
            raise ValidationError("batch_size must be >= 1")
        if self.learning_rate <= 0:
            raise ValidationError("learning_rate must be > 0")
        if self.content_weight < 0:
            raise ValidationError("content_weight must be >= 0")
        if self.patch_size < 4:
            raise ValidationError("patch_size must be >= 4")


@dataclass
class EnhancerModel:
    """Trained generator/discriminator pair plus training metadata."""

    arch: ArchSpec
    gen_params: np.ndarray
    disc_params: np.ndarray
    meta: Dict = field(default_factory=dict)


def _random_patch(
    image: np.ndarray, size: int, rng: np.random.Generator
) -> np.ndarray:
    _, h, w = image.shape
    if h < size or w < size:
        raise ValidationError(
            f"image {h}x{w} smaller than patch size {size}"
        )
    top = int(rng.integers(0, h - size + 1))
    left = int(rng.integers(0, w - size + 1))
    return image[:, top : top + size, left : left + size]


def _check_finite(step: str, epoch: int, values: Dict[str, float], params: np.ndarray):
    bad = [k for k, v in values.items() if not np.isfinite(v)]
    if bad or not np.all(np.isfinite(params)):
        detail = ", ".join(f"{k}={values[k]!r}" for k in values)
        raise TrainingDivergedError(
            f"non-finite {step} at epoch {epoch}: {detail}"
        )


def train_enhancer(
    synthetics: Sequence[np.ndarray],
    host: np.ndarray,
    config: TrainConfig,
) -> EnhancerModel:
    """Adversarially train the enhancer on hidden images against one host.

    Each batch crops one random patch per synthetic image and as many random
    host patches, then takes one SGD step on the discriminator followed by
    one on the generator. Deterministic for a fixed config and input order.
    """
    if len(synthetics) < 2:
        raise ValidationError("need at least 2 synthetic images to train")
    synths = [validate_image(s, f"synthetics[{i}]") for i, s in enumerate(synthetics)]
    host = validate_image(host, "host")
    channels = synths[0].shape[0]
    for i, s in enumerate(synths):
        if s.shape[0] != channels:
            raise ValidationError(f"synthetics[{i}] channel count differs")
    if host.shape[0] != channels:
        raise ValidationError("host channel count differs from synthetics")

    arch = ArchSpec(channels=channels, features=config.features)
    rng = np.random.default_rng(config.seed)
    gen = init_generator(arch, rng)
    disc = init_discriminator(arch, rng)

    ps = config.patch_size
    last_g = None
    last_d = None
    for epoch in range(config.epochs):
        order = rng.permutation(len(synths))
        epoch_g: List[float] = []
        epoch_d: List[float] = []
        for start in range(0, len(order), config.batch_size):
            idx = order[start : start + config.batch_size]
            fake_in = np.stack([_random_patch(synths[i], ps, rng) for i in idx])
            real = np.stack([_random_patch(host, ps, rng) for _ in idx])

            fake = run_generator(gen, arch, fake_in)
            d_loss, d_grad = discriminator_loss_and_grad(disc, arch, real, fake)
            disc = disc - config.learning_rate * clip_gradient(d_grad, config.clip_norm)
            _check_finite("discriminator step", epoch, {"d_loss": d_loss}, disc)

            g_loss, g_grad, _ = generator_loss_and_grad(
                gen, disc, arch, fake_in, config.content_weight
            )
            gen = gen - config.learning_rate * clip_gradient(g_grad, config.clip_norm)
            _check_finite("generator step", epoch, {"g_loss": g_loss}, gen)

            epoch_d.append(d_loss)
            epoch_g.append(g_loss)
        last_g = float(np.mean(epoch_g))
        last_d = float(np.mean(epoch_d))

    meta = {
        "seed": config.seed,
        "epochs": config.epochs,
        "batch_size": config.batch_size,
        "learning_rate": config.learning_rate,
        "content_weight": config.content_weight,
        "patch_size": config.patch_size,
        "clip_norm": config.clip_norm,
        "final_generator_loss": last_g,
        "final_discriminator_loss": last_d,
    }
    return EnhancerModel(arch=arch, gen_params=gen, disc_params=disc, meta=meta)


def enhance(model: EnhancerModel, image: np.ndarray) -> np.ndarray:
    """Apply the trained generator to one image and clamp to [0, 1]."""
    arr = validate_image(image)
    if arr.shape[0] != model.arch.channels:
        raise ValidationError(
            f"image has {arr.shape[0]} channels, model expects "
            f"{model.arch.channels}"
        )
    y = run_generator(model.gen_params, model.arch, arr[None])[0]
    return np.clip(y, 0.0, 1.0)


# ---------------------------------------------------------------------------
# model container: magic, version, JSON header, raw float64 LE parameters
# (byte layout documented in the README)
# ---------------------------------------------------------------------------

def save_model(model: EnhancerModel, path) -> None:
    header = {
        "arch": {
            "channels": model.arch.channels,
            "features": model.arch.features,
            "kernel": model.arch.kernel,
        },
        "generator_len": int(model.gen_params.size),
        "discriminator_len": int(model.disc_params.size),
        "meta": model.meta,
    }
    blob = json.dumps(header, sort_keys=True).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(MODEL_MAGIC)
        fh.write(struct.pack("<I", MODEL_FORMAT_VERSION))
        fh.write(struct.pack("<I", len(blob)))
        fh.write(blob)
        fh.write(model.gen_params.astype("<f8").tobytes())
        fh.write(model.disc_params.astype("<f8").tobytes())


def load_model(path) -> EnhancerModel:
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != MODEL_MAGIC:
            raise ValidationError(f"not an enhancer model file: bad magic {magic!r}")
        (version,) = struct.unpack("<I", fh.read(4))
        if version != MODEL_FORMAT_VERSION:
            raise ValidationError(f"unsupported model format version {version}")
        (header_len,) = struct.unpack("<I", fh.read(4))
        header = json.loads(fh.read(header_len).decode("utf-8"))
        arch = ArchSpec(**header["arch"])
        gen_len = header["generator_len"]
        disc_len = header["discriminator_len"]
        if gen_len != param_count(generator_shapes(arch)):
            raise ValidationError("generator length does not match architecture")
        if disc_len != param_count(discriminator_shapes(arch)):
            raise ValidationError("discriminator length does not match architecture")
        def read_params(name: str, count: int) -> np.ndarray:
            raw = fh.read(8 * count)
            if len(raw) != 8 * count:
                raise ValidationError(
                    f"model file truncated in {name} parameters"
                    f" ({len(raw)} of {8 * count} bytes)")
            return np.frombuffer(raw, dtype="<f8").astype(np.float64)

        gen = read_params("generator", gen_len)
        disc = read_params("discriminator", disc_len)
        if fh.read(1):
            raise ValidationError("model file has trailing bytes")
    return EnhancerModel(arch=arch, gen_params=gen, disc_params=disc, meta=header["meta"])


def identity_model(channels: int, features: int = 8, seed: int = 0) -> EnhancerModel:
    """Freshly initialized (untrained) model; its generator is the identity."""
    arch = ArchSpec(channels=channels, features=features)
    rng = np.random.default_rng(seed)
    return EnhancerModel(
        arch=arch,
        gen_params=init_generator(arch, rng),
        disc_params=init_discriminator(arch, rng),
        meta={"seed": seed, "epochs": 0},
    )
