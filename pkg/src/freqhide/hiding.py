"""Concealing one image inside another by low-frequency amplitude exchange.

The hiding step keeps the host's phase spectrum untouched (phase carries the
structure a viewer perceives) and blends the secret's amplitude into the
host's amplitude inside a centered low-frequency rectangle. A second
low-intensity pass (:func:`refine`) re-embeds the secret's amplitude into an
already-processed carrier.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .spectral import AmplitudePhase, decompose, fft2, ifft2, recompose, validate_image


@dataclass(frozen=True)
class HidingParams:
    """Blend controls: ``alpha`` is the mask half-extent as a fraction of the
    image size (0 = DC only, 0.5 = whole spectrum), ``beta`` the intensity of
    the secret's amplitude inside the mask."""

    alpha: float
    beta: float

    def __post_init__(self):
        if not (0.0 <= self.alpha <= 0.5):
            raise ValidationError(
                f"alpha must lie in [0, 0.5], got {self.alpha!r}"
            )
        if not (0.0 <= self.beta <= 1.0):
            raise ValidationError(f"beta must lie in [0, 1], got {self.beta!r}")


def centered_coords(height: int, width: int):
    """Centered integer frequency coordinates for an H x W spectrum.

    Returns ``(m, n)`` as a broadcastable pair with ``m`` in
    ``-floor(H/2) .. ceil(H/2)-1`` (column vector) and likewise for ``n``.
    """
    m = np.arange(height) - height // 2
    n = np.arange(width) - width // 2
    return m[:, None], n[None, :]


def build_mask(height: int, width: int, alpha: float) -> np.ndarray:
    """Binary low-frequency mask: 1 iff |m| <= alpha*H and |n| <= alpha*W.

    Coordinates are centered (DC at ``(H//2, W//2)``), bounds inclusive.
    The ones always form a single axis-aligned rectangle around DC.
    """
    if height < 1 or width < 1:
        raise ValidationError(f"mask size must be positive, got {height}x{width}")
    if not (0.0 <= alpha <= 0.5):
        raise ValidationError(f"alpha must lie in [0, 0.5], got {alpha!r}")
    m, n = centered_coords(height, width)
    mask = (np.abs(m) <= alpha * height) & (np.abs(n) <= alpha * width)
    return mask.astype(np.float64)


def blend_amplitude(
    a_host: np.ndarray,
    a_secret: np.ndarray,
    mask: np.ndarray,
    beta: float,
) -> np.ndarray:
    """Blend two amplitude spectra inside the masked region.

    Returns ``[(1-beta)*a_host + beta*a_secret] * mask + a_host * (1-mask)``
    per channel; the 2D mask broadcasts over channels.
    """
    a_host = np.asarray(a_host, dtype=np.float64)
    a_secret = np.asarray(a_secret, dtype=np.float64)
    mask = np.asarray(mask, dtype=np.float64)
    if a_host.shape != a_secret.shape:
        raise ValidationError(
            f"amplitude shapes differ: {a_host.shape} vs {a_secret.shape}"
        )
    if mask.shape != a_host.shape[-2:]:
        raise ValidationError(
            f"mask shape {mask.shape} does not match spectrum {a_host.shape[-2:]}"
        )
    if not (0.0 <= beta <= 1.0):
        raise ValidationError(f"beta must lie in [0, 1], got {beta!r}")
    blended = (1.0 - beta) * a_host + beta * a_secret
    return blended * mask + a_host * (1.0 - mask)


def hide(secret: np.ndarray, host: np.ndarray, params: HidingParams) -> np.ndarray:
    """Embed ``secret``'s low-frequency amplitude into ``host``.

    The output keeps the host's phase everywhere, swaps amplitude inside the
    ``alpha`` rectangle with intensity ``beta``, and is clamped to [0, 1]
    after the inverse transform. Inputs must share a shape; resizing is the
    pipeline's job, not this operation's.
    """
    secret = validate_image(secret, "secret")
    host = validate_image(host, "host")
    if secret.shape != host.shape:
        raise ValidationError(
            f"secret shape {secret.shape} != host shape {host.shape}"
        )
    _, height, width = host.shape

    host_amp, host_phase = decompose(fft2(host))
    secret_amp = np.abs(fft2(secret))
    mask = build_mask(height, width, params.alpha)
    blended = blend_amplitude(host_amp, secret_amp, mask, params.beta)
    out = ifft2(recompose(AmplitudePhase(blended, host_phase)))
    return np.clip(out, 0.0, 1.0)


def refine(carrier: np.ndarray, secret: np.ndarray, params: HidingParams) -> np.ndarray:
    """Low-intensity second hiding pass.

    The already-processed ``carrier`` (typically the enhancer output) plays
    the host role and the original secret's amplitude is re-embedded, which
    restores some of the secret's low-level color/contrast statistics.
    """
    return hide(secret, carrier, params)
