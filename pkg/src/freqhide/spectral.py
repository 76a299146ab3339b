"""Per-channel 2D FFT with centered spectra, plus amplitude/phase decomposition.

Conventions used throughout the package:

- An image is a real ``(C, H, W)`` array, nominally in [0, 1].
- A spectrum is a complex ``(C, H, W)`` array in centered coordinates:
  the DC bin sits at index ``(H//2, W//2)``, i.e. frequency index
  ``m`` runs over ``-floor(H/2) .. ceil(H/2)-1`` along each axis.
- The forward transform is unnormalized; the inverse carries ``1/(H*W)``.

All math is done in 64-bit floats (complex128 for spectra).
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .errors import ValidationError


class AmplitudePhase(NamedTuple):
    """Element-wise modulus and argument of a spectrum."""

    amplitude: np.ndarray  # real >= 0, shape (C, H, W)
    phase: np.ndarray      # real in (-pi, pi], shape (C, H, W)


def validate_image(image: np.ndarray, name: str = "image") -> np.ndarray:
    """Check shape/finiteness of a (C, H, W) raster and return it as float64."""
    arr = np.asarray(image)
    if arr.ndim != 3:
        raise ValidationError(f"{name} must have shape (C, H, W), got ndim={arr.ndim}")
    if arr.shape[0] < 1 or arr.shape[1] < 1 or arr.shape[2] < 1:
        raise ValidationError(f"{name} has an empty dimension: {arr.shape}")
    if np.iscomplexobj(arr):
        raise ValidationError(f"{name} must be real-valued")
    arr = arr.astype(np.float64, copy=False)
    if not np.all(np.isfinite(arr)):
        raise ValidationError(f"{name} contains non-finite values")
    return arr


def validate_spectrum(spectrum: np.ndarray, name: str = "spectrum") -> np.ndarray:
    arr = np.asarray(spectrum).astype(np.complex128, copy=False)
    if arr.ndim != 3:
        raise ValidationError(f"{name} must have shape (C, H, W), got ndim={arr.ndim}")
    if not np.all(np.isfinite(arr)):
        raise ValidationError(f"{name} contains non-finite values")
    return arr


def fft2(image: np.ndarray) -> np.ndarray:
    """Forward per-channel 2D DFT, shifted so DC sits at (H//2, W//2)."""
    arr = validate_image(image)
    spec = np.fft.fft2(arr, axes=(-2, -1))
    return np.fft.fftshift(spec, axes=(-2, -1))


def ifft2(spectrum: np.ndarray, return_residue: bool = False):
    """Inverse of :func:`fft2`; returns the real part of the result.

    The imaginary residue left after the inverse transform is dropped, not
    treated as an error: blended spectra need not be conjugate-symmetric.
    Pass ``return_residue=True`` to also get the max absolute imaginary
    magnitude for diagnostics. No clamping is applied here.
    """
    arr = validate_spectrum(spectrum)
    unshifted = np.fft.ifftshift(arr, axes=(-2, -1))
    out = np.fft.ifft2(unshifted, axes=(-2, -1))
    residue = float(np.max(np.abs(out.imag)))
    real = np.ascontiguousarray(out.real)
    if return_residue:
        return real, residue
    return real


def decompose(spectrum: np.ndarray) -> AmplitudePhase:
    """Split a spectrum into modulus and argument.

    Zero bins get phase 0 (numpy's ``angle`` convention); an argument of
    exactly -pi is folded to +pi so phases live in (-pi, pi].
    """
    arr = validate_spectrum(spectrum)
    amplitude = np.abs(arr)
    phase = np.angle(arr)
    phase[phase == -np.pi] = np.pi
    return AmplitudePhase(amplitude=amplitude, phase=phase)


def recompose(ap: AmplitudePhase) -> np.ndarray:
    """Rebuild a complex spectrum as ``amplitude * (cos(phase) + i sin(phase))``."""
    amplitude = np.asarray(ap.amplitude, dtype=np.float64)
    phase = np.asarray(ap.phase, dtype=np.float64)
    if amplitude.shape != phase.shape:
        raise ValidationError(
            f"amplitude shape {amplitude.shape} != phase shape {phase.shape}"
        )
    if np.any(amplitude < 0):
        raise ValidationError("amplitude must be nonnegative everywhere")
    return amplitude * (np.cos(phase) + 1j * np.sin(phase))
