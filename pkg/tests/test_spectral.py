import numpy as np
import pytest

from freqhide.errors import ValidationError
from freqhide.spectral import (AmplitudePhase, decompose, fft2, ifft2,
                               recompose, validate_image)


def test_roundtrip_random_shapes():
    rng = np.random.default_rng(0)
    for shape in [(1, 8, 8), (3, 31, 17), (2, 16, 9), (1, 1, 1)]:
        img = rng.random(shape)
        back, residue = ifft2(fft2(img), return_residue=True)
        assert np.max(np.abs(back - img)) < 1e-9
        assert residue < 1e-9


def test_dc_bin_is_centered():
    img = np.full((1, 4, 6), 0.25)
    spec = fft2(img)
    # constant image: all energy in the centered DC bin
    dc = spec[0, 2, 3]
    assert dc == pytest.approx(0.25 * 4 * 6)
    spec[0, 2, 3] = 0
    assert np.max(np.abs(spec)) < 1e-12


def test_single_pixel_impulse_flat_amplitude():
    img = np.zeros((1, 2, 2))
    img[0, 0, 0] = 1.0
    amplitude = decompose(fft2(img)).amplitude
    assert np.allclose(amplitude, 1.0)


def test_parseval():
    rng = np.random.default_rng(1)
    img = rng.random((3, 13, 21))
    spec = fft2(img)
    spatial = np.sum(np.abs(img) ** 2)
    spectral = np.sum(np.abs(spec) ** 2) / (13 * 21)
    assert spectral == pytest.approx(spatial, rel=1e-12)


def test_decompose_recompose_roundtrip():
    rng = np.random.default_rng(2)
    img = rng.random((2, 9, 7))
    spec = fft2(img)
    again = recompose(decompose(spec))
    assert np.max(np.abs(again - spec)) < 1e-9


def test_phase_in_half_open_interval():
    rng = np.random.default_rng(3)
    phase = decompose(fft2(rng.random((3, 16, 16)))).phase
    assert np.all(phase > -np.pi)
    assert np.all(phase <= np.pi)


def test_zero_spectrum_has_zero_phase():
    ap = decompose(np.zeros((1, 4, 4), dtype=complex))
    assert np.all(ap.amplitude == 0)
    assert np.all(ap.phase == 0)


def test_negative_amplitude_rejected():
    amp = -np.ones((1, 2, 2))
    with pytest.raises(ValidationError):
        recompose(AmplitudePhase(amp, np.zeros((1, 2, 2))))


def test_validate_image_rejects_bad_inputs():
    with pytest.raises(ValidationError):
        validate_image(np.zeros((4, 4)))  # missing channel axis
    with pytest.raises(ValidationError):
        validate_image(np.full((1, 2, 2), np.nan))
    with pytest.raises(ValidationError):
        validate_image(np.zeros((1, 2, 2), dtype=complex))


def test_ifft2_does_not_clamp():
    # inverse of a scaled spectrum exceeds [0,1]; values must pass through
    img = np.full((1, 4, 4), 0.9)
    spec = fft2(img) * 2.0
    back = ifft2(spec)
    assert back.max() > 1.0
