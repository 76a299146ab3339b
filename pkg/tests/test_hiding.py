import numpy as np
import pytest
from oracles import direct_dft_hide, enumerate_mask

from freqhide.errors import ValidationError
from freqhide.hiding import (HidingParams, blend_amplitude, build_mask,
                             centered_coords, hide, refine)
from freqhide.spectral import decompose, fft2


class TestParams:
    def test_valid_range(self):
        HidingParams(0.0, 0.0)
        HidingParams(0.5, 1.0)

    def test_alpha_out_of_range(self):
        with pytest.raises(ValidationError, match=r"\[0, 0.5\]"):
            HidingParams(0.7, 0.5)
        with pytest.raises(ValidationError):
            HidingParams(-0.1, 0.5)

    def test_beta_out_of_range(self):
        with pytest.raises(ValidationError):
            HidingParams(0.25, 1.5)
        with pytest.raises(ValidationError):
            HidingParams(0.25, -0.01)


class TestMask:
    def test_known_cardinalities(self):
        assert build_mask(8, 8, 0.0).sum() == 1
        assert build_mask(8, 8, 0.25).sum() == 25
        assert build_mask(8, 8, 0.5).sum() == 64

    def test_alpha_half_is_all_ones(self):
        for h, w in [(4, 4), (5, 7), (8, 6)]:
            assert np.all(build_mask(h, w, 0.5) == 1.0)

    def test_matches_enumeration(self):
        for h in (4, 5, 8, 11):
            for w in (4, 6, 9, 16):
                for alpha in (0.0, 0.1, 0.25, 0.4, 0.5):
                    got = build_mask(h, w, alpha)
                    want = enumerate_mask(h, w, alpha)
                    assert np.array_equal(got, want), (h, w, alpha)

    def test_centered_coords(self):
        m, n = centered_coords(4, 5)
        assert list(m[:, 0]) == [-2, -1, 0, 1]
        assert list(n[0, :]) == [-2, -1, 0, 1, 2]

    def test_mask_is_symmetric(self):
        # band symmetric in centered coords, including Nyquist row/col partners
        for h, w in [(6, 6), (7, 5), (8, 10)]:
            for alpha in (0.1, 0.25, 0.4):
                mask = build_mask(h, w, alpha)
                rows = np.arange(h)
                cols = np.arange(w)
                mirror = mask[np.ix_((-rows + h // 2 * 2) % h, (-cols + w // 2 * 2) % w)]
                assert np.array_equal(mask, mirror)


class TestBlend:
    def test_inside_and_outside_band(self):
        a_host = np.full((1, 4, 4), 2.0)
        a_secret = np.full((1, 4, 4), 6.0)
        mask = build_mask(4, 4, 0.25)
        out = blend_amplitude(a_host, a_secret, mask, beta=0.5)
        inside = mask.astype(bool)
        assert np.all(out[0][inside] == 4.0)
        assert np.all(out[0][~inside] == 2.0)

    def test_beta_zero_keeps_host(self):
        rng = np.random.default_rng(0)
        a_host = rng.random((3, 6, 6))
        a_secret = rng.random((3, 6, 6))
        out = blend_amplitude(a_host, a_secret, build_mask(6, 6, 0.4), beta=0.0)
        assert np.array_equal(out, a_host)

    def test_shape_mismatch_rejected(self):
        with pytest.raises(ValidationError):
            blend_amplitude(np.ones((1, 4, 4)), np.ones((1, 4, 4)),
                            np.ones((5, 5)), beta=0.5)


class TestHide:
    def test_beta_zero_returns_host(self):
        rng = np.random.default_rng(1)
        secret = rng.random((3, 12, 12))
        host = rng.random((3, 12, 12))
        out = hide(secret, host, HidingParams(0.25, 0.0))
        assert np.max(np.abs(out - host)) < 1e-9

    def test_hiding_into_itself_returns_host(self):
        rng = np.random.default_rng(2)
        host = rng.random((3, 10, 10))
        out = hide(host, host, HidingParams(0.5, 0.7))
        assert np.max(np.abs(out - host)) < 1e-6

    def test_host_phase_is_kept(self):
        # low-contrast pair with a small beta keeps the output inside [0,1],
        # so the final clamp is inactive and phases must match the host's
        rng = np.random.default_rng(3)
        secret = 0.4 + 0.2 * rng.random((1, 8, 8))
        host = 0.4 + 0.2 * rng.random((1, 8, 8))
        out = hide(secret, host, HidingParams(0.25, 0.2))
        assert out.min() > 0.0 and out.max() < 1.0  # clamp never engaged
        phase_host = decompose(fft2(host)).phase
        ap_out = decompose(fft2(out))
        significant = ap_out.amplitude > 1e-6
        diff = np.angle(np.exp(1j * (ap_out.phase - phase_host)))
        assert np.max(np.abs(diff[significant])) < 1e-9

    def test_beta_monotonicity(self):
        rng = np.random.default_rng(4)
        betas = np.linspace(0.0, 1.0, 6)
        for _ in range(10):
            secret = rng.random((1, 8, 8))
            host = rng.random((1, 8, 8))
            norms = [
                np.linalg.norm(hide(secret, host, HidingParams(0.25, b)) - host)
                for b in betas
            ]
            assert all(n2 >= n1 - 1e-12 for n1, n2 in zip(norms, norms[1:]))

    def test_matches_direct_dft_oracle(self):
        rng = np.random.default_rng(5)
        secret = rng.random((1, 8, 8))
        host = rng.random((1, 8, 8))
        got = hide(secret, host, HidingParams(0.25, 0.5))
        want = direct_dft_hide(secret, host, 0.25, 0.5)
        assert np.max(np.abs(got - want)) < 1e-9

    def test_oracle_across_params(self):
        rng = np.random.default_rng(6)
        secret = rng.random((1, 6, 6))
        host = rng.random((1, 6, 6))
        for alpha, beta in [(0.0, 1.0), (0.1, 0.3), (0.5, 0.9)]:
            got = hide(secret, host, HidingParams(alpha, beta))
            want = direct_dft_hide(secret, host, alpha, beta)
            assert np.max(np.abs(got - want)) < 1e-9, (alpha, beta)

    def test_output_clamped(self):
        rng = np.random.default_rng(7)
        secret = rng.random((1, 8, 8)) * 5.0  # overdriven secret amplitude
        secret = np.clip(secret, 0, 1)
        bright = np.clip(rng.random((1, 8, 8)) + 0.8, 0, 1)
        out = hide(secret, bright, HidingParams(0.5, 1.0))
        assert out.min() >= 0.0
        assert out.max() <= 1.0

    def test_shape_mismatch_rejected(self):
        with pytest.raises(ValidationError):
            hide(np.zeros((1, 8, 8)), np.zeros((1, 4, 4)), HidingParams(0.25, 0.5))
        with pytest.raises(ValidationError):
            hide(np.zeros((3, 8, 8)), np.zeros((1, 8, 8)), HidingParams(0.25, 0.5))


class TestRefine:
    def test_refine_reembeds_secret_amplitude(self):
        rng = np.random.default_rng(8)
        carrier = rng.random((1, 8, 8))
        secret = rng.random((1, 8, 8))
        params = HidingParams(0.5, 0.1)
        out = refine(carrier, secret, params)
        want = hide(secret, carrier, params)
        assert np.array_equal(out, want)

    def test_refine_beta_zero_is_carrier(self):
        rng = np.random.default_rng(9)
        carrier = rng.random((3, 8, 8))
        secret = rng.random((3, 8, 8))
        out = refine(carrier, secret, HidingParams(0.5, 0.0))
        assert np.max(np.abs(out - carrier)) < 1e-9
