from types import SimpleNamespace

import numpy as np
import pytest

from freqhide.errors import ValidationError
from freqhide.metrics import (PAIR_KINDS, evaluate_pairs, format_report_text,
                              psnr, ssim, write_report)


def toy_manifest(entries):
    return SimpleNamespace(entries=entries)


class TestSsim:
    def test_identity_is_exactly_one(self):
        rng = np.random.default_rng(0)
        x = rng.random((3, 16, 16))
        assert ssim(x, x) == 1.0

    def test_constant_pair_golden_value(self):
        a = np.zeros((1, 16, 16))
        b = np.ones((1, 16, 16))
        # means 0 and 1, zero variance: score reduces to C1 / (1 + C1)
        want = 1e-4 / (1.0 + 1e-4)
        assert ssim(a, b) == pytest.approx(want, abs=1e-8)

    def test_symmetric(self):
        rng = np.random.default_rng(1)
        a = rng.random((3, 16, 16))
        b = rng.random((3, 16, 16))
        assert abs(ssim(a, b) - ssim(b, a)) < 1e-12

    def test_range_and_degradation(self):
        rng = np.random.default_rng(2)
        a = rng.random((1, 32, 32))
        noisy = np.clip(a + 0.3 * rng.standard_normal(a.shape), 0, 1)
        s = ssim(a, noisy)
        assert -1.0 <= s < 1.0
        assert s < ssim(a, np.clip(a + 0.01, 0, 1))

    def test_image_smaller_than_window_rejected(self):
        small = np.zeros((1, 8, 8))  # window is 11x11
        with pytest.raises(ValidationError):
            ssim(small, small)

    def test_shape_mismatch_rejected(self):
        with pytest.raises(ValidationError):
            ssim(np.zeros((1, 16, 16)), np.zeros((1, 16, 17)))


class TestPsnr:
    def test_uniform_offset_golden_value(self):
        a = np.full((1, 12, 12), 0.4)
        b = a + 0.1  # no clipping anywhere
        assert psnr(a, b) == pytest.approx(20.0, abs=1e-9)

    def test_identical_hits_cap(self):
        a = np.full((3, 8, 8), 0.5)
        assert psnr(a, a) == 100.0

    def test_constant_quarter_mse(self):
        a = np.zeros((1, 4, 4))
        b = np.full((1, 4, 4), 0.5)
        assert psnr(a, b) == pytest.approx(10.0 * np.log10(1.0 / 0.25), abs=1e-9)

    def test_symmetry(self):
        rng = np.random.default_rng(3)
        a = rng.random((1, 8, 8))
        b = rng.random((1, 8, 8))
        assert psnr(a, b) == psnr(b, a)


class TestEvaluatePairs:
    @staticmethod
    def build(n=3, seed=0, size=16):
        rng = np.random.default_rng(seed)
        images = {}
        entries = []
        for i in range(n):
            ident = f"img{i}"
            entries.append(SimpleNamespace(secret_id=ident))
            for role in ("host", "secret", "stego", "refined"):
                images[(ident, role)] = rng.random((1, size, size))
        return toy_manifest(entries), lambda e, role: images[(e.secret_id, role)]

    def test_means_equal_hand_average(self):
        manifest, loader = self.build()
        report = evaluate_pairs(manifest, loader)
        # recompute one pair kind by hand from the same loader
        vals = [
            ssim(loader(e, "host"), loader(e, "refined")) for e in manifest.entries
        ]
        assert report.mean("host_vs_refined", "ssim") == pytest.approx(
            sum(vals) / len(vals), abs=1e-12)
        for kind in PAIR_KINDS:
            assert report.counts[kind] == 3

    def test_stego_equals_host_gives_unit_ssim(self):
        rng = np.random.default_rng(4)
        host = rng.random((1, 16, 16))
        images = {"host": host, "refined": host.copy(), "stego": host.copy(),
                  "secret": rng.random((1, 16, 16))}
        manifest = toy_manifest([SimpleNamespace(secret_id="only")])
        report = evaluate_pairs(manifest, lambda e, role: images[role])
        assert report.mean("host_vs_refined", "ssim") == 1.0
        assert report.mean("host_vs_refined", "psnr") == 100.0

    def test_empty_manifest_rejected(self):
        with pytest.raises(ValidationError):
            evaluate_pairs(toy_manifest([]), lambda e, r: None)

    def test_per_entry_errors_recorded(self):
        manifest, loader = self.build()

        def flaky(entry, role):
            if entry.secret_id == "img1":
                raise IOError("unreadable")
            return loader(entry, role)

        report = evaluate_pairs(manifest, flaky)
        assert len(report.errors) == 1
        assert "img1" in report.errors[0]
        assert report.counts["host_vs_stego"] == 2

    def test_extra_metric_plugs_in(self):
        manifest, loader = self.build()
        report = evaluate_pairs(
            manifest, loader,
            extra_metrics={"mae": lambda a, b: float(np.mean(np.abs(a - b)))})
        assert "mae" in report.pairs["host_vs_refined"]
        assert report.pairs["host_vs_refined"]["mae"] > 0

    def test_extra_metric_collision_rejected(self):
        manifest, loader = self.build()
        with pytest.raises(ValidationError):
            evaluate_pairs(manifest, loader, extra_metrics={"ssim": lambda a, b: 0.0})


class TestReportOutput:
    def test_text_has_all_pair_kinds(self):
        manifest, loader = TestEvaluatePairs.build()
        report = evaluate_pairs(manifest, loader, label="toy", population="all")
        text = format_report_text(report)
        for kind in PAIR_KINDS:
            assert kind in text
        assert "Population: all" in text

    def test_csv_layout(self, tmp_path):
        manifest, loader = TestEvaluatePairs.build()
        report = evaluate_pairs(manifest, loader, label="toy")
        write_report(report, tmp_path / "r.txt", tmp_path / "r.csv")
        lines = (tmp_path / "r.csv").read_text().strip().splitlines()
        assert lines[0] == "label,population,pair_kind,metric,mean,count"
        assert len(lines) == 1 + len(PAIR_KINDS) * 2  # ssim + psnr per kind
        assert (tmp_path / "r.txt").read_text().startswith("Quality report: toy")
