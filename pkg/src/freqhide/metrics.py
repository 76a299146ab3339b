"""Image-quality metrics and the four-way pair report.

SSIM follows the canonical single-scale definition: an 11x11 Gaussian
window with sigma 1.5, K1=0.01, K2=0.03, dynamic range 1.0, local maps
averaged over valid window positions and channels. PSNR uses peak 1.0 and
returns a 100 dB sentinel for identical images.

The report compares, per dataset entry, the two processed outputs (first
pass "stego", final "refined") against both the host and the secret image.
Extra per-pair metrics (e.g. a learned perceptual distance) can be plugged
in by name; none are bundled.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, Iterable, List, Optional

import numpy as np

from .errors import ValidationError
from .spectral import validate_image

SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
SSIM_K1 = 0.01
SSIM_K2 = 0.03
PSNR_CAP_DB = 100.0

#: pair kinds reported, in fixed order: (reference, candidate)
PAIR_KINDS = (
    "host_vs_refined",
    "host_vs_stego",
    "secret_vs_refined",
    "secret_vs_stego",
)


def _gaussian_kernel(size: int, sigma: float) -> np.ndarray:
    half = (size - 1) / 2.0
    x = np.arange(size, dtype=np.float64) - half
    k = np.exp(-(x * x) / (2.0 * sigma * sigma))
    return k / k.sum()


_SSIM_KERNEL = _gaussian_kernel(SSIM_WINDOW, SSIM_SIGMA)


def _filter_valid(plane: np.ndarray, kernel: np.ndarray) -> np.ndarray:
    """Separable 'valid' correlation of a 2D plane with a 1D kernel."""
    win = kernel.size
    rows = np.lib.stride_tricks.sliding_window_view(plane, win, axis=0)
    plane = rows @ kernel
    cols = np.lib.stride_tricks.sliding_window_view(plane, win, axis=1)
    return cols @ kernel


def _check_pair(a: np.ndarray, b: np.ndarray):
    a = validate_image(a, "a")
    b = validate_image(b, "b")
    if a.shape != b.shape:
        raise ValidationError(f"image shapes differ: {a.shape} vs {b.shape}")
    return a, b


def ssim(a: np.ndarray, b: np.ndarray) -> float:
    """Mean structural similarity between two (C, H, W) images in [0, 1]."""
    a, b = _check_pair(a, b)
    _, height, width = a.shape
    if height < SSIM_WINDOW or width < SSIM_WINDOW:
        raise ValidationError(
            f"images must be at least {SSIM_WINDOW}x{SSIM_WINDOW} for SSIM, "
            f"got {height}x{width}"
        )
    c1 = SSIM_K1 * SSIM_K1
    c2 = SSIM_K2 * SSIM_K2

    total = 0.0
    for c in range(a.shape[0]):
        pa, pb = a[c], b[c]
        mu_a = _filter_valid(pa, _SSIM_KERNEL)
        mu_b = _filter_valid(pb, _SSIM_KERNEL)
        # weighted second moments; population form (no sample correction)
        var_a = _filter_valid(pa * pa, _SSIM_KERNEL) - mu_a * mu_a
        var_b = _filter_valid(pb * pb, _SSIM_KERNEL) - mu_b * mu_b
        cov = _filter_valid(pa * pb, _SSIM_KERNEL) - mu_a * mu_b
        num = (2.0 * mu_a * mu_b + c1) * (2.0 * cov + c2)
        den = (mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2)
        total += float(np.mean(num / den))
    return total / a.shape[0]


def psnr(a: np.ndarray, b: np.ndarray) -> float:
    """Peak signal-to-noise ratio in dB (peak 1.0), capped at 100 dB.

    Identical images return the 100 dB sentinel rather than infinity.
    """
    a, b = _check_pair(a, b)
    mse = float(np.mean((a - b) ** 2))
    if mse == 0.0:
        return PSNR_CAP_DB
    return min(10.0 * math.log10(1.0 / mse), PSNR_CAP_DB)


#: roles an image loader must resolve for each manifest entry
PAIR_ROLES = {
    "host_vs_refined": ("host", "refined"),
    "host_vs_stego": ("host", "stego"),
    "secret_vs_refined": ("secret", "refined"),
    "secret_vs_stego": ("secret", "stego"),
}

ImageLoader = Callable[[object, str], np.ndarray]
MetricFn = Callable[[np.ndarray, np.ndarray], float]


@dataclass
class QualityReport:
    """Per-pair-kind metric means over a manifest.

    ``pairs[kind][metric]`` holds the arithmetic mean over successfully
    evaluated entries, ``counts[kind]`` how many entries contributed.
    ``population`` states explicitly which entries were measured (the split
    name or "all"). ``directions`` annotates the orderings the pipeline is
    designed to produce: the refined output should sit closer to the host
    than the first-pass stego does, and closer to the host than to the
    secret (the privacy proxy).
    """

    label: str
    population: str
    pairs: Dict[str, Dict[str, float]]
    counts: Dict[str, int]
    errors: List[str] = field(default_factory=list)
    directions: Dict[str, bool] = field(default_factory=dict)

    def mean(self, pair_kind: str, metric: str) -> float:
        return self.pairs[pair_kind][metric]


def evaluate_pairs(
    manifest,
    loader: ImageLoader,
    extra_metrics: Optional[Dict[str, MetricFn]] = None,
    label: str = "",
    population: str = "all",
) -> QualityReport:
    """Compute SSIM/PSNR means for all four pair kinds across a manifest.

    ``loader(entry, role)`` must return the (C, H, W) image for roles
    "host", "secret", "stego" and "refined". Entries whose images cannot be
    loaded are recorded in ``errors`` and skipped; the aggregate continues.
    """
    entries = list(manifest.entries)
    if not entries:
        raise ValidationError("manifest has no entries to evaluate")

    metrics: Dict[str, MetricFn] = {"ssim": ssim, "psnr": psnr}
    if extra_metrics:
        for name in extra_metrics:
            if name in metrics:
                raise ValidationError(f"extra metric name collides: {name!r}")
        metrics.update(extra_metrics)

    sums = {kind: {m: 0.0 for m in metrics} for kind in PAIR_KINDS}
    counts = {kind: 0 for kind in PAIR_KINDS}
    errors: List[str] = []

    for entry in entries:
        try:
            images = {
                role: loader(entry, role)
                for role in ("host", "secret", "stego", "refined")
            }
            per_kind = {}
            for kind in PAIR_KINDS:
                ref_role, cand_role = PAIR_ROLES[kind]
                ref, cand = images[ref_role], images[cand_role]
                per_kind[kind] = {name: fn(ref, cand) for name, fn in metrics.items()}
        except Exception as exc:  # per-entry failure must not kill the run
            ident = getattr(entry, "secret_id", repr(entry))
            errors.append(f"{ident}: {exc}")
            continue
        for kind, values in per_kind.items():
            counts[kind] += 1
            for name, value in values.items():
                sums[kind][name] += value

    pairs = {
        kind: {
            name: (sums[kind][name] / counts[kind]) if counts[kind] else float("nan")
            for name in metrics
        }
        for kind in PAIR_KINDS
    }
    report = QualityReport(
        label=label, population=population, pairs=pairs, counts=counts, errors=errors
    )
    if counts["host_vs_refined"]:
        report.directions = {
            "refined_closer_to_host_than_stego": (
                pairs["host_vs_refined"]["ssim"] > pairs["host_vs_stego"]["ssim"]
            ),
            "refined_closer_to_host_than_to_secret": (
                pairs["host_vs_refined"]["ssim"] > pairs["secret_vs_refined"]["ssim"]
            ),
        }
    return report


def format_report_text(report: QualityReport) -> str:
    """Human-readable table, one row per pair kind."""
    metric_names = sorted(next(iter(report.pairs.values())).keys())
    lines = []
    lines.append(f"Quality report: {report.label or '(unlabeled)'}")
    lines.append(f"Population: {report.population}")
    header = f"{'pair kind':<24}" + "".join(f"{m:>12}" for m in metric_names)
    header += f"{'count':>8}"
    lines.append(header)
    lines.append("-" * len(header))
    for kind in PAIR_KINDS:
        row = f"{kind:<24}"
        for m in metric_names:
            row += f"{report.pairs[kind][m]:>12.4f}"
        row += f"{report.counts[kind]:>8d}"
        lines.append(row)
    if report.directions:
        lines.append("")
        for name, ok in sorted(report.directions.items()):
            lines.append(f"direction {name}: {ok}")
    if report.errors:
        lines.append("")
        lines.append(f"errors ({len(report.errors)}):")
        for err in report.errors:
            lines.append(f"  {err}")
    return "\n".join(lines) + "\n"


def write_report(report: QualityReport, text_path, csv_path) -> None:
    """Write the text table and the machine-readable CSV record."""
    with open(text_path, "w", encoding="utf-8") as fh:
        fh.write(format_report_text(report))
    metric_names = sorted(next(iter(report.pairs.values())).keys())
    with open(csv_path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["label", "population", "pair_kind", "metric", "mean", "count"])
        for kind in PAIR_KINDS:
            for m in metric_names:
                writer.writerow(
                    [
                        report.label,
                        report.population,
                        kind,
                        m,
                        f"{report.pairs[kind][m]:.6f}",
                        report.counts[kind],
                    ]
                )


def report_rows(report: QualityReport) -> Iterable[tuple]:
    """(label, pair_kind, metric, mean, count) tuples, in report order."""
    metric_names = sorted(next(iter(report.pairs.values())).keys())
    for kind in PAIR_KINDS:
        for m in metric_names:
            yield (report.label, kind, m, report.pairs[kind][m], report.counts[kind])
