"""freqhide: conceal images in a host's frequency spectrum.

The pipeline hides a secret image by swapping the low-frequency part of the
host's amplitude spectrum for a blend with the secret's, keeps the host's
phase, enhances the result with an adversarially trained mapper, and
re-embeds the secret at low intensity. Quality is measured with SSIM/PSNR
and a small linear probe checks how much label signal survives.
"""

from ._version import __version__
from .classifier import (SplitMetrics, UtilityResult, downsample_features,
                         run_utility, score_predictions, train_probe)
from .config import RunConfig, load_config
from .dataset import (Dataset, DatasetItem, DatasetSpec, assign_splits, ingest,
                      load_image, resize_image, save_image)
from .enhancer import (EnhancerModel, TrainConfig, enhance, gan_losses,
                       identity_model, load_model, save_model, train_enhancer)
from .errors import TrainingDivergedError, ValidationError
from .hiding import (HidingParams, blend_amplitude, build_mask, centered_coords,
                     hide, refine)
from .manifest import Manifest, ManifestEntry, read_manifest, write_manifest
from .metrics import (PAIR_KINDS, QualityReport, evaluate_pairs,
                      format_report_text, psnr, ssim, write_report)
from .pipeline import (demo_run, evaluate_manifest, generate, manifest_loader,
                       train_enhancer_for_dataset, utility_check)
from .spectral import AmplitudePhase, decompose, fft2, ifft2, recompose

__all__ = [
    "__version__",
    "AmplitudePhase", "fft2", "ifft2", "decompose", "recompose",
    "HidingParams", "build_mask", "blend_amplitude", "centered_coords",
    "hide", "refine",
    "ssim", "psnr", "PAIR_KINDS", "QualityReport", "evaluate_pairs",
    "format_report_text", "write_report",
    "TrainConfig", "EnhancerModel", "gan_losses", "train_enhancer", "enhance",
    "identity_model", "save_model", "load_model",
    "DatasetSpec", "DatasetItem", "Dataset", "ingest", "assign_splits",
    "load_image", "save_image", "resize_image",
    "Manifest", "ManifestEntry", "read_manifest", "write_manifest",
    "SplitMetrics", "UtilityResult", "downsample_features", "train_probe",
    "score_predictions", "run_utility",
    "RunConfig", "load_config",
    "generate", "evaluate_manifest", "utility_check", "manifest_loader",
    "train_enhancer_for_dataset", "demo_run",
    "ValidationError", "TrainingDivergedError",
]
