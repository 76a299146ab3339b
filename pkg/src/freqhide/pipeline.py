"""End-to-end orchestration: batch generation, evaluation, utility probe, demo.

A generation run takes an ingested dataset plus a host image and, per secret
image, writes three artifacts: the stego (host phase, blended amplitude),
the enhanced version (generator applied, when a model is present) and the
refined version (secret amplitude re-embedded into the enhanced carrier at
low intensity). A JSONL manifest ties them together; evaluation and the
utility probe work from that manifest alone.
"""

from __future__ import annotations

from dataclasses import asdict
from pathlib import Path
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

from ._version import __version__
from .classifier import UtilityResult, run_utility
from .dataset import Dataset, DatasetSpec, ingest, load_image, resize_image, save_image
from .enhancer import EnhancerModel, TrainConfig, enhance, save_model, train_enhancer
from .errors import ValidationError
from .hiding import HidingParams, hide, refine
from .manifest import (Manifest, ManifestEntry, check_artifacts, read_manifest,
                       write_manifest)
from .metrics import QualityReport, evaluate_pairs, write_report
from .toydata import make_host_image, write_demo_dataset

ARTIFACT_DIRS = {"stego": "stego", "enhanced": "enhanced", "refined": "refined"}

# manifest roles a utility probe can train on; "enhanced" is the pipeline's
# main output, "secret" the non-private baseline
UTILITY_SOURCES = ("secret", "stego", "enhanced", "refined")


def _portable_path(path, base) -> str:
    """POSIX path relative to base when possible, else absolute."""
    path = Path(path).resolve()
    base = Path(base).resolve()
    try:
        return path.relative_to(base).as_posix()
    except ValueError:
        return path.as_posix()


def load_host(path, dataset_spec: DatasetSpec) -> np.ndarray:
    """Load and resize a host image to the dataset's target shape."""
    if not Path(path).is_file():
        raise FileNotFoundError(f"host image does not exist: {path}")
    return resize_image(load_image(path, dataset_spec.channels), dataset_spec.resize)


def generate(dataset: Dataset, host: np.ndarray, params: HidingParams,
             params_prime: HidingParams, out_dir,
             model: Optional[EnhancerModel] = None, seed: int = 0,
             host_id: str = "host") -> Manifest:
    """Run the full hide/enhance/refine chain over a dataset.

    Writes all artifacts plus ``manifest.jsonl`` under ``out_dir``. A
    per-image failure is recorded in the manifest; the run raises only if
    every image fails.
    """
    host = np.asarray(host, dtype=np.float64)
    expected = (dataset.spec.channels,) + tuple(dataset.spec.resize)
    if host.shape != expected:
        raise ValidationError(
            f"host shape {host.shape} does not match dataset target {expected}")
    if model is not None and model.arch.channels != dataset.spec.channels:
        raise ValidationError("enhancer channel count does not match dataset")

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    host_rel = "host.png"
    save_image(host, out / host_rel)

    entries: List[ManifestEntry] = []
    failures: List[str] = []
    for item in sorted(dataset.items, key=lambda it: it.id):
        rel = Path(item.id).with_suffix(".png").as_posix()
        try:
            secret = dataset.load(item)
            stego = hide(secret, host, params)
            enhanced = enhance(model, stego) if model is not None else stego
            refined = refine(enhanced, secret, params_prime)
            paths = {}
            for kind, image in (("stego", stego), ("enhanced", enhanced),
                                ("refined", refined)):
                rel_path = f"{ARTIFACT_DIRS[kind]}/{rel}"
                save_image(image, out / rel_path)
                paths[kind] = rel_path
        except Exception as exc:
            failures.append(f"{item.id}: {exc}")
            continue
        entries.append(ManifestEntry(
            secret_id=item.id,
            host_id=host_id,
            label=item.label,
            split=item.split,
            stego_path=paths["stego"],
            enhanced_path=paths["enhanced"],
            refined_path=paths["refined"],
            alpha=params.alpha,
            beta=params.beta,
            refine_alpha=params_prime.alpha,
            refine_beta=params_prime.beta,
        ))
    if dataset.items and not entries:
        raise RuntimeError(f"every image failed: {failures[:3]}")

    manifest = Manifest(
        pipeline_version=__version__,
        seed=seed,
        dataset_root=_portable_path(dataset.spec.root, out),
        resize=tuple(dataset.spec.resize),
        channels=dataset.spec.channels,
        host_path=host_rel,
        enhancer=(dict(model.meta) if model is not None else None),
        entries=entries,
        failures=failures,
    )
    write_manifest(manifest, out / "manifest.jsonl")
    check_artifacts(manifest, out)
    return manifest


def manifest_loader(manifest: Manifest, base_dir) -> Callable[[ManifestEntry, str], np.ndarray]:
    """Image loader for evaluation: resolves manifest roles to arrays.

    The host is loaded once and cached; secrets are re-read from the dataset
    root and resized exactly as during generation.
    """
    base = Path(base_dir)
    channels = manifest.channels
    resize = tuple(manifest.resize)
    dataset_root = Path(manifest.dataset_root)
    if not dataset_root.is_absolute():
        dataset_root = base / dataset_root
    host = resize_image(load_image(base / manifest.host_path, channels), resize)

    def loader(entry: ManifestEntry, role: str) -> np.ndarray:
        if role == "host":
            return host
        if role == "secret":
            return resize_image(load_image(dataset_root / entry.secret_id, channels), resize)
        if role == "stego":
            return load_image(base / entry.stego_path, channels)
        if role == "enhanced":
            return load_image(base / entry.enhanced_path, channels)
        if role == "refined":
            return load_image(base / entry.refined_path, channels)
        raise ValidationError(f"unknown image role {role!r}")

    return loader


def _filter_population(manifest: Manifest, population: str) -> Manifest:
    if population == "all":
        return manifest
    if population not in ("train", "test"):
        raise ValidationError(f"population must be all/train/test, got {population!r}")
    kept = [e for e in manifest.entries if e.split == population]
    return replace_entries(manifest, kept)


def replace_entries(manifest: Manifest, entries: List[ManifestEntry]) -> Manifest:
    clone = Manifest(
        pipeline_version=manifest.pipeline_version,
        seed=manifest.seed,
        dataset_root=manifest.dataset_root,
        resize=manifest.resize,
        channels=manifest.channels,
        host_path=manifest.host_path,
        enhancer=manifest.enhancer,
        entries=entries,
        failures=list(manifest.failures),
    )
    return clone


def evaluate_manifest(manifest_path, label: str = "", population: str = "all",
                      extra_metrics=None, write_files: bool = True) -> QualityReport:
    """Evaluate a manifest and (by default) write the text/CSV reports."""
    manifest_path = Path(manifest_path)
    manifest = read_manifest(manifest_path)
    base = manifest_path.parent
    subset = _filter_population(manifest, population)
    loader = manifest_loader(manifest, base)
    report = evaluate_pairs(subset, loader, extra_metrics=extra_metrics,
                            label=label, population=population)
    if write_files:
        suffix = "" if population == "all" else f"_{population}"
        write_report(report, base / f"quality_report{suffix}.txt",
                     base / f"quality_report{suffix}.csv")
    return report


def utility_check(manifest: Manifest, base_dir, trained_on: str = "enhanced",
                  shuffle_labels_seed: Optional[int] = None) -> UtilityResult:
    """Train the linear probe on one image source and score train/test splits.

    ``shuffle_labels_seed`` permutes all labels first; a control run whose
    accuracy should sit near chance.
    """
    if trained_on not in UTILITY_SOURCES:
        raise ValidationError(
            f"trained_on must be one of {UTILITY_SOURCES}, got {trained_on!r}")
    entries = list(manifest.entries)
    if not entries:
        raise ValidationError("manifest has no entries")
    labels = [e.label for e in entries]
    if len(set(labels)) < 2:
        raise ValidationError("utility check needs at least two classes")
    if shuffle_labels_seed is not None:
        rng = np.random.default_rng(shuffle_labels_seed)
        labels = [labels[i] for i in rng.permutation(len(labels))]
    train_idx = [i for i, e in enumerate(entries) if e.split == "train"]
    test_idx = [i for i, e in enumerate(entries) if e.split == "test"]
    if not train_idx or not test_idx:
        raise ValidationError("both train and test splits must be non-empty")
    loader = manifest_loader(manifest, base_dir)
    images = [loader(e, trained_on) for e in entries]
    return run_utility(
        [images[i] for i in train_idx], [labels[i] for i in train_idx],
        [images[i] for i in test_idx], [labels[i] for i in test_idx],
        trained_on=trained_on,
    )


def utility_result_record(result: UtilityResult) -> Dict:
    """JSON-ready mapping for the utility report file."""
    return {
        "classifier": result.classifier,
        "trained_on": result.trained_on,
        "classes": list(result.classes),
        "splits": {name: asdict(metrics) for name, metrics in sorted(result.splits.items())},
    }


def train_enhancer_for_dataset(dataset: Dataset, host: np.ndarray,
                               params: HidingParams, config: TrainConfig,
                               ) -> EnhancerModel:
    """Train the enhancer on stego images built from the training split."""
    train_items = dataset.split_items("train")
    if len(train_items) < 2:
        raise ValidationError("need at least two training images to fit the enhancer")
    stegos = [hide(dataset.load(item), host, params) for item in
              sorted(train_items, key=lambda it: it.id)]
    return train_enhancer(stegos, host, config)


def demo_run(out_dir, seed: int = 0, size: Tuple[int, int] = (64, 64),
             n_per_class: int = 5, epochs: int = 30,
             hide_params: Optional[HidingParams] = None,
             refine_params: Optional[HidingParams] = None,
             train_model: bool = True) -> Dict[str, str]:
    """Self-contained end-to-end run on the bundled procedural toy data.

    Writes the dataset, host, enhancer, artifacts, manifest and quality
    reports under ``out_dir`` and returns their paths. Every byte is a
    deterministic function of the arguments.
    """
    hide_params = hide_params or HidingParams(alpha=0.5, beta=0.5)
    refine_params = refine_params or HidingParams(alpha=0.5, beta=0.1)
    out = Path(out_dir)
    data_root = out / "data"
    write_demo_dataset(data_root, n_per_class=n_per_class, size=size, seed=seed)
    spec = DatasetSpec(root=data_root, resize=size, split_ratio=(6.0, 4.0),
                       split_seed=seed, channels=3)
    dataset = ingest(spec)
    host = make_host_image(3, size, seed=seed)

    model = None
    model_path = None
    if train_model:
        config = TrainConfig(epochs=epochs, batch_size=2, patch_size=min(32, *size),
                             seed=seed)
        model = train_enhancer_for_dataset(dataset, host, hide_params, config)
        model_path = out / "enhancer.bin"
        save_model(model, model_path)

    generate(dataset, host, hide_params, refine_params, out, model=model, seed=seed)
    report = evaluate_manifest(out / "manifest.jsonl", label="demo", population="all")
    paths = {
        "out": str(out),
        "manifest": str(out / "manifest.jsonl"),
        "report_text": str(out / "quality_report.txt"),
        "report_csv": str(out / "quality_report.csv"),
        "host": str(out / "host.png"),
    }
    if model_path is not None:
        paths["model"] = str(model_path)
    paths["mean_ssim_host_vs_refined"] = f"{report.mean('host_vs_refined', 'ssim'):.6f}"
    paths["mean_ssim_secret_vs_refined"] = f"{report.mean('secret_vs_refined', 'ssim'):.6f}"
    return paths
