"""Dataset ingestion: decoding, resizing, labeling and deterministic splits.

Labels come either from one subdirectory per class under the dataset root or
from a CSV label table (``filename,label``). Every image is decoded to a
float64 ``(C, H, W)`` array in [0, 1] and resized to the configured target.

Split assignment depends only on the image ids, the seed and the ratio:
ids are ranked by a seed-keyed hash and the top share of the ranking goes
to training. Sizes therefore match the ratio exactly for every seed, and
reruns over the same ids always reproduce the same membership.
"""

from __future__ import annotations

import csv
import hashlib
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from PIL import Image

from .errors import ValidationError

IMAGE_EXTENSIONS = {".png", ".jpg", ".jpeg", ".bmp"}


@dataclass(frozen=True)
class DatasetSpec:
    root: Path
    label_table: Optional[Path] = None  # None: one directory per class
    resize: Tuple[int, int] = (512, 512)  # (height, width)
    split_ratio: Tuple[float, float] = (6.0, 4.0)  # train : test
    split_seed: int = 0
    channels: int = 3  # 3 = RGB, 1 = grayscale

    def __post_init__(self):
        r0, r1 = self.split_ratio
        if r0 <= 0 or r1 <= 0:
            raise ValidationError(f"split ratio parts must be positive: {self.split_ratio}")
        if self.channels not in (1, 3):
            raise ValidationError("channels must be 1 or 3")
        if self.resize[0] < 1 or self.resize[1] < 1:
            raise ValidationError(f"bad resize target {self.resize}")

    @property
    def train_fraction(self) -> float:
        r0, r1 = self.split_ratio
        return r0 / (r0 + r1)


def split_rank_key(image_id: str, seed: int) -> str:
    """Seed-keyed ranking key; reshuffles with the seed, stable across runs."""
    return hashlib.sha256(f"{seed}:{image_id}".encode("utf-8")).hexdigest()


def assign_splits(image_ids: Sequence[str], seed: int, train_fraction: float) -> Dict[str, str]:
    """Partition ids into train/test at exactly the requested fraction.

    The train size is the rounded share of the id count, so a 10-image set
    at 6:4 always lands 6/4 regardless of seed.
    """
    ids = list(image_ids)
    if len(set(ids)) != len(ids):
        raise ValidationError("image ids must be unique")
    n_train = int(np.floor(len(ids) * train_fraction + 0.5))
    ranked = sorted(ids, key=lambda i: (split_rank_key(i, seed), i))
    return {image_id: ("train" if rank < n_train else "test")
            for rank, image_id in enumerate(ranked)}


def load_image(path, channels: int = 3) -> np.ndarray:
    """Decode an image file to float64 (C, H, W) in [0, 1]."""
    with Image.open(path) as img:
        img = img.convert("RGB" if channels == 3 else "L")
        arr = np.asarray(img, dtype=np.float64) / 255.0
    if channels == 1:
        return arr[None, :, :]
    return np.ascontiguousarray(arr.transpose(2, 0, 1))


def save_image(array: np.ndarray, path) -> None:
    """Write a (C, H, W) float array in [0, 1] as 8-bit PNG."""
    arr = np.clip(np.asarray(array, dtype=np.float64), 0.0, 1.0)
    data = np.round(arr * 255.0).astype(np.uint8)
    if data.shape[0] == 1:
        img = Image.fromarray(data[0], mode="L")
    elif data.shape[0] == 3:
        img = Image.fromarray(data.transpose(1, 2, 0), mode="RGB")
    else:
        raise ValidationError(f"cannot encode {data.shape[0]}-channel image")
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    img.save(path, format="PNG")


def resize_image(array: np.ndarray, size: Tuple[int, int]) -> np.ndarray:
    """Bilinear resize of a (C, H, W) float array to (height, width)."""
    height, width = size
    if array.shape[1:] == (height, width):
        return np.asarray(array, dtype=np.float64)
    out = np.empty((array.shape[0], height, width))
    for c in range(array.shape[0]):
        plane = Image.fromarray(array[c].astype(np.float32), mode="F")
        out[c] = np.asarray(plane.resize((width, height), Image.BILINEAR), dtype=np.float64)
    return out


@dataclass(frozen=True)
class DatasetItem:
    id: str  # posix path relative to the dataset root; doubles as the key
    path: Path
    label: str
    split: str


@dataclass
class Dataset:
    spec: DatasetSpec
    items: List[DatasetItem]
    skipped: List[str] = field(default_factory=list)

    def load(self, item: DatasetItem) -> np.ndarray:
        return resize_image(load_image(item.path, self.spec.channels), self.spec.resize)

    def load_by_id(self, image_id: str) -> np.ndarray:
        return self.load(self._by_id[image_id])

    @property
    def _by_id(self) -> Dict[str, DatasetItem]:
        return {item.id: item for item in self.items}

    @property
    def classes(self) -> List[str]:
        return sorted({item.label for item in self.items})

    def split_items(self, split: str) -> List[DatasetItem]:
        return [item for item in self.items if item.split == split]


def _discover_labeled_files(spec: DatasetSpec) -> List[Tuple[Path, str, str]]:
    """(path, id, label) triples, sorted by id."""
    root = Path(spec.root)
    if not root.is_dir():
        raise FileNotFoundError(f"dataset root does not exist: {root}")
    found: List[Tuple[Path, str, str]] = []
    if spec.label_table is not None:
        table = Path(spec.label_table)
        if not table.is_file():
            raise FileNotFoundError(f"label table does not exist: {table}")
        seen: Dict[str, str] = {}
        with open(table, newline="", encoding="utf-8") as fh:
            for row in csv.reader(fh):
                if not row or row[0].startswith("#"):
                    continue
                if len(row) != 2:
                    raise ValidationError(f"label table row must be filename,label: {row}")
                name, label = row[0].strip(), row[1].strip()
                if name in seen:
                    raise ValidationError(f"duplicate label table entry: {name}")
                seen[name] = label
                found.append((root / name, name, label))
    else:
        for class_dir in sorted(p for p in root.iterdir() if p.is_dir()):
            label = class_dir.name
            for path in sorted(class_dir.rglob("*")):
                if path.is_file() and path.suffix.lower() in IMAGE_EXTENSIONS:
                    found.append((path, path.relative_to(root).as_posix(), label))
        if not found:
            raise ValidationError(f"no class directories with images under {root}")
    return sorted(found, key=lambda t: t[1])


def ingest(spec: DatasetSpec) -> Dataset:
    """Discover, verify and split a dataset.

    Unreadable or corrupt files are skipped and listed in ``Dataset.skipped``;
    a class that ends up with no usable images is a hard error.
    """
    discovered = _discover_labeled_files(spec)
    labels_seen = {label for _, _, label in discovered}
    usable: List[Tuple[Path, str, str]] = []
    skipped: List[str] = []
    for path, image_id, label in discovered:
        try:
            load_image(path, spec.channels)  # decode check only; loads stay lazy
        except Exception as exc:
            skipped.append(f"{image_id}: {exc}")
            continue
        usable.append((path, image_id, label))
    splits = assign_splits([image_id for _, image_id, _ in usable],
                           spec.split_seed, spec.train_fraction)
    items = [
        DatasetItem(id=image_id, path=path, label=label, split=splits[image_id])
        for path, image_id, label in usable
    ]
    usable_labels = {item.label for item in items}
    empty = sorted(labels_seen - usable_labels)
    if empty:
        raise ValidationError(f"classes with no usable images: {empty}")
    if not items:
        raise ValidationError("dataset has no usable images")
    return Dataset(spec=spec, items=items, skipped=skipped)
