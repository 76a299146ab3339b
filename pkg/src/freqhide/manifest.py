"""Provenance manifest: one JSONL file describing a generation run.

First line is a header record (schema version, pipeline version, seed,
dataset pointer, blend parameters, enhancer metadata), followed by one
record per secret image sorted by id. All paths are stored POSIX-relative
to the manifest's directory so a run directory can be moved or compared
byte-for-byte. Records carry no timestamps; identical runs serialize to
identical bytes.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Tuple

from .errors import ValidationError

MANIFEST_SCHEMA_VERSION = 1


@dataclass(frozen=True)
class ManifestEntry:
    secret_id: str
    host_id: str
    label: str
    split: str
    stego_path: str
    enhanced_path: str
    refined_path: str
    alpha: float
    beta: float
    refine_alpha: float
    refine_beta: float


@dataclass
class Manifest:
    pipeline_version: str
    seed: int
    dataset_root: str
    resize: Tuple[int, int]
    channels: int
    host_path: str
    enhancer: Optional[Dict] = None  # training metadata, or None when disabled
    entries: List[ManifestEntry] = field(default_factory=list)
    failures: List[str] = field(default_factory=list)
    schema_version: int = MANIFEST_SCHEMA_VERSION

    def entry_by_id(self, secret_id: str) -> ManifestEntry:
        for entry in self.entries:
            if entry.secret_id == secret_id:
                return entry
        raise KeyError(secret_id)


def _dump(record: Dict) -> str:
    return json.dumps(record, sort_keys=True, separators=(",", ":"))


def write_manifest(manifest: Manifest, path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    header = {
        "kind": "header",
        "schema_version": manifest.schema_version,
        "pipeline_version": manifest.pipeline_version,
        "seed": manifest.seed,
        "dataset_root": manifest.dataset_root,
        "resize": list(manifest.resize),
        "channels": manifest.channels,
        "host_path": manifest.host_path,
        "enhancer": manifest.enhancer,
        "failures": list(manifest.failures),
    }
    lines = [_dump(header)]
    for entry in sorted(manifest.entries, key=lambda e: e.secret_id):
        record = {"kind": "entry"}
        record.update(asdict(entry))
        lines.append(_dump(record))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_manifest(path) -> Manifest:
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"manifest does not exist: {path}")
    lines = [line for line in path.read_text(encoding="utf-8").splitlines() if line.strip()]
    if not lines:
        raise ValidationError(f"manifest is empty: {path}")
    try:
        header = json.loads(lines[0])
    except json.JSONDecodeError as exc:
        raise ValidationError(f"manifest header is not valid JSON: {exc}") from exc
    if header.get("kind") != "header":
        raise ValidationError("manifest must start with a header record")
    version = header.get("schema_version")
    if version != MANIFEST_SCHEMA_VERSION:
        raise ValidationError(
            f"unsupported manifest schema version {version!r}"
            f" (supported: {MANIFEST_SCHEMA_VERSION})"
        )
    manifest = Manifest(
        pipeline_version=header["pipeline_version"],
        seed=header["seed"],
        dataset_root=header["dataset_root"],
        resize=tuple(header["resize"]),
        channels=header["channels"],
        host_path=header["host_path"],
        enhancer=header.get("enhancer"),
        failures=list(header.get("failures", [])),
    )
    for line in lines[1:]:
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"manifest entry is not valid JSON: {exc}") from exc
        if record.get("kind") != "entry":
            raise ValidationError(f"unexpected manifest record kind {record.get('kind')!r}")
        record.pop("kind")
        try:
            manifest.entries.append(ManifestEntry(**record))
        except TypeError as exc:
            raise ValidationError(f"malformed manifest entry: {exc}") from exc
    return manifest


def check_artifacts(manifest: Manifest, base_dir) -> None:
    """Verify every referenced artifact exists under the manifest directory."""
    base = Path(base_dir)
    missing = []
    for entry in manifest.entries:
        for rel in (entry.stego_path, entry.enhanced_path, entry.refined_path):
            if not (base / rel).is_file():
                missing.append(rel)
    if not (base / manifest.host_path).is_file():
        missing.append(manifest.host_path)
    if missing:
        raise ValidationError(f"manifest references missing files: {missing[:5]}"
                              + ("..." if len(missing) > 5 else ""))
