"""Run configuration: a JSON file plus overrides.

Schema (all sections optional unless a command needs them):

    {
      "out": "runs/demo",
      "seed": 0,
      "label": "toy",
      "dataset": {"root": "data", "label_table": null, "resize": [64, 64],
                  "split": [6, 4], "split_seed": 0, "channels": 3},
      "host": "host.png",
      "hide": {"alpha": 0.5, "beta": 0.5},
      "refine": {"alpha": 0.5, "beta": 0.1},
      "enhancer": {"enabled": true, "epochs": 200, "batch_size": 4,
                   "learning_rate": 0.02, "content_weight": 0.5,
                   "seed": 0, "patch_size": 32, "features": 8,
                   "clip_norm": 5.0}
    }

Relative paths are resolved against the config file's directory. The
FREQHIDE_OUT environment variable, when set, overrides "out".
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Dict, Optional, Tuple

from .dataset import DatasetSpec
from .enhancer import TrainConfig
from .errors import ValidationError
from .hiding import HidingParams

OUTPUT_ROOT_ENV = "FREQHIDE_OUT"

DEFAULT_HIDE = {"alpha": 0.5, "beta": 0.5}
DEFAULT_REFINE = {"alpha": 0.5, "beta": 0.1}


@dataclass
class RunConfig:
    out: Optional[Path] = None
    seed: int = 0
    label: str = "run"
    dataset: Optional[DatasetSpec] = None
    host: Optional[Path] = None
    hide_params: HidingParams = field(
        default_factory=lambda: HidingParams(**DEFAULT_HIDE))
    refine_params: HidingParams = field(
        default_factory=lambda: HidingParams(**DEFAULT_REFINE))
    enhancer_enabled: bool = True
    enhancer: TrainConfig = field(default_factory=TrainConfig)


def _expect_mapping(value: Any, name: str) -> Dict:
    if not isinstance(value, dict):
        raise ValidationError(f"config section {name!r} must be an object")
    return value


def _pair(value: Any, name: str) -> Tuple[float, float]:
    if (not isinstance(value, (list, tuple)) or len(value) != 2
            or not all(isinstance(v, (int, float)) for v in value)):
        raise ValidationError(f"config field {name!r} must be a pair of numbers")
    return (value[0], value[1])


def load_config(path=None, overrides: Optional[Dict[str, Any]] = None) -> RunConfig:
    """Build a RunConfig from an optional JSON file plus override values.

    ``overrides`` uses dotted keys matching the schema ("hide.alpha",
    "out", "dataset.root", "enhancer.epochs", ...); None values are ignored.
    """
    raw: Dict[str, Any] = {}
    base = Path(".")
    if path is not None:
        path = Path(path)
        if not path.is_file():
            raise FileNotFoundError(f"config file does not exist: {path}")
        try:
            raw = json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ValidationError(f"config is not valid JSON: {exc}") from exc
        if not isinstance(raw, dict):
            raise ValidationError("config root must be a JSON object")
        base = path.parent
    for key, value in (overrides or {}).items():
        if value is None:
            continue
        node = raw
        parts = key.split(".")
        for part in parts[:-1]:
            node = node.setdefault(part, {})
            if not isinstance(node, dict):
                raise ValidationError(f"config field {key!r} conflicts with a scalar")
        node[parts[-1]] = value

    known = {"out", "seed", "label", "dataset", "host", "hide", "refine", "enhancer"}
    unknown = sorted(set(raw) - known)
    if unknown:
        raise ValidationError(f"unknown config fields: {unknown}")

    cfg = RunConfig()
    if "seed" in raw:
        cfg.seed = int(raw["seed"])
    if "label" in raw:
        cfg.label = str(raw["label"])
    if "out" in raw and raw["out"] is not None:
        cfg.out = base / str(raw["out"])
    env_out = os.environ.get(OUTPUT_ROOT_ENV)
    if env_out:
        cfg.out = Path(env_out)
    if "host" in raw and raw["host"] is not None:
        cfg.host = base / str(raw["host"])

    if "dataset" in raw and raw["dataset"] is not None:
        section = _expect_mapping(raw["dataset"], "dataset")
        if "root" not in section:
            raise ValidationError("dataset config requires 'root'")
        table = section.get("label_table")
        resize = _pair(section.get("resize", (512, 512)), "dataset.resize")
        split = _pair(section.get("split", (6, 4)), "dataset.split")
        cfg.dataset = DatasetSpec(
            root=base / str(section["root"]),
            label_table=(base / str(table)) if table else None,
            resize=(int(resize[0]), int(resize[1])),
            split_ratio=(float(split[0]), float(split[1])),
            split_seed=int(section.get("split_seed", cfg.seed)),
            channels=int(section.get("channels", 3)),
        )

    for name, default in (("hide", DEFAULT_HIDE), ("refine", DEFAULT_REFINE)):
        section = dict(default)
        if name in raw and raw[name] is not None:
            section.update(_expect_mapping(raw[name], name))
        extra = sorted(set(section) - {"alpha", "beta"})
        if extra:
            raise ValidationError(f"unknown fields in config section {name!r}: {extra}")
        params = HidingParams(alpha=float(section["alpha"]), beta=float(section["beta"]))
        if name == "hide":
            cfg.hide_params = params
        else:
            cfg.refine_params = params

    if "enhancer" in raw and raw["enhancer"] is not None:
        section = dict(_expect_mapping(raw["enhancer"], "enhancer"))
        cfg.enhancer_enabled = bool(section.pop("enabled", True))
        fields = {f for f in TrainConfig.__dataclass_fields__}
        extra = sorted(set(section) - fields)
        if extra:
            raise ValidationError(f"unknown fields in config section 'enhancer': {extra}")
        defaults = TrainConfig()
        cfg.enhancer = replace(defaults, **{
            key: type(getattr(defaults, key))(value) for key, value in section.items()})
        if "seed" not in section:
            cfg.enhancer = replace(cfg.enhancer, seed=cfg.seed)

    return cfg
