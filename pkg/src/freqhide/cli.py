"""Command-line interface.

Every subcommand takes an optional ``--config`` JSON file; explicit flags
override config values. Exit codes: 0 success, 2 usage error (bad flags),
3 validation error (bad values or config), 4 missing file, 5 training
diverged, 1 unexpected internal error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from ._version import __version__
from .config import load_config
from .dataset import ingest, load_image, resize_image, save_image
from .enhancer import enhance, load_model, save_model
from .errors import TrainingDivergedError, ValidationError
from .hiding import hide, refine
from .manifest import read_manifest
from .metrics import format_report_text
from .pipeline import (demo_run, evaluate_manifest, generate, load_host,
                       manifest_loader, train_enhancer_for_dataset,
                       utility_check, utility_result_record)


def _add_config_flag(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", metavar="JSON", default=None,
                        help="config file; flags override its values")


def _load_pair_images(image_path, other_path, channels: int):
    """Load two images, resizing the second to the first one's shape."""
    first = load_image(image_path, channels)
    second = resize_image(load_image(other_path, channels), first.shape[1:])
    return first, second


def cmd_hide(args) -> int:
    cfg = load_config(args.config, {
        "hide.alpha": args.alpha, "hide.beta": args.beta,
    })
    secret, host = _load_pair_images(args.secret, args.host, args.channels)
    save_image(hide(secret, host, cfg.hide_params), args.out)
    print(f"wrote {args.out} (alpha={cfg.hide_params.alpha}, beta={cfg.hide_params.beta})")
    return 0


def cmd_generate(args) -> int:
    cfg = load_config(args.config, {
        "out": args.out, "seed": args.seed,
        "dataset.root": args.dataset_root, "host": args.host,
        "hide.alpha": args.alpha, "hide.beta": args.beta,
        "refine.alpha": args.refine_alpha, "refine.beta": args.refine_beta,
    })
    if cfg.dataset is None:
        raise ValidationError("generate needs a dataset (config 'dataset' or --dataset-root)")
    if cfg.host is None:
        raise ValidationError("generate needs a host image (config 'host' or --host)")
    if cfg.out is None:
        raise ValidationError("generate needs an output directory (config 'out' or --out)")
    dataset = ingest(cfg.dataset)
    for warning in dataset.skipped:
        print(f"warning: skipped {warning}", file=sys.stderr)
    host = load_host(cfg.host, cfg.dataset)
    model = load_model(args.model) if args.model else None
    manifest = generate(dataset, host, cfg.hide_params, cfg.refine_params,
                        cfg.out, model=model, seed=cfg.seed)
    print(f"wrote {cfg.out}/manifest.jsonl with {len(manifest.entries)} entries"
          f" ({len(manifest.failures)} failures)")
    return 0


def cmd_train_enhancer(args) -> int:
    cfg = load_config(args.config, {
        "seed": args.seed,
        "dataset.root": args.dataset_root, "host": args.host,
        "hide.alpha": args.alpha, "hide.beta": args.beta,
        "enhancer.epochs": args.epochs,
        "enhancer.batch_size": args.batch_size,
        "enhancer.learning_rate": args.learning_rate,
        "enhancer.content_weight": args.content_weight,
        "enhancer.patch_size": args.patch_size,
        "enhancer.features": args.features,
        "enhancer.seed": args.enhancer_seed,
    })
    if cfg.dataset is None or cfg.host is None:
        raise ValidationError("train-enhancer needs a dataset and a host image")
    dataset = ingest(cfg.dataset)
    host = load_host(cfg.host, cfg.dataset)
    model = train_enhancer_for_dataset(dataset, host, cfg.hide_params, cfg.enhancer)
    out = Path(args.out) if args.out else (cfg.out or Path(".")) / "enhancer.bin"
    save_model(model, out)
    print(f"wrote {out} (final losses: generator {model.meta['final_generator_loss']:.4f},"
          f" discriminator {model.meta['final_discriminator_loss']:.4f})")
    return 0


def cmd_enhance(args) -> int:
    model = load_model(args.model)
    image = load_image(args.input, model.arch.channels)
    save_image(enhance(model, image), args.out)
    print(f"wrote {args.out}")
    return 0


def cmd_refine(args) -> int:
    cfg = load_config(args.config, {
        "refine.alpha": args.alpha, "refine.beta": args.beta,
    })
    carrier, secret = _load_pair_images(args.input, args.secret, args.channels)
    save_image(refine(carrier, secret, cfg.refine_params), args.out)
    print(f"wrote {args.out} (alpha={cfg.refine_params.alpha},"
          f" beta={cfg.refine_params.beta})")
    return 0


def cmd_evaluate(args) -> int:
    cfg = load_config(args.config, {"label": args.label})
    report = evaluate_manifest(args.manifest, label=cfg.label,
                               population=args.population,
                               write_files=not args.no_write)
    print(format_report_text(report))
    if report.errors:
        print(f"entries with errors: {len(report.errors)}", file=sys.stderr)
    return 0


def cmd_utility(args) -> int:
    manifest = read_manifest(args.manifest)
    base = Path(args.manifest).parent
    result = utility_check(manifest, base, trained_on=args.trained_on,
                           shuffle_labels_seed=args.shuffle_labels)
    record = utility_result_record(result)
    if args.shuffle_labels is not None:
        record["shuffle_labels_seed"] = args.shuffle_labels
    suffix = "_shuffled" if args.shuffle_labels is not None else ""
    out = Path(args.out) if args.out else base / f"utility_{args.trained_on}{suffix}.json"
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(json.dumps(record, sort_keys=True, indent=2) + "\n", encoding="utf-8")
    print(f"utility probe trained on: {result.trained_on}")
    for split in ("train", "test"):
        m = result.splits[split]
        print(f"  {split:<5} acc={m.accuracy:.4f} precision={m.precision:.4f}"
              f" recall={m.recall:.4f} f1={m.f1:.4f} (n={m.count})")
    print(f"wrote {out}")
    return 0


def cmd_demo(args) -> int:
    cfg = load_config(args.config, {"out": args.out, "seed": args.seed})
    out = cfg.out or Path("demo_out")
    size = (args.size, args.size)
    paths = demo_run(out, seed=cfg.seed, size=size, n_per_class=args.per_class,
                     epochs=args.epochs, hide_params=cfg.hide_params,
                     refine_params=cfg.refine_params,
                     train_model=not args.no_enhancer)
    for key in ("manifest", "report_text", "report_csv", "model"):
        if key in paths:
            print(f"wrote {paths[key]}")
    print(f"mean SSIM host vs refined:   {paths['mean_ssim_host_vs_refined']}")
    print(f"mean SSIM secret vs refined: {paths['mean_ssim_secret_vs_refined']}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="freqhide",
        description="Conceal images in a host's frequency spectrum, enhance the "
                    "result adversarially and evaluate quality/utility.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("hide", help="conceal one secret image inside a host image")
    _add_config_flag(p)
    p.add_argument("--secret", required=True, help="image to conceal")
    p.add_argument("--host", required=True, help="carrier image (resized to the secret)")
    p.add_argument("--out", required=True, help="output PNG path")
    p.add_argument("--alpha", type=float, default=None, help="low-frequency band half-width fraction, in [0, 0.5]")
    p.add_argument("--beta", type=float, default=None, help="secret amplitude share, in [0, 1]")
    p.add_argument("--channels", type=int, choices=(1, 3), default=3)
    p.set_defaults(func=cmd_hide)

    p = sub.add_parser("generate", help="run hide/enhance/refine over a dataset")
    _add_config_flag(p)
    p.add_argument("--dataset-root", default=None)
    p.add_argument("--host", default=None)
    p.add_argument("--out", default=None)
    p.add_argument("--model", default=None, help="trained enhancer file; omit to skip enhancement")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--beta", type=float, default=None)
    p.add_argument("--refine-alpha", type=float, default=None)
    p.add_argument("--refine-beta", type=float, default=None)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("train-enhancer", help="fit the adversarial enhancer on stego images")
    _add_config_flag(p)
    p.add_argument("--dataset-root", default=None)
    p.add_argument("--host", default=None)
    p.add_argument("--out", default=None, help="model file to write (default: <out>/enhancer.bin)")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--beta", type=float, default=None)
    p.add_argument("--epochs", type=int, default=None)
    p.add_argument("--batch-size", type=int, default=None)
    p.add_argument("--learning-rate", type=float, default=None)
    p.add_argument("--content-weight", type=float, default=None)
    p.add_argument("--patch-size", type=int, default=None)
    p.add_argument("--features", type=int, default=None)
    p.add_argument("--enhancer-seed", type=int, default=None)
    p.set_defaults(func=cmd_train_enhancer)

    p = sub.add_parser("enhance", help="apply a trained enhancer to one image")
    _add_config_flag(p)
    p.add_argument("--model", required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_enhance)

    p = sub.add_parser("refine", help="re-embed a secret's amplitude into a carrier at low intensity")
    _add_config_flag(p)
    p.add_argument("--input", required=True, help="carrier image")
    p.add_argument("--secret", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--beta", type=float, default=None)
    p.add_argument("--channels", type=int, choices=(1, 3), default=3)
    p.set_defaults(func=cmd_refine)

    p = sub.add_parser("evaluate", help="SSIM/PSNR report over a manifest")
    _add_config_flag(p)
    p.add_argument("--manifest", required=True)
    p.add_argument("--label", default=None)
    p.add_argument("--population", choices=("all", "train", "test"), default="all")
    p.add_argument("--no-write", action="store_true", help="print only, skip report files")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("utility", help="linear-probe classification check over a manifest")
    _add_config_flag(p)
    p.add_argument("--manifest", required=True)
    p.add_argument("--trained-on", choices=("secret", "stego", "enhanced", "refined"),
                   default="enhanced")
    p.add_argument("--shuffle-labels", type=int, default=None, metavar="SEED",
                   help="permute labels first (chance-level control)")
    p.add_argument("--out", default=None, help="JSON report path")
    p.set_defaults(func=cmd_utility)

    p = sub.add_parser("demo", help="end-to-end run on bundled procedural toy data")
    _add_config_flag(p)
    p.add_argument("--out", default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--size", type=int, default=64, help="square image side for the toy set")
    p.add_argument("--per-class", type=int, default=5)
    p.add_argument("--epochs", type=int, default=30)
    p.add_argument("--no-enhancer", action="store_true")
    p.set_defaults(func=cmd_demo)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return 3
    except FileNotFoundError as exc:
        print(f"missing file: {exc}", file=sys.stderr)
        return 4
    except TrainingDivergedError as exc:
        print(f"training diverged: {exc}", file=sys.stderr)
        return 5
    except Exception as exc:  # argparse SystemExit passes through untouched
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
