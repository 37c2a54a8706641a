"""Command-line interface: ``viewmix <subcommand> [options]``.

Subcommands: ingest, augment, preview, stats, bench. Every subcommand reads
the config file given by ``--config`` (the packaged default otherwise), then
applies ``--set key=value`` overrides in order, then the dedicated flags
(``--seed``, ``--threads``, ``--dataset``, ...), which win over both.

Exit status: 0 on success, 2 on usage errors (bad flags, missing seed),
1 on any runtime error. Error messages go to stderr.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from viewmix import __version__, kernels
from viewmix.bench import emit_report, run_benchmark
from viewmix.config import RunConfig, load_config, with_output_size
from viewmix.errors import ConfigError, ViewMixError
from viewmix.image import Dataset, Depth, Image, convert_depth
from viewmix.io import CIFAR_RECORD_BYTES, encode_cifar10, export_batch, load_dataset, synthetic_dataset, write_tensor
from viewmix.multiview import STRATEGIES, generate_batch, write_provenance
from viewmix.stats import collect_stats, format_stats
from viewmix.transforms import resize

__all__ = ["CliConfig", "build_parser", "main"]

SUBCOMMANDS = ("ingest", "augment", "preview", "stats", "bench")
EXIT_OK, EXIT_RUNTIME, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


@dataclass(frozen=True)
class CliConfig:
    subcommand: str
    config_path: Optional[str] = None
    seed: Optional[int] = None
    output_path: Optional[str] = None
    overrides: tuple[str, ...] = field(default_factory=tuple)


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("-c", "--config", help="YAML config file (default: packaged defaults)")
    p.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                   help="override a config key, e.g. multiview.strategy=cutout (repeatable)")
    p.add_argument("--seed", type=int, help="random seed (overrides config)")
    p.add_argument("--threads", type=int, help="worker threads (overrides config)")
    p.add_argument("--dataset", help="dataset path (overrides dataset.path)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="viewmix", description="Multi-view augmentation engine.")
    parser.add_argument("--version", action="version", version=f"viewmix {__version__}")
    sub = parser.add_subparsers(dest="subcommand", required=True, metavar="SUBCOMMAND")

    p = sub.add_parser("ingest", help="load and validate a dataset, optionally export it")
    _common(p)
    p.add_argument("-o", "--output", help="write the images as an (N, H, W, C) tensor file")

    p = sub.add_parser("augment", help="generate views for a dataset and export them")
    _common(p)
    p.add_argument("-o", "--output", required=True, help="tensor file to write")
    p.add_argument("--strategy", choices=STRATEGIES, help="overrides multiview.strategy")
    p.add_argument("--provenance", help="write one JSON record per view to this file")

    p = sub.add_parser("preview", help="render original / view A / view B / result as a PNG grid")
    _common(p)
    p.add_argument("-o", "--output", required=True, help="PNG file to write")
    p.add_argument("--strategy", choices=STRATEGIES, help="overrides multiview.strategy")
    p.add_argument("--images", type=int, default=3, help="number of source images (rows)")
    p.add_argument("--scale", type=int, help="integer upscale per tile (default: tiles >= 96 px)")

    p = sub.add_parser("stats", help="empirical gate rates and box statistics")
    _common(p)
    p.add_argument("--strategy", choices=STRATEGIES, help="overrides multiview.strategy")
    p.add_argument("--samples", type=int, default=10_000, help="source images to process")
    p.add_argument("--json", dest="json_path", help="also write the report as JSON")
    p.add_argument("--strict", action="store_true", help="exit 1 if any rate is flagged")

    p = sub.add_parser("bench", help="time view generation per strategy")
    _common(p)
    p.add_argument("--resolution", type=int, help="overrides bench.resolution")
    p.add_argument("--steps", type=int, help="overrides bench.steps")
    p.add_argument("--repeats", type=int, help="overrides bench.repeats")
    p.add_argument("--strategies", help="comma-separated subset, overrides bench.strategies")
    p.add_argument("--format", choices=("human", "delimited", "both"), default="both")
    p.add_argument("-o", "--output", help="write the delimited report to this file")
    return parser


def _cli_config(args) -> CliConfig:
    """Fold the dedicated flags into the override list, after any ``--set``."""
    overrides = list(args.overrides)
    if args.seed is not None:
        overrides.append(f"seed={args.seed}")
    if args.threads is not None:
        overrides.append(f"threads={args.threads}")
    if args.dataset is not None:
        overrides.append(f"dataset.path={json.dumps(args.dataset)}")
    if getattr(args, "strategy", None):
        overrides.append(f"multiview.strategy={args.strategy}")
    if args.subcommand == "bench":
        for key in ("resolution", "steps", "repeats"):
            if getattr(args, key) is not None:
                overrides.append(f"bench.{key}={getattr(args, key)}")
        if args.strategies is not None:
            names = [s.strip() for s in args.strategies.split(",") if s.strip()]
            overrides.append(f"bench.strategies={json.dumps(names)}")
    return CliConfig(args.subcommand, args.config, args.seed, getattr(args, "output", None),
                     tuple(overrides))


def _require_seed(cfg: RunConfig, what: str) -> int:
    if cfg.seed is None:
        raise UsageError(f"{what} needs a seed: pass --seed N or set 'seed' in the config")
    return cfg.seed


def _dataset(cfg: RunConfig, default_size: int, min_count: int = 1,
             synthetic_fallback: bool = False) -> Dataset:
    d = cfg.dataset
    if d.format == "synthetic" or (d.path is None and synthetic_fallback):
        if d.format != "synthetic":
            print("note: no dataset given, using synthetic images", file=sys.stderr)
        ds = synthetic_dataset(max(d.count, min_count), d.size or default_size)
    elif d.path is None:
        raise ConfigError("no dataset: pass --dataset PATH or set dataset.format=synthetic")
    else:
        ds = load_dataset(d.path, "auto" if d.format == "auto" else d.format, d.resize)
    if d.limit is not None and d.limit < len(ds):
        ds = Dataset(ds.items[: d.limit], ds.source, ds.fmt)
    return ds


def _echo(text: str) -> None:
    sys.stdout.write(text if text.endswith("\n") else text + "\n")
    sys.stdout.flush()


def cmd_ingest(args, cfg: RunConfig) -> int:
    ds = _dataset(cfg, cfg.pipeline.output_size)
    h, w, c = ds.image_shape
    labels = [it.label for it in ds.items if it.label is not None]
    _echo(f"{ds.source}: {len(ds)} images, {w}x{h}x{c}, format {ds.fmt}")
    if labels:
        hist = np.bincount(labels)
        _echo("labels: " + " ".join(f"{i}:{n}" for i, n in enumerate(hist)))
    if ds.fmt == "cifar10":
        raw = Path(ds.source).read_bytes()
        # a limited dataset covers a prefix of the file
        same = encode_cifar10(ds) == raw[: len(ds) * CIFAR_RECORD_BYTES]
        _echo(f"re-encode matches input bytes: {'yes' if same else 'NO'}")
        if not same:
            return EXIT_RUNTIME
    if args.output:
        stacked = np.stack([it.image.data for it in ds.items])
        write_tensor(stacked, args.output)
        _echo(f"wrote {args.output}: shape {tuple(stacked.shape)}")
    return EXIT_OK


def _generate_all(ds: Dataset, cfg: RunConfig, seed: int):
    bs = cfg.augment.batch_size
    batches = []
    for step, start in enumerate(range(0, len(ds), bs)):
        indices = range(start, min(start + bs, len(ds)))
        batches.extend(generate_batch(ds, indices, cfg.multiview, seed, step, threads=cfg.threads))
    return batches


def cmd_augment(args, cfg: RunConfig) -> int:
    seed = _require_seed(cfg, "augment")
    ds = _dataset(cfg, cfg.pipeline.output_size)
    batches = _generate_all(ds, cfg, seed)
    shape = export_batch(batches, args.output, cfg.augment.layout)
    digest = hashlib.sha256(Path(args.output).read_bytes()).hexdigest()[:16]
    _echo(f"augment: {len(batches)} images x {cfg.multiview.num_views} views, "
          f"strategy={cfg.multiview.strategy}, seed={seed}, threads={cfg.threads}, "
          f"backend={kernels.BACKEND}")
    _echo(f"wrote {args.output}: shape {tuple(shape)}, sha256 {digest}")
    if args.provenance:
        n = write_provenance(batches, args.provenance)
        _echo(f"wrote {args.provenance}: {n} records")
    return EXIT_OK


def _tile(img: Image, scale: int) -> np.ndarray:
    arr = convert_depth(img, Depth.BYTE).data
    if arr.shape[2] == 1:
        arr = np.repeat(arr, 3, axis=2)
    return np.repeat(np.repeat(arr, scale, axis=0), scale, axis=1)


def cmd_preview(args, cfg: RunConfig) -> int:
    from PIL import Image as PILImage

    seed = cfg.seed if cfg.seed is not None else 0
    if args.images < 1:
        raise UsageError("--images must be >= 1")
    size = cfg.pipeline.output_size
    ds = _dataset(cfg, size, synthetic_fallback=True)
    count = min(args.images, len(ds))
    # every row shows the strategy at work: gate forced open, two views
    mv = replace(cfg.multiview, num_views=2, strategy_probability=1.0, gate_scope="per_view",
                 view_overrides={k: v for k, v in cfg.multiview.view_overrides.items() if k < 2})
    batches = generate_batch(ds, range(count), mv, seed, 0, threads=cfg.threads)
    scale = args.scale or max(1, -(-96 // size))
    if scale < 1:
        raise UsageError("--scale must be >= 1")
    cols = 3 if mv.strategy == "baseline" else 4
    pad, tile = 4, size * scale
    grid = np.full((pad + count * (tile + pad), pad + cols * (tile + pad), 3), 255, dtype=np.uint8)
    for r, b in enumerate(batches):
        row = [resize(ds[b.source_index].image, size), b.base_views[0], b.base_views[1]]
        if cols == 4:
            row.append(b.views[0])
        for c, img in enumerate(row):
            y, x = pad + r * (tile + pad), pad + c * (tile + pad)
            grid[y:y + tile, x:x + tile] = _tile(img, scale)
    PILImage.fromarray(grid).save(args.output, format="PNG")
    _echo(f"preview: {count} rows x {cols} columns, strategy={mv.strategy}, seed={seed}")
    _echo(f"wrote {args.output}")
    return EXIT_OK


def cmd_stats(args, cfg: RunConfig) -> int:
    seed = cfg.seed if cfg.seed is not None else 0
    if args.samples < 1:
        raise UsageError("--samples must be >= 1")
    ds = _dataset(cfg, cfg.pipeline.output_size, synthetic_fallback=True)
    report = collect_stats(ds, cfg.multiview, args.samples, seed, threads=cfg.threads)
    _echo(format_stats(report))
    if args.json_path:
        Path(args.json_path).write_text(json.dumps(report.to_dict(), indent=2) + "\n", encoding="utf-8")
    return EXIT_RUNTIME if args.strict and report.flagged else EXIT_OK


def cmd_bench(args, cfg: RunConfig) -> int:
    seed = _require_seed(cfg, "bench")
    b = cfg.bench
    cfg = with_output_size(cfg, b.resolution)
    ds = _dataset(cfg, b.resolution, min_count=b.batch_size, synthetic_fallback=True)
    h, w, _ = ds.image_shape
    if (w, h) != (b.resolution, b.resolution):
        raise ConfigError(
            f"dataset images are {w}x{h} but bench.resolution is {b.resolution}; "
            f"set dataset.resize=[{b.resolution}, {b.resolution}]"
        )
    report = run_benchmark(b, ds, seed, multiview=cfg.multiview,
                           progress=lambda msg: print(msg, file=sys.stderr, flush=True))
    if args.format in ("human", "both"):
        _echo(emit_report(report, "human"))
    delimited = emit_report(report, "delimited")
    if args.format in ("delimited", "both"):
        _echo(delimited)
    if args.output:
        Path(args.output).write_text(delimited, encoding="utf-8")
    return EXIT_OK


_COMMANDS = {
    "ingest": cmd_ingest,
    "augment": cmd_augment,
    "preview": cmd_preview,
    "stats": cmd_stats,
    "bench": cmd_bench,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cc = _cli_config(args)
        cfg = load_config(cc.config_path, cc.overrides)
        return _COMMANDS[args.subcommand](args, cfg)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"viewmix {args.subcommand}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ViewMixError, OSError) as exc:
        print(f"viewmix {args.subcommand}: error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
