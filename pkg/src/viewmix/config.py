"""Run configuration: one YAML file plus ``key=value`` overrides.

The file is the record of an experiment. Command-line overrides use dotted
paths (``multiview.strategy=cutout``) and are applied in order, so the last
one wins. Values are parsed as YAML scalars, so ``0.5``, ``true``, ``null``
and ``[1, 2]`` work as expected. Unknown keys anywhere are errors.

Top-level sections::

    seed: 7                     # required by augment and bench
    threads: 1
    dataset:  {path, format, resize, limit, count, size}
    pipeline: {output_size, steps, <kind>: {probability / params}}
    multiview: {num_views, strategy, strategy_probability, r_min, r_max,
                lambda_mode, gate_scope, fill, view_overrides}
    augment:  {batch_size, layout}
    bench:    {resolution, batch_size, steps, strategies, warmup_steps, repeats}

Under ``pipeline`` a transform kind as key (``pipeline.solarize.probability``)
edits that step of ``steps`` (or of the default step list).
"""

from __future__ import annotations

import copy
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path
from typing import Any, Mapping, Optional, Sequence

import yaml

from viewmix.bench import BenchConfig
from viewmix.errors import ConfigError, ViewMixError
from viewmix.io import LAYOUTS
from viewmix.multiview import MultiViewConfig
from viewmix.transforms import KINDS, PipelineSpec

__all__ = [
    "DatasetConfig",
    "AugmentConfig",
    "RunConfig",
    "default_config_text",
    "load_config",
    "parse_override",
    "apply_overrides",
    "build_config",
    "with_output_size",
]

_SECTIONS = ("seed", "threads", "dataset", "pipeline", "multiview", "augment", "bench")
_DATASET_KEYS = ("path", "format", "resize", "limit", "count", "size")
_DATASET_FORMATS = ("auto", "cifar10", "folder", "synthetic")
_AUGMENT_KEYS = ("batch_size", "layout")
_BENCH_KEYS = ("resolution", "batch_size", "steps", "strategies", "warmup_steps", "repeats")


@dataclass(frozen=True)
class DatasetConfig:
    path: Optional[str] = None
    format: str = "auto"
    resize: Optional[tuple[int, int]] = None
    limit: Optional[int] = None
    # synthetic datasets only
    count: int = 256
    size: Optional[int] = None

    def __post_init__(self):
        if self.format not in _DATASET_FORMATS:
            raise ConfigError(f"dataset.format must be one of {_DATASET_FORMATS}, got {self.format!r}")
        if self.resize is not None:
            if len(self.resize) != 2:
                raise ConfigError(f"dataset.resize must be [width, height], got {self.resize!r}")
            object.__setattr__(self, "resize", (int(self.resize[0]), int(self.resize[1])))
        if self.limit is not None and int(self.limit) < 1:
            raise ConfigError(f"dataset.limit must be >= 1, got {self.limit}")
        if int(self.count) < 1:
            raise ConfigError(f"dataset.count must be >= 1, got {self.count}")


@dataclass(frozen=True)
class AugmentConfig:
    batch_size: int = 128
    layout: str = "nvhwc"

    def __post_init__(self):
        if int(self.batch_size) < 1:
            raise ConfigError(f"augment.batch_size must be >= 1, got {self.batch_size}")
        if self.layout not in LAYOUTS:
            raise ConfigError(f"augment.layout must be one of {LAYOUTS}, got {self.layout!r}")


@dataclass(frozen=True)
class RunConfig:
    seed: Optional[int]
    threads: int
    dataset: DatasetConfig
    pipeline: PipelineSpec
    multiview: MultiViewConfig
    augment: AugmentConfig
    bench: BenchConfig
    raw: Mapping[str, Any] = field(default_factory=dict, compare=False)


def default_config_text() -> str:
    return resources.files("viewmix").joinpath("configs/default.yaml").read_text(encoding="utf-8")


def parse_override(text: str) -> tuple[list[str], Any]:
    """Split ``a.b.c=value`` into a key path and a YAML-parsed value."""
    key, sep, value = text.partition("=")
    key = key.strip()
    if not sep or not key:
        raise ConfigError(f"override {text!r} is not of the form key=value")
    parts = key.split(".")
    if any(not p for p in parts):
        raise ConfigError(f"override key {key!r} has an empty component")
    try:
        parsed = yaml.safe_load(value) if value.strip() else None
    except yaml.YAMLError as exc:
        raise ConfigError(f"override {text!r}: cannot parse value: {exc}") from None
    return parts, parsed


def apply_overrides(data: Mapping[str, Any], overrides: Sequence[str]) -> dict:
    out = copy.deepcopy(dict(data))
    for text in overrides:
        parts, value = parse_override(text)
        node = out
        for p in parts[:-1]:
            child = node.get(p)
            if child is None:
                child = node[p] = {}
            elif not isinstance(child, dict):
                raise ConfigError(f"override {text!r}: {p!r} is not a section")
            node = child
        node[parts[-1]] = value
    return out


def _section(data: Mapping[str, Any], name: str, keys: Sequence[str]) -> dict:
    raw = data.get(name) or {}
    if not isinstance(raw, Mapping):
        raise ConfigError(f"{name} must be a mapping, got {type(raw).__name__}")
    unknown = set(raw) - set(keys)
    if unknown:
        raise ConfigError(f"unknown {name} key(s): {sorted(unknown)}")
    return dict(raw)


def _pipeline(raw: Mapping[str, Any]) -> PipelineSpec:
    if not isinstance(raw, Mapping):
        raise ConfigError(f"pipeline must be a mapping, got {type(raw).__name__}")
    edits = {k: v for k, v in raw.items() if k in KINDS}
    base = PipelineSpec.from_dict({k: v for k, v in raw.items() if k not in KINDS})
    for kind, change in edits.items():
        if not isinstance(change, Mapping):
            raise ConfigError(f"pipeline.{kind} must be a mapping of probability/parameters")
    return base.with_overrides(edits) if edits else base


def build_config(data: Mapping[str, Any]) -> RunConfig:
    """Validate a parsed config mapping into a :class:`RunConfig`."""
    if not isinstance(data, Mapping):
        raise ConfigError("config root must be a mapping")
    unknown = set(data) - set(_SECTIONS)
    if unknown:
        raise ConfigError(f"unknown config section(s): {sorted(unknown)}")
    seed = data.get("seed")
    if seed is not None and (isinstance(seed, bool) or not isinstance(seed, int)):
        raise ConfigError(f"seed must be an integer, got {seed!r}")
    threads = data.get("threads", 1)
    if isinstance(threads, bool) or not isinstance(threads, int) or threads < 1:
        raise ConfigError(f"threads must be a positive integer, got {threads!r}")
    try:
        pipeline = _pipeline(data.get("pipeline") or {})
        mv_raw = data.get("multiview") or {}
        if not isinstance(mv_raw, Mapping):
            raise ConfigError("multiview must be a mapping")
        multiview = MultiViewConfig.from_dict(mv_raw, pipeline=pipeline)
        dataset = DatasetConfig(**_section(data, "dataset", _DATASET_KEYS))
        augment = AugmentConfig(**_section(data, "augment", _AUGMENT_KEYS))
        bench_raw = _section(data, "bench", _BENCH_KEYS)
        if "strategies" in bench_raw and bench_raw["strategies"] is not None:
            bench_raw["strategies"] = tuple(bench_raw["strategies"])
        bench = BenchConfig(threads=threads, **{k: v for k, v in bench_raw.items() if v is not None})
    except ViewMixError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None
    return RunConfig(seed, threads, dataset, pipeline, multiview, augment, bench, dict(data))


def load_config(path: Optional[str | Path] = None, overrides: Sequence[str] = ()) -> RunConfig:
    """Read ``path`` (or the packaged default), apply overrides, validate."""
    if path is None:
        text, where = default_config_text(), "<default config>"
    else:
        try:
            text, where = Path(path).read_text(encoding="utf-8"), str(path)
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    try:
        data = yaml.safe_load(text) or {}
    except yaml.YAMLError as exc:
        raise ConfigError(f"{where}: invalid YAML: {exc}") from None
    if not isinstance(data, Mapping):
        raise ConfigError(f"{where}: top level must be a mapping")
    return build_config(apply_overrides(data, overrides))


def with_output_size(cfg: RunConfig, size: int) -> RunConfig:
    pipeline = replace(cfg.pipeline, output_size=int(size))
    return replace(cfg, pipeline=pipeline, multiview=replace(cfg.multiview, base_pipeline=pipeline))
