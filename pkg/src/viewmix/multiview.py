"""Multi-view generation with an optional regional strategy.

Every source image yields ``num_views`` base views from the base pipeline.
The strategy then edits those views in place of time-consuming extra work:

* ``viewmix`` pastes a box from a sibling base view of the same image,
* ``cutmix`` pastes a box from a base view of another image in the batch,
* ``cutout`` fills a box with a constant.

Donor views are always the pristine base views, never already-mixed ones, and
no strategy runs a single additional base transform.

Random streams are keyed by ``(seed, step, dataset index)`` and then by view
or strategy slot, so results do not depend on batch order or thread count.
"""

from __future__ import annotations

import json
import threading
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Any, Iterable, Mapping, Optional, Sequence

from viewmix.errors import ConfigError, ParameterError
from viewmix.image import Dataset, Image
from viewmix.regional import LAMBDA_MODES, BBox, Mask, cutmix, cutout, sample_bbox, viewmix
from viewmix.rng import RngStream
from viewmix.transforms import KINDS, PipelineSpec, apply_pipeline, default_pipeline

__all__ = [
    "STRATEGIES",
    "GATE_SCOPES",
    "MultiViewConfig",
    "Provenance",
    "ViewBatch",
    "InvocationCounter",
    "generate_views",
    "generate_batch",
    "count_invocations",
    "provenance_records",
    "write_provenance",
    "image_stream",
]

STRATEGIES = ("baseline", "viewmix", "cutout", "cutmix")
GATE_SCOPES = ("per_view", "per_pair")

# child-stream domains under an image's stream
_VIEW = 0
_STRATEGY = 1
_PAIR = 2
_DONOR_IMAGE = 3


@dataclass(frozen=True)
class MultiViewConfig:
    num_views: int = 2
    base_pipeline: PipelineSpec = field(default_factory=default_pipeline)
    strategy: str = "viewmix"
    strategy_probability: float = 0.33
    r_min: float = 0.3
    r_max: float = 0.6
    lambda_mode: str = "linear"
    gate_scope: str = "per_view"
    fill: float = 0
    # view index -> {transform kind -> {probability / parameter overrides}}
    view_overrides: Mapping[int, Mapping[str, Mapping[str, Any]]] = field(default_factory=dict)

    def __post_init__(self):
        if self.strategy not in STRATEGIES:
            raise ParameterError(f"strategy must be one of {STRATEGIES}, got {self.strategy!r}")
        if int(self.num_views) < 1:
            raise ParameterError(f"num_views must be >= 1, got {self.num_views}")
        if self.strategy == "viewmix" and self.num_views < 2:
            raise ParameterError("viewmix needs num_views >= 2 so a donor view exists")
        if not 0.0 <= float(self.strategy_probability) <= 1.0:
            raise ParameterError(
                f"strategy_probability must lie in [0, 1], got {self.strategy_probability}"
            )
        if not 0.0 < self.r_min <= self.r_max < 1.0:
            raise ParameterError(f"need 0 < r_min <= r_max < 1, got [{self.r_min}, {self.r_max}]")
        if self.lambda_mode not in LAMBDA_MODES:
            raise ParameterError(f"lambda_mode must be one of {LAMBDA_MODES}, got {self.lambda_mode!r}")
        if self.gate_scope not in GATE_SCOPES:
            raise ParameterError(f"gate_scope must be one of {GATE_SCOPES}, got {self.gate_scope!r}")
        if self.gate_scope == "per_pair" and self.num_views % 2:
            raise ParameterError("gate_scope=per_pair needs an even num_views")
        overrides = {int(k): dict(v) for k, v in self.view_overrides.items()}
        for view in overrides:
            if not 0 <= view < self.num_views:
                raise ConfigError(f"view override for view {view}, but num_views={self.num_views}")
        object.__setattr__(self, "view_overrides", overrides)
        object.__setattr__(self, "strategy_probability", float(self.strategy_probability))
        pipelines = tuple(
            self.base_pipeline.with_overrides(overrides[i]) if i in overrides else self.base_pipeline
            for i in range(self.num_views)
        )
        object.__setattr__(self, "_pipelines", pipelines)

    def pipeline_for(self, view: int) -> PipelineSpec:
        return self._pipelines[view]

    def with_strategy(self, strategy: str, **changes) -> MultiViewConfig:
        return replace(self, strategy=strategy, **changes)

    _KEYS = ("num_views", "strategy", "strategy_probability", "r_min", "r_max",
             "lambda_mode", "gate_scope", "fill", "view_overrides")

    @classmethod
    def from_dict(cls, data: Mapping[str, Any], pipeline: Optional[PipelineSpec] = None) -> MultiViewConfig:
        unknown = set(data) - set(cls._KEYS)
        if unknown:
            raise ConfigError(f"unknown multiview key(s): {sorted(unknown)}")
        kwargs = dict(data)
        if pipeline is not None:
            kwargs["base_pipeline"] = pipeline
        return cls(**kwargs)

    def to_dict(self) -> dict[str, Any]:
        out = {k: getattr(self, k) for k in self._KEYS}
        out["view_overrides"] = {str(k): v for k, v in self.view_overrides.items()}
        return out


class InvocationCounter:
    """Thread-safe tally of executed transforms and strategy applications."""

    def __init__(self):
        self._counts: Counter = Counter()
        self._lock = threading.Lock()

    def add(self, kind: str, n: int = 1) -> None:
        with self._lock:
            self._counts[kind] += n

    @property
    def counts(self) -> dict[str, int]:
        with self._lock:
            return dict(self._counts)

    def base_counts(self) -> dict[str, int]:
        c = self.counts
        return {k: c.get(k, 0) for k in KINDS}

    def __getitem__(self, kind: str) -> int:
        with self._lock:
            return self._counts[kind]


@dataclass(frozen=True)
class Provenance:
    view: int
    applied: bool = False
    strategy: str = "baseline"
    bbox: Optional[BBox] = None
    donor_view: Optional[int] = None
    donor_image: Optional[int] = None

    def to_dict(self) -> dict[str, Any]:
        return {
            "view": self.view,
            "applied": self.applied,
            "strategy": self.strategy,
            "donor_view": self.donor_view,
            "donor_image": self.donor_image,
            "bbox": None if self.bbox is None else self.bbox.to_dict(),
        }


@dataclass(frozen=True)
class ViewBatch:
    source_index: int
    views: tuple[Image, ...]
    provenance: tuple[Provenance, ...]
    base_views: tuple[Image, ...]


def image_stream(seed: int, step: int, index: int) -> RngStream:
    return RngStream(seed, step, index)


def _base_views(img: Image, cfg: MultiViewConfig, rng: RngStream, counter=None, logs=None):
    views = []
    for i in range(cfg.num_views):
        log = [] if logs is not None else None
        views.append(apply_pipeline(img, cfg.pipeline_for(i), rng.child(_VIEW, i), log=log, counter=counter))
        if logs is not None:
            logs.append(log)
    return tuple(views)


def _edit_view(i: int, stream: RngStream, base, cfg: MultiViewConfig, counter,
               donor_base=None, donor_image=None, donor_view=None):
    """Apply the strategy to view ``i``; returns (image, provenance)."""
    s = cfg.strategy
    view = base[i]
    if s == "viewmix":
        if donor_view is None:
            j = stream.integers(0, cfg.num_views - 1)
            donor_view = j + (j >= i)
        bbox = sample_bbox(view.width, view.height, cfg.r_min, cfg.r_max, stream, cfg.lambda_mode)
        out = viewmix(view, base[donor_view], Mask.from_bbox(bbox))
        prov = Provenance(i, True, s, bbox, donor_view=donor_view)
    elif s == "cutout":
        bbox = sample_bbox(view.width, view.height, cfg.r_min, cfg.r_max, stream, cfg.lambda_mode)
        out = cutout(view, bbox, cfg.fill)
        prov = Provenance(i, True, s, bbox)
    else:
        bbox = sample_bbox(view.width, view.height, cfg.r_min, cfg.r_max, stream, cfg.lambda_mode)
        out = cutmix(view, donor_base[i], bbox).image
        prov = Provenance(i, True, s, bbox, donor_view=i, donor_image=donor_image)
    if counter is not None:
        counter.add(f"strategy:{s}")
    return out, prov


def _apply_strategy(source_index: int, base, cfg: MultiViewConfig, rng: RngStream, counter=None,
                    donor_base=None, donor_image=None) -> ViewBatch:
    n = cfg.num_views
    views = list(base)
    prov = [Provenance(i, strategy=cfg.strategy) for i in range(n)]
    p = cfg.strategy_probability
    if cfg.strategy != "baseline":
        if cfg.gate_scope == "per_view":
            for i in range(n):
                stream = rng.child(_STRATEGY, i)
                if stream.random() < p:
                    views[i], prov[i] = _edit_view(i, stream, base, cfg, counter, donor_base, donor_image)
        else:
            for k in range(n // 2):
                pair = rng.child(_PAIR, k)
                if pair.random() < p:
                    for m in (0, 1):
                        i = 2 * k + m
                        partner = 2 * k + 1 - m
                        views[i], prov[i] = _edit_view(i, pair.child(m), base, cfg, counter,
                                                       donor_base, donor_image, donor_view=partner)
    return ViewBatch(source_index, tuple(views), tuple(prov), tuple(base))


def generate_views(img: Image, cfg: MultiViewConfig, rng: RngStream, counter=None,
                   source_index: int = 0, logs: Optional[list] = None) -> ViewBatch:
    """Produce ``cfg.num_views`` views of one image and apply the strategy.

    ``logs``, if given, receives one list of step records per base view.
    """
    if cfg.strategy == "cutmix":
        raise ParameterError(
            "cutmix needs donor images from other sources; use generate_batch instead"
        )
    base = _base_views(img, cfg, rng, counter, logs)
    return _apply_strategy(source_index, base, cfg, rng, counter)


def _map(fn, items, threads: int):
    if threads <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def generate_batch(dataset: Dataset, indices: Sequence[int], cfg: MultiViewConfig, seed: int,
                   step: int, threads: int = 1, counter=None) -> list[ViewBatch]:
    """Generate views for ``dataset[indices]``.

    Output depends only on ``(dataset, indices, cfg, seed, step)``; ``threads``
    only changes how the work is scheduled. For cutmix the donor image is
    drawn uniformly among the other batch positions.
    """
    indices = [int(i) for i in indices]
    if not indices:
        raise ParameterError("generate_batch needs at least one index")
    for i in indices:
        if not 0 <= i < len(dataset):
            raise ParameterError(f"index {i} out of range for dataset of {len(dataset)} images")
    if cfg.strategy == "cutmix" and len(indices) < 2:
        raise ParameterError("cutmix needs a batch of at least 2 images to draw donors from")

    streams = [image_stream(seed, step, i) for i in indices]

    def base_job(k):
        return _base_views(dataset[indices[k]].image, cfg, streams[k], counter)

    positions = range(len(indices))
    bases = _map(base_job, positions, threads)

    def strategy_job(k):
        donor_base = donor_image = None
        if cfg.strategy == "cutmix":
            d = streams[k].child(_DONOR_IMAGE).integers(0, len(indices) - 1)
            d += d >= k
            donor_base, donor_image = bases[d], indices[d]
        return _apply_strategy(indices[k], bases[k], cfg, streams[k], counter, donor_base, donor_image)

    return _map(strategy_job, positions, threads)


def count_invocations(cfg: MultiViewConfig) -> dict[str, float]:
    """Expected executions of each base transform per source image.

    Only the base pipelines enter this sum, so the result is the same for
    every strategy: regional strategies reuse existing views.
    """
    expected = {k: 0.0 for k in KINDS}
    for i in range(cfg.num_views):
        for s in cfg.pipeline_for(i).steps:
            expected[s.kind] += s.probability
    return expected


def provenance_records(batches: Iterable[ViewBatch]):
    for b in batches:
        for p in b.provenance:
            yield {"image": b.source_index, **p.to_dict()}


def write_provenance(batches: Iterable[ViewBatch], path) -> int:
    n = 0
    with open(path, "w", encoding="utf-8") as fh:
        for rec in provenance_records(batches):
            fh.write(json.dumps(rec, sort_keys=True) + "\n")
            n += 1
    return n
