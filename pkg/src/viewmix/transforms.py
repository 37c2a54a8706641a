"""The SimCLR-style base transforms and their probability-gated composition.

A :class:`PipelineSpec` is an ordered list of :class:`TransformSpec` steps and
defines the view distribution. :func:`apply_pipeline` walks the steps; step
``k`` draws its gate and all of its parameters from the sub-stream
``rng.child(k)``, so whether one step fires never changes another step's
randomness.

Geometric steps (crop, flip) run in the input's native depth. Filter steps
(jitter, grayscale, blur, solarize) run in unit float; the pipeline converts
once, before the first filter step, and converts back at the end.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Any, Callable, Mapping, Optional

import numpy as np

from viewmix import kernels
from viewmix.errors import ConfigError, ParameterError
from viewmix.image import Image
from viewmix.rng import RngStream

__all__ = [
    "KINDS",
    "DEFAULT_PROBABILITIES",
    "DEFAULT_PARAMS",
    "TransformSpec",
    "PipelineSpec",
    "StepRecord",
    "default_pipeline",
    "round_half_up",
    "sample_crop_box",
    "crop_rescale",
    "resize",
    "horizontal_flip",
    "color_jitter",
    "grayscale",
    "gaussian_kernel",
    "blur",
    "gaussian_blur",
    "solarize",
    "apply_pipeline",
]

KINDS = ("crop_rescale", "horizontal_flip", "color_jitter", "grayscale", "gaussian_blur", "solarize")

# Published gate probabilities of the standard stack.
DEFAULT_PROBABILITIES = {
    "crop_rescale": 1.0,
    "horizontal_flip": 0.5,
    "color_jitter": 0.8,
    "grayscale": 0.2,
    "gaussian_blur": 0.2,
    "solarize": 0.2,
}

# Jitter strengths, blur sigma and the crop aspect range are conventions (see README).
DEFAULT_PARAMS: dict[str, dict[str, Any]] = {
    "crop_rescale": {"area_range": (0.75, 1.0), "aspect_range": (3 / 4, 4 / 3)},
    "horizontal_flip": {},
    "color_jitter": {"brightness": 0.8, "contrast": 0.8, "saturation": 0.8, "hue": 0.2},
    "grayscale": {},
    "gaussian_blur": {"sigma_range": (0.1, 2.0)},
    "solarize": {"threshold": 0.5},
}

_FLOAT_KINDS = frozenset({"color_jitter", "grayscale", "gaussian_blur", "solarize"})
_JITTER_ORDER = ("brightness", "contrast", "saturation", "hue")


def round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def _as_range(value, name: str) -> tuple[float, float]:
    try:
        lo, hi = (float(v) for v in value)
    except (TypeError, ValueError):
        raise ParameterError(f"{name} must be a [min, max] pair, got {value!r}") from None
    if not lo <= hi:
        raise ParameterError(f"{name} must satisfy min <= max, got [{lo}, {hi}]")
    return lo, hi


def _check_params(kind: str, params: Mapping[str, Any]) -> dict[str, Any]:
    allowed = DEFAULT_PARAMS[kind]
    unknown = set(params) - set(allowed)
    if unknown:
        raise ConfigError(f"unknown parameter(s) {sorted(unknown)} for transform {kind!r}")
    merged = {**allowed, **params}
    if kind == "crop_rescale":
        area = _as_range(merged["area_range"], "area_range")
        aspect = _as_range(merged["aspect_range"], "aspect_range")
        if not (0.0 < area[0] and area[1] <= 1.0):
            raise ParameterError(f"crop area fractions must lie in (0, 1], got {area}")
        if aspect[0] <= 0.0:
            raise ParameterError(f"crop aspect ratios must be positive, got {aspect}")
        merged["area_range"], merged["aspect_range"] = area, aspect
    elif kind == "color_jitter":
        for key in _JITTER_ORDER:
            merged[key] = float(merged[key])
            if merged[key] < 0:
                raise ParameterError(f"jitter strength {key} must be >= 0, got {merged[key]}")
        if merged["hue"] > 0.5:
            raise ParameterError(f"jitter hue strength must be <= 0.5, got {merged['hue']}")
    elif kind == "gaussian_blur":
        sig = _as_range(merged["sigma_range"], "sigma_range")
        if sig[0] <= 0.0:
            raise ParameterError(f"blur sigma bounds must be positive, got {sig}")
        merged["sigma_range"] = sig
    elif kind == "solarize":
        merged["threshold"] = float(merged["threshold"])
    return merged


@dataclass(frozen=True)
class TransformSpec:
    kind: str
    probability: float = 1.0
    params: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError(f"unknown transform kind {self.kind!r}; expected one of {KINDS}")
        p = float(self.probability)
        if not 0.0 <= p <= 1.0:
            raise ParameterError(f"{self.kind}: probability must lie in [0, 1], got {p}")
        object.__setattr__(self, "probability", p)
        object.__setattr__(self, "params", _check_params(self.kind, dict(self.params)))

    @classmethod
    def default(cls, kind: str, **params) -> TransformSpec:
        return cls(kind, DEFAULT_PROBABILITIES[kind], params)

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {"kind": self.kind, "probability": self.probability}
        for key, value in self.params.items():
            out[key] = list(value) if isinstance(value, tuple) else value
        return out


@dataclass(frozen=True)
class PipelineSpec:
    steps: tuple[TransformSpec, ...]
    output_size: int = 32

    def __post_init__(self):
        steps = tuple(self.steps)
        object.__setattr__(self, "steps", steps)
        if int(self.output_size) < 1:
            raise ParameterError(f"output_size must be >= 1, got {self.output_size}")
        object.__setattr__(self, "output_size", int(self.output_size))
        if not steps or steps[0].kind != "crop_rescale":
            raise ConfigError("a pipeline must start with a crop_rescale step")
        if sum(s.kind == "crop_rescale" for s in steps) != 1:
            raise ConfigError("a pipeline must contain exactly one crop_rescale step")

    _STEP_KEYS = {"kind", "probability"}

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> PipelineSpec:
        unknown = set(data) - {"output_size", "steps"}
        if unknown:
            raise ConfigError(f"unknown pipeline key(s): {sorted(unknown)}")
        raw_steps = data.get("steps")
        if raw_steps is None:
            return default_pipeline(int(data.get("output_size", 32)))
        steps = []
        for i, raw in enumerate(raw_steps):
            if not isinstance(raw, Mapping) or "kind" not in raw:
                raise ConfigError(f"pipeline step {i} must be a mapping with a 'kind' key")
            kind = raw["kind"]
            if kind not in KINDS:
                raise ConfigError(f"pipeline step {i}: unknown transform kind {kind!r}")
            params = {k: v for k, v in raw.items() if k not in cls._STEP_KEYS}
            prob = raw.get("probability", DEFAULT_PROBABILITIES[kind])
            steps.append(TransformSpec(kind, prob, params))
        return cls(tuple(steps), int(data.get("output_size", 32)))

    def to_dict(self) -> dict[str, Any]:
        return {"output_size": self.output_size, "steps": [s.to_dict() for s in self.steps]}

    def with_overrides(self, overrides: Mapping[str, Mapping[str, Any]]) -> PipelineSpec:
        """Return a copy with per-kind ``probability``/parameter changes applied."""
        by_kind = {s.kind: s for s in self.steps}
        for kind in overrides:
            if kind not in by_kind:
                raise ConfigError(f"override targets transform {kind!r} absent from the pipeline")
        steps = []
        for s in self.steps:
            change = dict(overrides.get(s.kind, {}))
            if not change:
                steps.append(s)
                continue
            prob = change.pop("probability", s.probability)
            steps.append(TransformSpec(s.kind, prob, {**s.params, **change}))
        return replace(self, steps=tuple(steps))

    def with_probabilities(self, probability: float) -> PipelineSpec:
        """All gated steps set to one probability; crop keeps its own gate."""
        steps = tuple(
            s if s.kind == "crop_rescale" else TransformSpec(s.kind, probability, s.params)
            for s in self.steps
        )
        return replace(self, steps=steps)


def default_pipeline(output_size: int = 32, **jitter) -> PipelineSpec:
    steps = []
    for kind in KINDS:
        params = jitter if kind == "color_jitter" else {}
        steps.append(TransformSpec.default(kind, **params))
    return PipelineSpec(tuple(steps), output_size)


# --------------------------------------------------------------------------
# array-level kernels; each returns (array, sampled-parameter record)

def _to_float(arr: np.ndarray) -> np.ndarray:
    if arr.dtype == np.float32:
        return arr
    return kernels.impl.to_float(arr)


def _from_float(arr: np.ndarray, dtype) -> np.ndarray:
    if arr.dtype == dtype:
        return arr
    return kernels.impl.to_byte(arr)


def sample_crop_box(width: int, height: int, rng: RngStream,
                    area_range=(0.75, 1.0), aspect_range=(3 / 4, 4 / 3)) -> tuple[int, int, int, int]:
    """Return ``(top, left, h, w)`` of a random crop.

    Target area fraction and aspect ratio are uniform in their ranges. Up to
    ten attempts are made to find a crop that fits; otherwise the largest
    centred crop within the aspect range is used.
    """
    area = width * height
    for _ in range(10):
        a = rng.uniform(*area_range)
        r = rng.uniform(*aspect_range)
        w = max(1, round_half_up(math.sqrt(a * area * r)))
        h = max(1, round_half_up(math.sqrt(a * area / r)))
        if w <= width and h <= height:
            left = rng.integers(0, width - w + 1)
            top = rng.integers(0, height - h + 1)
            return top, left, h, w
    in_ratio = width / height
    if in_ratio < aspect_range[0]:
        w = width
        h = min(height, max(1, round_half_up(w / aspect_range[0])))
    elif in_ratio > aspect_range[1]:
        h = height
        w = min(width, max(1, round_half_up(h * aspect_range[1])))
    else:
        w, h = width, height
    return (height - h) // 2, (width - w) // 2, h, w


def _crop(arr, rng, out_size, area_range, aspect_range):
    H, W = arr.shape[:2]
    top, left, h, w = sample_crop_box(W, H, rng, area_range, aspect_range)
    out = kernels.impl.resize_bilinear(arr, top, left, h, w, out_size, out_size)
    return out, {"top": top, "left": left, "h": h, "w": w}


def _flip(arr, rng):
    return kernels.impl.flip_horizontal(arr), {}


def _jitter(arr, rng, brightness, contrast, saturation, hue):
    factors = {
        "brightness": rng.uniform(max(0.0, 1.0 - brightness), 1.0 + brightness),
        "contrast": rng.uniform(max(0.0, 1.0 - contrast), 1.0 + contrast),
        "saturation": rng.uniform(max(0.0, 1.0 - saturation), 1.0 + saturation),
        "hue": rng.uniform(-hue, hue),
    }
    order = [_JITTER_ORDER[i] for i in rng.permutation(4)]
    k = kernels.impl
    rgb = arr.shape[2] == 3
    for name in order:
        f = factors[name]
        if name == "hue":
            if f != 0.0 and rgb:
                arr = k.adjust_hue(arr, f)
        elif f == 1.0:
            continue
        elif name == "brightness":
            arr = k.blend_scalar(arr, f, 0.0)
        elif name == "contrast":
            mean = k.gray_mean(arr) if rgb else float(arr.astype(np.float64).mean())
            arr = k.blend_scalar(arr, f, mean)
        elif rgb:
            arr = k.blend_gray(arr, f)
    return arr, {**factors, "order": order}


def _grayscale(arr, rng=None):
    if arr.shape[2] == 1:
        return arr, {}
    return kernels.impl.grayscale(arr), {}


def gaussian_kernel(sigma: float) -> np.ndarray:
    """Normalized 1-D Gaussian weights with radius ``ceil(3 * sigma)``."""
    if sigma <= 0:
        raise ParameterError(f"blur sigma must be positive, got {sigma}")
    radius = math.ceil(3.0 * sigma)
    d = np.arange(-radius, radius + 1, dtype=np.float64)
    w = np.exp(-(d * d) / (2.0 * sigma * sigma))
    return w / w.sum()


def _blur(arr, rng, sigma_range):
    sigma = rng.uniform(*sigma_range)
    return kernels.impl.blur_separable(arr, gaussian_kernel(sigma)), {"sigma": sigma}


def _solarize(arr, rng=None, threshold=None):
    if arr.dtype == np.float32:
        threshold = 0.5 if threshold is None else threshold
        return kernels.impl.solarize(arr, threshold), {"threshold": threshold}
    threshold = 128 if threshold is None else threshold
    return np.where(arr >= threshold, 255 - arr, arr).astype(np.uint8), {"threshold": threshold}


_OPS: dict[str, Callable] = {
    "horizontal_flip": _flip,
    "color_jitter": _jitter,
    "grayscale": _grayscale,
    "gaussian_blur": _blur,
    "solarize": _solarize,
}


# --------------------------------------------------------------------------
# public image-level operations

def resize(img: Image, out_size: int) -> Image:
    """Bilinear rescale of the whole image to ``out_size`` x ``out_size``."""
    if out_size < 1:
        raise ParameterError(f"out_size must be >= 1, got {out_size}")
    return Image(kernels.impl.resize_bilinear(img.data, 0, 0, img.height, img.width, out_size, out_size))


def crop_rescale(img: Image, rng: RngStream, area_range=(0.75, 1.0),
                 aspect_range=(3 / 4, 4 / 3), out_size: Optional[int] = None) -> Image:
    out_size = img.width if out_size is None else int(out_size)
    if out_size < 1:
        raise ParameterError(f"out_size must be >= 1, got {out_size}")
    params = _check_params("crop_rescale", {"area_range": area_range, "aspect_range": aspect_range})
    out, _ = _crop(img.data, rng, out_size, **params)
    return Image(out)


def horizontal_flip(img: Image) -> Image:
    return Image(_flip(img.data, None)[0])


def color_jitter(img: Image, rng: RngStream, brightness: float = 0.8, contrast: float = 0.8,
                 saturation: float = 0.8, hue: float = 0.2) -> Image:
    """Brightness, contrast, saturation and hue adjustments in random order.

    Factors are drawn as ``U[max(0, 1 - s), 1 + s]`` (hue: ``U[-s, s]`` of the
    full circle). Byte images are processed in unit float and rounded back.
    """
    p = _check_params("color_jitter", dict(brightness=brightness, contrast=contrast,
                                           saturation=saturation, hue=hue))
    out, _ = _jitter(_to_float(img.data), rng, **p)
    return Image(_from_float(out, img.data.dtype))


def grayscale(img: Image) -> Image:
    return Image(_grayscale(img.data)[0])


def blur(img: Image, sigma: float) -> Image:
    """Deterministic separable Gaussian blur with replicate padding."""
    out = kernels.impl.blur_separable(_to_float(img.data), gaussian_kernel(sigma))
    return Image(_from_float(out, img.data.dtype))


def gaussian_blur(img: Image, rng: RngStream, sigma_range=(0.1, 2.0)) -> Image:
    p = _check_params("gaussian_blur", {"sigma_range": sigma_range})
    out, _ = _blur(_to_float(img.data), rng, **p)
    return Image(_from_float(out, img.data.dtype))


def solarize(img: Image, threshold=None) -> Image:
    """Invert samples at or above ``threshold`` (default 128 bytes / 0.5 float)."""
    return Image(_solarize(img.data, threshold=threshold)[0])


@dataclass(frozen=True)
class StepRecord:
    slot: int
    kind: str
    gate: float
    fired: bool
    params: Mapping[str, Any]


def apply_pipeline(img: Image, spec: PipelineSpec, rng: RngStream,
                   log: Optional[list] = None, counter=None) -> Image:
    """Apply every gated step of ``spec`` to ``img``; output has the input depth.

    ``log`` (a list) receives one :class:`StepRecord` per step; ``counter``
    (anything with ``add(kind)``) is told about every transform that fires.
    """
    arr = img.data
    out_dtype = arr.dtype
    for slot, step in enumerate(spec.steps):
        stream = rng.child(slot)
        gate = stream.random()
        fired = gate < step.probability
        info: Mapping[str, Any] = {}
        if step.kind == "crop_rescale":
            if fired:
                arr, info = _crop(arr, stream, spec.output_size, **step.params)
            else:
                H, W = arr.shape[:2]
                arr = kernels.impl.resize_bilinear(arr, 0, 0, H, W, spec.output_size, spec.output_size)
        elif fired:
            if step.kind in _FLOAT_KINDS:
                arr = _to_float(arr)
            arr, info = _OPS[step.kind](arr, stream, **step.params)
        if fired and counter is not None:
            counter.add(step.kind)
        if log is not None:
            log.append(StepRecord(slot, step.kind, gate, fired, info))
    return Image(_from_float(arr, out_dtype))
