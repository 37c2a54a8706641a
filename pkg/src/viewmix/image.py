"""Pixel buffer types and depth conversion.

Images are stored interleaved, row-major, as numpy arrays of shape
``(height, width, channels)``. Two sample depths exist: ``uint8`` bytes in
[0, 255] and ``float32`` unit floats in [0, 1]. Arrays are frozen
(``writeable=False``) once wrapped, so an :class:`Image` can be shared across
threads without copying.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from viewmix.errors import ParameterError, ShapeError

__all__ = ["Depth", "Image", "LabeledImage", "Dataset", "convert_depth", "to_byte_array"]


class Depth(str, enum.Enum):
    BYTE = "u8"
    FLOAT = "f32"

    @property
    def dtype(self) -> np.dtype:
        return np.dtype(np.uint8) if self is Depth.BYTE else np.dtype(np.float32)

    @property
    def max_value(self) -> float:
        return 255 if self is Depth.BYTE else 1.0


@dataclass(frozen=True, eq=False)
class Image:
    data: np.ndarray

    def __post_init__(self):
        arr = self.data
        if arr.ndim == 2:
            arr = arr[:, :, None]
        if arr.ndim != 3:
            raise ShapeError(f"image data must be (H, W, C), got shape {arr.shape}")
        h, w, c = arr.shape
        if h < 1 or w < 1:
            raise ShapeError(f"image must be at least 1x1, got {w}x{h}")
        if c not in (1, 3):
            raise ShapeError(f"image must have 1 or 3 channels, got {c}")
        if arr.dtype not in (np.uint8, np.float32):
            raise ShapeError(f"unsupported sample dtype {arr.dtype}; use uint8 or float32")
        if not arr.flags.c_contiguous:
            arr = np.ascontiguousarray(arr)
        if arr.flags.writeable:
            if arr is self.data:
                arr = arr.view()
            arr.flags.writeable = False
        object.__setattr__(self, "data", arr)

    @classmethod
    def from_array(cls, arr, depth: Optional[Depth] = None) -> Image:
        """Validate and copy an arbitrary array-like into an Image.

        Unlike the bare constructor, this checks the sample range.
        """
        arr = np.array(arr, copy=True)
        if depth is not None:
            arr = arr.astype(Depth(depth).dtype)
        img = cls(arr)
        img.validate()
        return img

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def channels(self) -> int:
        return self.data.shape[2]

    @property
    def depth(self) -> Depth:
        return Depth.BYTE if self.data.dtype == np.uint8 else Depth.FLOAT

    @property
    def shape(self) -> tuple[int, int, int]:
        return self.data.shape

    def pixel(self, x: int, y: int) -> tuple:
        return tuple(self.data[y, x].tolist())

    def validate(self) -> None:
        if self.depth is Depth.FLOAT:
            if not np.all(np.isfinite(self.data)):
                raise ParameterError("unit-float image contains non-finite samples")
            lo, hi = float(self.data.min()), float(self.data.max())
            if lo < 0.0 or hi > 1.0:
                raise ParameterError(f"unit-float samples must lie in [0, 1], got [{lo}, {hi}]")

    def tobytes(self) -> bytes:
        return self.data.tobytes()

    def __eq__(self, other) -> bool:
        if not isinstance(other, Image):
            return NotImplemented
        return self.data.dtype == other.data.dtype and np.array_equal(self.data, other.data)

    __hash__ = None

    def __repr__(self) -> str:
        return f"Image({self.width}x{self.height}x{self.channels}, {self.depth.value})"


@dataclass(frozen=True)
class LabeledImage:
    image: Image
    label: Optional[int] = None


@dataclass
class Dataset:
    items: list[LabeledImage]
    source: str = ""
    fmt: str = ""

    def __post_init__(self):
        if not self.items:
            raise ParameterError("dataset must contain at least one image")
        shape = self.items[0].image.shape
        for i, item in enumerate(self.items):
            if item.image.shape != shape:
                raise ShapeError(
                    f"dataset item {i} has shape {item.image.shape}, expected {shape}"
                )

    def __len__(self) -> int:
        return len(self.items)

    def __getitem__(self, index: int) -> LabeledImage:
        return self.items[index]

    @property
    def image_shape(self) -> tuple[int, int, int]:
        return self.items[0].image.shape

    @classmethod
    def from_arrays(cls, images: np.ndarray, labels: Optional[Sequence[int]] = None,
                    source: str = "memory") -> Dataset:
        items = []
        for i in range(len(images)):
            label = None if labels is None else int(labels[i])
            items.append(LabeledImage(Image(np.array(images[i])), label))
        return cls(items, source=source, fmt="array")


def to_byte_array(data: np.ndarray) -> np.ndarray:
    """Unit float -> byte with round-half-up and clamping."""
    scaled = np.floor(data.astype(np.float64) * 255.0 + 0.5)
    return np.clip(scaled, 0, 255).astype(np.uint8)


def convert_depth(img: Image, target: Depth) -> Image:
    """Convert between byte and unit-float sample depth.

    byte -> float maps ``s / 255``; float -> byte maps ``round(s * 255)``
    with ties rounded up, then clamps. The byte -> float -> byte round trip is
    the identity on all 256 values.
    """
    target = Depth(target)
    if img.depth is target:
        return img
    if target is Depth.FLOAT:
        return Image((img.data.astype(np.float64) / 255.0).astype(np.float32))
    return Image(to_byte_array(img.data))
