"""Rectangular mask geometry and the regional strategies.

``viewmix`` pastes the masked rectangle of a sibling view into a view of the
same image, ``cutmix`` does the same with a view of a different image and
``cutout`` fills the rectangle with a constant. All three are pure selection;
no pixel is ever blended.

Mask convention: ``M = 0`` inside the rectangle (replaced region) and ``1``
elsewhere, so ``out = M * a + (1 - M) * b``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from viewmix.errors import ParameterError, ShapeError
from viewmix.image import Image
from viewmix.rng import RngStream

__all__ = [
    "LAMBDA_MODES",
    "BBox",
    "Mask",
    "make_bbox",
    "sample_bbox",
    "viewmix",
    "cutout",
    "cutmix",
    "CutMixResult",
]

LAMBDA_MODES = ("linear", "area")


def _round(x: float) -> int:
    return int(math.floor(x + 0.5))


@dataclass(frozen=True)
class BBox:
    """Sampled box geometry plus its clipped, half-open pixel rectangle."""

    image_width: int
    image_height: int
    center_x: float
    center_y: float
    lam: float
    nominal_w: int
    nominal_h: int
    left: int
    top: int
    right: int
    bottom: int

    @property
    def area(self) -> int:
        return (self.right - self.left) * (self.bottom - self.top)

    @property
    def area_fraction(self) -> float:
        return self.area / (self.image_width * self.image_height)

    @property
    def rect(self) -> tuple[int, int, int, int]:
        return self.left, self.top, self.right, self.bottom

    def to_dict(self) -> dict:
        return {
            "center_x": self.center_x,
            "center_y": self.center_y,
            "lambda": self.lam,
            "nominal_w": self.nominal_w,
            "nominal_h": self.nominal_h,
            "left": self.left,
            "top": self.top,
            "right": self.right,
            "bottom": self.bottom,
        }


def _clip_axis(center: float, size: int, extent: int) -> tuple[int, int]:
    lo = _round(center - size / 2)
    hi = lo + size
    c_lo, c_hi = max(lo, 0), min(hi, extent)
    if c_hi <= c_lo:
        # box fell off the edge: keep the nearest single pixel row/column
        c_lo, c_hi = (extent - 1, extent) if lo >= extent else (0, 1)
    return c_lo, c_hi


def make_bbox(width: int, height: int, center_x: float, center_y: float, lam: float) -> BBox:
    """Build the box for a given centre and linear fraction ``lam``.

    Nominal size is ``(round(lam * W), round(lam * H))`` (at least one pixel);
    the box spans ``[round(cx - w/2), round(cx - w/2) + w)`` horizontally and
    likewise vertically, then is clipped to the image.
    """
    if width < 1 or height < 1:
        raise ParameterError(f"image size must be positive, got {width}x{height}")
    nw = max(1, _round(lam * width))
    nh = max(1, _round(lam * height))
    left, right = _clip_axis(center_x, nw, width)
    top, bottom = _clip_axis(center_y, nh, height)
    return BBox(width, height, float(center_x), float(center_y), float(lam), nw, nh,
                left, top, right, bottom)


def sample_bbox(width: int, height: int, r_min: float, r_max: float, rng: RngStream,
                lambda_mode: str = "linear") -> BBox:
    """Sample a box: centre uniform on ``[0, W] x [0, H]``, ``lam ~ U[r_min, r_max]``.

    With ``lambda_mode="area"`` the range bounds an area fraction ``a`` and
    ``lam = sqrt(a)``.
    """
    if not 0.0 < r_min <= r_max < 1.0:
        raise ParameterError(f"need 0 < r_min <= r_max < 1, got r_min={r_min}, r_max={r_max}")
    if lambda_mode not in LAMBDA_MODES:
        raise ParameterError(f"lambda_mode must be one of {LAMBDA_MODES}, got {lambda_mode!r}")
    cx = rng.uniform(0.0, width)
    cy = rng.uniform(0.0, height)
    lam = rng.uniform(r_min, r_max)
    if lambda_mode == "area":
        lam = math.sqrt(lam)
    return make_bbox(width, height, cx, cy, lam)


@dataclass(frozen=True)
class Mask:
    """Rectangle mask, rasterized on demand.

    Non-inverted: zero inside ``rect``. ``inverted`` flips that, which is what
    :meth:`complement` produces.
    """

    width: int
    height: int
    rect: tuple[int, int, int, int]
    inverted: bool = False

    @classmethod
    def from_bbox(cls, bbox: BBox) -> Mask:
        return cls(bbox.image_width, bbox.image_height, bbox.rect)

    @classmethod
    def ones(cls, width: int, height: int) -> Mask:
        return cls(width, height, (0, 0, 0, 0))

    @classmethod
    def zeros(cls, width: int, height: int) -> Mask:
        return cls(width, height, (0, 0, width, height))

    def complement(self) -> Mask:
        return Mask(self.width, self.height, self.rect, not self.inverted)

    def rasterize(self) -> np.ndarray:
        """``(H, W)`` uint8 array of mask values."""
        inside, outside = (1, 0) if self.inverted else (0, 1)
        m = np.full((self.height, self.width), outside, dtype=np.uint8)
        left, top, right, bottom = self.rect
        m[top:bottom, left:right] = inside
        return m


def _check_pair(a: Image, b: Image, what: str) -> None:
    if a.shape != b.shape or a.data.dtype != b.data.dtype:
        raise ShapeError(f"{what}: images differ ({a!r} vs {b!r})")


def _select(keep: np.ndarray, donor: np.ndarray, rect) -> np.ndarray:
    left, top, right, bottom = rect
    out = keep.copy()
    out[top:bottom, left:right] = donor[top:bottom, left:right]
    return out


def viewmix(view_a: Image, view_b: Image, mask: Mask) -> Image:
    """``mask * view_a + (1 - mask) * view_b`` as a pure pixel selection."""
    _check_pair(view_a, view_b, "viewmix")
    if (mask.width, mask.height) != (view_a.width, view_a.height):
        raise ShapeError(
            f"viewmix: mask is {mask.width}x{mask.height}, views are {view_a.width}x{view_a.height}"
        )
    if mask.inverted:
        return Image(_select(view_b.data, view_a.data, mask.rect))
    return Image(_select(view_a.data, view_b.data, mask.rect))


def _check_bbox(img: Image, bbox: BBox, what: str) -> None:
    if (bbox.image_width, bbox.image_height) != (img.width, img.height):
        raise ShapeError(
            f"{what}: box sampled for {bbox.image_width}x{bbox.image_height}, "
            f"image is {img.width}x{img.height}"
        )


def cutout(img: Image, bbox: BBox, fill=0) -> Image:
    """Fill the clipped box with a constant (in the image's sample units)."""
    _check_bbox(img, bbox, "cutout")
    out = img.data.copy()
    out[bbox.top:bbox.bottom, bbox.left:bbox.right] = fill
    return Image(out)


class CutMixResult(NamedTuple):
    image: Image
    area_ratio: float


def cutmix(img_a: Image, img_b: Image, bbox: BBox) -> CutMixResult:
    """Paste ``img_b``'s box region into ``img_a``.

    ``area_ratio`` is the replaced fraction of the image, the weight a
    supervised setup would give ``img_b``'s label.
    """
    _check_pair(img_a, img_b, "cutmix")
    _check_bbox(img_a, bbox, "cutmix")
    return CutMixResult(Image(_select(img_a.data, img_b.data, bbox.rect)), bbox.area_fraction)
