"""Dataset ingestion and tensor export.

CIFAR-10 binary
    Consecutive 3073-byte records: one label byte followed by the red, green
    and blue planes, each 1024 bytes of a 32x32 row-major image.

Tensor container (``VMIXTENS1``)
    ::

        VMIXTENS1\\n
        dtype=<u8|f32> shape=<d0,d1,...>\\n
        <payload: little-endian samples in C order>

    The two header lines are ASCII (a subset of UTF-8). The payload length is
    exactly ``prod(shape) * itemsize``. Nothing else is written, so identical
    inputs produce identical files on every platform.
"""

from __future__ import annotations

import os
from pathlib import Path
from typing import Iterable, Optional, Sequence, Union

import numpy as np

from viewmix.errors import FormatError, ParameterError, ShapeError
from viewmix.image import Dataset, Image, LabeledImage

__all__ = [
    "CIFAR_RECORD_BYTES",
    "load_cifar10",
    "decode_cifar10",
    "encode_cifar10",
    "load_image_folder",
    "load_dataset",
    "export_batch",
    "write_tensor",
    "read_tensor",
    "TENSOR_MAGIC",
    "synthetic_images",
    "synthetic_dataset",
    "synthetic_cifar10_bytes",
]

CIFAR_RECORD_BYTES = 3073
CIFAR_NUM_CLASSES = 10
TENSOR_MAGIC = b"VMIXTENS1"
IMAGE_SUFFIXES = (".png", ".jpg", ".jpeg")

_DTYPES = {"u8": np.dtype("<u1"), "f32": np.dtype("<f4")}

PathLike = Union[str, os.PathLike]


def decode_cifar10(raw: bytes, source: str = "<bytes>") -> Dataset:
    n_bytes = len(raw)
    if n_bytes == 0:
        raise FormatError(f"{source}: empty CIFAR-10 file")
    tail = n_bytes % CIFAR_RECORD_BYTES
    if tail:
        offset = n_bytes - tail
        raise FormatError(
            f"{source}: truncated CIFAR-10 record at byte offset {offset} "
            f"({tail} of {CIFAR_RECORD_BYTES} bytes present)"
        )
    records = np.frombuffer(raw, dtype=np.uint8).reshape(-1, CIFAR_RECORD_BYTES)
    labels = records[:, 0]
    bad = np.flatnonzero(labels >= CIFAR_NUM_CLASSES)
    if bad.size:
        index = int(bad[0])
        raise FormatError(
            f"{source}: label byte {int(labels[index])} > 9 at byte offset "
            f"{index * CIFAR_RECORD_BYTES} (record {index})"
        )
    pixels = records[:, 1:].reshape(-1, 3, 32, 32).transpose(0, 2, 3, 1)
    pixels = np.ascontiguousarray(pixels)
    items = [LabeledImage(Image(pixels[i]), int(labels[i])) for i in range(len(records))]
    return Dataset(items, source=source, fmt="cifar10")


def load_cifar10(path: PathLike) -> Dataset:
    """Read one CIFAR-10 binary batch file into interleaved 32x32x3 images."""
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"CIFAR-10 file not found: {path}")
    return decode_cifar10(path.read_bytes(), source=str(path))


def encode_cifar10(dataset: Dataset) -> bytes:
    """Inverse of :func:`decode_cifar10` (planar records, label first)."""
    out = bytearray()
    for i, item in enumerate(dataset.items):
        img = item.image
        if img.shape != (32, 32, 3) or img.data.dtype != np.uint8:
            raise ShapeError(f"item {i}: CIFAR-10 records hold 32x32x3 byte images, got {img!r}")
        if item.label is None or not 0 <= item.label < CIFAR_NUM_CLASSES:
            raise FormatError(f"item {i}: label {item.label!r} is not a CIFAR-10 class")
        out.append(item.label)
        out += img.data.transpose(2, 0, 1).tobytes()
    return bytes(out)


def load_image_folder(path: PathLike, resize: Optional[Sequence[int]] = None) -> Dataset:
    """Decode every PNG/JPEG in ``path`` (lexicographic order) to RGB bytes.

    ``resize`` is an optional ``(width, height)`` target applied with bilinear
    resampling; without it every file must already share one size.
    """
    from PIL import Image as PILImage
    from PIL import UnidentifiedImageError

    path = Path(path)
    if not path.is_dir():
        raise FileNotFoundError(f"image folder not found: {path}")
    files = sorted(p for p in path.iterdir() if p.is_file() and p.suffix.lower() in IMAGE_SUFFIXES)
    if not files:
        raise FormatError(f"{path}: no PNG/JPEG files found")
    if resize is not None:
        resize = (int(resize[0]), int(resize[1]))
        if min(resize) < 1:
            raise ParameterError(f"resize target must be positive, got {resize}")

    items = []
    for f in files:
        try:
            with PILImage.open(f) as pil:
                pil = pil.convert("RGB")
                if resize is not None and pil.size != resize:
                    pil = pil.resize(resize, PILImage.BILINEAR)
                arr = np.asarray(pil, dtype=np.uint8).copy()
        except (UnidentifiedImageError, OSError, SyntaxError) as exc:
            raise FormatError(f"cannot decode image file {f.name}: {exc}") from exc
        items.append(LabeledImage(Image(arr), None))

    sizes = {it.image.shape for it in items}
    if len(sizes) > 1:
        raise ShapeError(
            f"{path}: images have mixed sizes {sorted(sizes)}; pass a resize target"
        )
    return Dataset(items, source=str(path), fmt="folder")


def load_dataset(path: PathLike, fmt: str = "auto", resize: Optional[Sequence[int]] = None) -> Dataset:
    path = Path(path)
    if fmt == "auto":
        fmt = "folder" if path.is_dir() else "cifar10"
    if fmt == "cifar10":
        return load_cifar10(path)
    if fmt == "folder":
        return load_image_folder(path, resize=resize)
    raise ParameterError(f"unknown dataset format {fmt!r}; expected cifar10 or folder")


def _header(dtype_name: str, shape: Sequence[int]) -> bytes:
    dims = ",".join(str(int(d)) for d in shape)
    return TENSOR_MAGIC + b"\n" + f"dtype={dtype_name} shape={dims}\n".encode("utf-8")


def write_tensor(array: np.ndarray, path: PathLike) -> None:
    array = np.asarray(array)
    if array.dtype == np.uint8:
        name = "u8"
    elif array.dtype == np.float32:
        name = "f32"
    else:
        raise ParameterError(f"tensor container supports uint8 and float32, got {array.dtype}")
    payload = np.ascontiguousarray(array, dtype=_DTYPES[name]).tobytes()
    with open(path, "wb") as fh:
        fh.write(_header(name, array.shape))
        fh.write(payload)


def read_tensor(path: PathLike) -> np.ndarray:
    with open(path, "rb") as fh:
        magic = fh.readline()
        if magic != TENSOR_MAGIC + b"\n":
            raise FormatError(f"{path}: missing VMIXTENS1 magic")
        header = fh.readline().decode("utf-8").strip()
        payload = fh.read()
    parts = [p.split("=", 1) for p in header.split()]
    fields = dict(p for p in parts if len(p) == 2)
    if len(fields) != len(parts) or set(fields) != {"dtype", "shape"} or fields["dtype"] not in _DTYPES:
        raise FormatError(f"{path}: malformed tensor header {header!r}")
    try:
        shape = tuple(int(d) for d in fields["shape"].split(",")) if fields["shape"] else ()
    except ValueError:
        raise FormatError(f"{path}: malformed tensor shape {fields['shape']!r}") from None
    dtype = _DTYPES[fields["dtype"]]
    expected = int(np.prod(shape)) * dtype.itemsize
    if len(payload) != expected:
        raise FormatError(f"{path}: payload is {len(payload)} bytes, header implies {expected}")
    return np.frombuffer(payload, dtype=dtype).reshape(shape)


LAYOUTS = ("nvhwc", "nvchw")


def export_batch(batches: Iterable, path: PathLike, layout: str = "nvhwc") -> tuple[int, ...]:
    """Write view batches as one ``(images, views, H, W, C)`` tensor.

    ``layout="nvchw"`` moves channels ahead of the spatial axes. All shape
    checks run before the file is opened. Returns the written shape.
    """
    batches = list(batches)
    if not batches:
        raise ShapeError("export_batch needs at least one view batch")
    if layout not in LAYOUTS:
        raise ParameterError(f"unknown export layout {layout!r}; expected one of {LAYOUTS}")
    first = batches[0].views[0]
    ref_shape, ref_dtype = first.shape, first.data.dtype
    n_views = len(batches[0].views)
    for b in batches:
        if len(b.views) != n_views:
            raise ShapeError(
                f"image {b.source_index}: {len(b.views)} views, expected {n_views}"
            )
        for v, view in enumerate(b.views):
            if view.shape != ref_shape or view.data.dtype != ref_dtype:
                raise ShapeError(
                    f"image {b.source_index} view {v}: {view!r} does not match "
                    f"{ref_shape} {ref_dtype}"
                )
    stacked = np.stack([np.stack([v.data for v in b.views]) for b in batches])
    if layout == "nvchw":
        stacked = stacked.transpose(0, 1, 4, 2, 3)
    write_tensor(stacked, path)
    return stacked.shape


def synthetic_images(count: int, size: int, seed: int = 0) -> np.ndarray:
    """Deterministic ``(count, size, size, 3)`` byte images with smooth structure.

    Coarse random colour fields upsampled and mixed with fine noise, so crops,
    blur and jitter all do non-trivial work. Used where no real data is on hand.
    """
    rng = np.random.default_rng(seed)
    coarse = max(2, size // 8)
    base = rng.random((count, coarse, coarse, 3))
    reps = -(-size // coarse)
    field = np.repeat(np.repeat(base, reps, axis=1), reps, axis=2)[:, :size, :size]
    noise = rng.random((count, size, size, 3))
    return np.clip(np.floor((0.8 * field + 0.2 * noise) * 255.0 + 0.5), 0, 255).astype(np.uint8)


def synthetic_dataset(count: int, size: int, seed: int = 0) -> Dataset:
    images = synthetic_images(count, size, seed)
    labels = np.random.default_rng(seed + 1).integers(0, CIFAR_NUM_CLASSES, count)
    ds = Dataset.from_arrays(images, labels, source=f"synthetic:{count}x{size}:{seed}")
    ds.fmt = "synthetic"
    return ds


def synthetic_cifar10_bytes(count: int, seed: int = 0) -> bytes:
    """A CIFAR-10 binary batch (``count`` records) with synthetic content."""
    return encode_cifar10(synthetic_dataset(count, 32, seed))
