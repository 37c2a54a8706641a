"""Backend selection for the hot image kernels.

The compiled extension ``viewmix._ckernels`` is preferred; if it is missing
(not built) or ``VIEWMIX_PURE_PYTHON=1`` is set, the numpy fallback
``viewmix._kernels_py`` is used instead. ``BACKEND`` names the active one.
"""

import contextlib
import os
from types import ModuleType

from viewmix import _kernels_py
from viewmix.errors import ParameterError

__all__ = ["BACKEND", "get_backend", "available_backends", "impl", "use_backend"]

KERNEL_NAMES = (
    "resize_bilinear",
    "blur_separable",
    "blend_scalar",
    "blend_gray",
    "gray_mean",
    "grayscale",
    "adjust_hue",
    "to_float",
    "to_byte",
    "solarize",
    "flip_horizontal",
)

try:
    if os.environ.get("VIEWMIX_PURE_PYTHON", "") not in ("", "0"):
        raise ImportError("pure-python backend forced by VIEWMIX_PURE_PYTHON")
    from viewmix import _ckernels as impl
    BACKEND = "cython"
except ImportError:
    impl = _kernels_py
    BACKEND = "python"


def available_backends() -> list[str]:
    names = ["python"]
    try:
        from viewmix import _ckernels  # noqa: F401
    except ImportError:
        return names
    return ["cython"] + names


def get_backend(name: str) -> ModuleType:
    if name == "python":
        return _kernels_py
    if name == "cython":
        from viewmix import _ckernels
        return _ckernels
    raise ParameterError(f"unknown kernel backend {name!r}; expected cython or python")


@contextlib.contextmanager
def use_backend(name: str):
    """Temporarily route all kernel calls to backend ``name``.

    Swaps module state, so do not use it while other threads run kernels.
    """
    global impl, BACKEND
    saved = impl, BACKEND
    impl, BACKEND = get_backend(name), name
    try:
        yield impl
    finally:
        impl, BACKEND = saved
