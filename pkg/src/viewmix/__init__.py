"""Deterministic multi-view image augmentation with regional view mixing.

The hot pixel kernels come from a compiled extension when it is built and
from a numpy implementation otherwise; see :mod:`viewmix.kernels`.
"""

from viewmix.errors import ConfigError, FormatError, ParameterError, ShapeError, ViewMixError
from viewmix.image import Dataset, Depth, Image, LabeledImage, convert_depth
from viewmix.io import export_batch, load_cifar10, load_dataset, load_image_folder, read_tensor
from viewmix.multiview import MultiViewConfig, ViewBatch, generate_batch, generate_views
from viewmix.regional import BBox, Mask, cutmix, cutout, sample_bbox, viewmix
from viewmix.rng import RngStream
from viewmix.transforms import PipelineSpec, TransformSpec, apply_pipeline, default_pipeline

__version__ = "0.1.0"

__all__ = [
    "BBox",
    "ConfigError",
    "Dataset",
    "Depth",
    "FormatError",
    "Image",
    "LabeledImage",
    "Mask",
    "MultiViewConfig",
    "ParameterError",
    "PipelineSpec",
    "RngStream",
    "ShapeError",
    "TransformSpec",
    "ViewBatch",
    "ViewMixError",
    "apply_pipeline",
    "convert_depth",
    "cutmix",
    "cutout",
    "default_pipeline",
    "export_batch",
    "generate_batch",
    "generate_views",
    "load_cifar10",
    "load_dataset",
    "load_image_folder",
    "read_tensor",
    "sample_bbox",
    "viewmix",
]
