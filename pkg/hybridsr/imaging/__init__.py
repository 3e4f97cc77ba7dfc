"""Pixel path: partitioning, stand-in enhancers and stitching of images."""
from .manifest import Manifest, ManifestSchema, build_placements, load_manifest
from .netpbm import as_image, decode_image, encode_image, read_image, write_image
from .partitioner import (
    DEFAULT_GRID_SIDE,
    PartitionResult,
    grid_partition,
    mask_iou,
    patch_variance,
    rasterize_foreground,
    select_foreground,
)
from .stitcher import (
    DEFAULT_OVERLAP,
    Mode,
    Placement,
    Side,
    extract_overlapping,
    feather_window,
    hybrid_enhance,
    stitch,
    upscale,
)

__all__ = (
    "DEFAULT_GRID_SIDE",
    "DEFAULT_OVERLAP",
    "Manifest",
    "ManifestSchema",
    "Mode",
    "PartitionResult",
    "Placement",
    "Side",
    "as_image",
    "build_placements",
    "decode_image",
    "encode_image",
    "extract_overlapping",
    "feather_window",
    "grid_partition",
    "hybrid_enhance",
    "load_manifest",
    "mask_iou",
    "patch_variance",
    "rasterize_foreground",
    "read_image",
    "select_foreground",
    "stitch",
    "upscale",
    "write_image",
)
