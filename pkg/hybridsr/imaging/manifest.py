"""Stitch manifests: documents listing patch images placed on a canvas."""
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np
from marshmallow import fields, validate

from ..errors import DimensionMismatch, ParseError, SimError
from ..schemas import DocumentSchema, attach_snippet
from .netpbm import read_image
from .stitcher import Placement, Side, feather_window

logger = logging.getLogger(__name__)

_SIDE_NAMES = {
    "left": Side.LEFT,
    "top": Side.TOP,
    "right": Side.RIGHT,
    "bottom": Side.BOTTOM,
}


@dataclass(frozen=True)
class FeatherSpec:
    """A weight window built with :func:`~hybridsr.imaging.stitcher.feather_window`."""

    band: int
    sides: Side


@dataclass(frozen=True)
class PlacementSpec:
    """A patch image file placed on the canvas."""

    image: str
    x: int
    y: int
    weights: Optional[str] = None
    feather: Optional[FeatherSpec] = None


@dataclass(frozen=True)
class Manifest:
    """Canvas size and the placed patches in accumulation order."""

    width: int
    height: int
    placements: tuple


class CanvasSchema(DocumentSchema):
    """Canvas of a manifest."""

    width = fields.Integer(required=True, validate=validate.Range(min=1))
    height = fields.Integer(required=True, validate=validate.Range(min=1))


class FeatherSchema(DocumentSchema):
    """Feather window of a placement."""

    band = fields.Integer(required=True, validate=validate.Range(min=0))
    sides = fields.List(fields.String(validate=validate.OneOf(list(_SIDE_NAMES))), required=True)

    def make_object(self, data):
        """Build the feather spec."""
        sides = Side.NONE
        for name in data["sides"]:
            sides |= _SIDE_NAMES[name]
        return FeatherSpec(data["band"], sides)


class PlacementSchema(DocumentSchema):
    """Placement of a manifest."""

    image = fields.String(required=True)
    x = fields.Integer(required=True)
    y = fields.Integer(required=True)
    weights = fields.String()
    feather = fields.Nested(FeatherSchema)

    def make_object(self, data):
        """Build the placement spec."""
        if "weights" in data and "feather" in data:
            raise ParseError("Fields 'weights' and 'feather' are mutually exclusive.")
        return PlacementSpec(**data)


class ManifestSchema(DocumentSchema):
    """Stitch manifest document."""

    canvas = fields.Nested(CanvasSchema, required=True)
    placements = fields.List(fields.Nested(PlacementSchema), required=True)

    def make_object(self, data):
        """Build the manifest."""
        canvas = data["canvas"]
        return Manifest(canvas["width"], canvas["height"], tuple(data["placements"]))


def load_manifest(path):
    """Load a stitch manifest document.

    :param str|Path path: Path to the document.
    :raise InputNotFound: The file is missing or unreadable.
    :raise ParseError: The document is invalid.
    :return Manifest:
    """
    return ManifestSchema().load_file(path)


def _weights(spec, patch, base_dir):
    height, width = patch.shape[:2]
    if spec.weights is not None:
        weights = read_image(base_dir / spec.weights)
        if weights.shape[2] != 1:
            raise DimensionMismatch(f"Weight window {spec.weights} must be a PGM image.")
        weights = weights[:, :, 0]
        if weights.shape != (height, width):
            raise DimensionMismatch(
                f"Weight window {spec.weights} is {weights.shape[1]}x{weights.shape[0]}, "
                f"patch {spec.image} is {width}x{height}."
            )
        return weights
    if spec.feather is not None:
        return feather_window(width, height, spec.feather.band, spec.feather.sides)
    return np.ones((height, width))


def build_placements(manifest, base_dir="."):
    """Read the patch images of a manifest.

    Relative paths are resolved against the base directory, usually the manifest's one.

    :param Manifest manifest: The manifest.
    :param str|Path base_dir: Base directory.
    :raise InputNotFound: A patch or weight image is missing.
    :return list[Placement]:
    """
    base_dir = Path(base_dir)
    placements = []
    for index, spec in enumerate(manifest.placements):
        try:
            patch = read_image(base_dir / spec.image)
            placements.append(
                Placement(patch, spec.x, spec.y, _weights(spec, patch, base_dir), index=index)
            )
        except SimError as exc:
            attach_snippet(exc, spec)
            raise
    logger.debug("Read %d placements", len(placements))
    return placements
