"""Feathered overlap-add stitching and stand-in SR enhancers."""
import enum
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from ..domain import as_ratio
from ..errors import (
    DimensionMismatch,
    OverlapTooLarge,
    ParseError,
    PlacementOutOfBounds,
    UncoveredPixel,
)
from .netpbm import as_image
from .partitioner import grid_cells, select_foreground

logger = logging.getLogger(__name__)

DEFAULT_OVERLAP = 16


class Side(enum.Flag):
    """Sides of a patch shared with a neighbor."""

    NONE = 0
    LEFT = enum.auto()
    TOP = enum.auto()
    RIGHT = enum.auto()
    BOTTOM = enum.auto()


class Mode(enum.Enum):
    """Resampling mode of the stand-in enhancers."""

    # fast branch, stands for the learning-based SR on the device
    NEAREST = "nearest"
    # high-fidelity branch, stands for the diffusion-based SR on the edge
    BILINEAR = "bilinear"


def _ramp(length, band, leading, trailing):
    weights = np.ones(length)
    if band == 0 or not (leading or trailing):
        return weights
    if band > length:
        raise OverlapTooLarge(f"Band of {band} pixels does not fit into a patch side of {length}.")
    rise = np.arange(1, band + 1) / (band + 1)
    if leading:
        weights[:band] *= rise
    if trailing:
        weights[length - band :] *= 1 - rise  # noqa: E203
    return weights


def feather_window(patch_w, patch_h, overlap, sides):
    """Build the weight window of a patch.

    Weights are 1 in the interior and ramp linearly across each band of `overlap` pixels shared
    with a neighbor: leading sides rise as (i + 1) / (overlap + 1), trailing sides fall as
    1 - (i + 1) / (overlap + 1), so the ramps of two neighbors sum to 1.

    :param int patch_w: Patch width.
    :param int patch_h: Patch height.
    :param int overlap: Width of the shared band.
    :param Side sides: Sides shared with a neighbor.
    :raise OverlapTooLarge: The band is wider than the patch.
    :return numpy.ndarray: Weights of shape (patch_h, patch_w).
    """
    wx = _ramp(patch_w, overlap, Side.LEFT in sides, Side.RIGHT in sides)
    wy = _ramp(patch_h, overlap, Side.TOP in sides, Side.BOTTOM in sides)
    return np.outer(wy, wx)


@dataclass(frozen=True, eq=False)
class Placement:
    """A patch placed on a canvas with its weight window."""

    patch: np.ndarray
    x: int
    y: int
    weights: np.ndarray
    # grid cell the patch was extracted from
    index: int = 0
    sides: Side = Side.NONE

    def __post_init__(self):
        """Check the weight window dimensions."""
        if self.weights.shape != self.patch.shape[:2]:
            raise DimensionMismatch(
                f"Weight window {self.weights.shape} does not match patch {self.patch.shape[:2]}."
            )

    @property
    def width(self):
        """Patch width."""
        return self.patch.shape[1]

    @property
    def height(self):
        """Patch height."""
        return self.patch.shape[0]


def extract_overlapping(image, grid_side, overlap):
    """Split an image into grid patches expanded by an overlap on sides with a neighbor.

    Neighbors share a band of 2 * overlap pixels centered on the cell boundary.

    :param numpy.ndarray image: The image.
    :param int grid_side: Number of cells per side.
    :param int overlap: Expansion of each patch side with a neighbor, pixels.
    :raise IndivisibleResolution: The image is not divisible by the grid side.
    :raise OverlapTooLarge: Two bands of a patch would intersect.
    :return list[Placement]:
    """
    image = as_image(image)
    height, width = image.shape[:2]
    cells = grid_cells(width, height, grid_side)
    if overlap < 0:
        raise ParseError(f"Overlap must be nonnegative, got {overlap}.")
    if cells and 2 * overlap > min(cells[0].width, cells[0].height):
        raise OverlapTooLarge(
            f"Overlap {overlap} does not fit into {cells[0].width}x{cells[0].height} patches: "
            "twice the overlap must not exceed the patch side."
        )

    placements = []
    for cell in cells:
        row, col = divmod(cell.index, grid_side)
        sides = Side.NONE
        if col > 0:
            sides |= Side.LEFT
        if row > 0:
            sides |= Side.TOP
        if col < grid_side - 1:
            sides |= Side.RIGHT
        if row < grid_side - 1:
            sides |= Side.BOTTOM
        x0 = cell.x - (overlap if Side.LEFT in sides else 0)
        y0 = cell.y - (overlap if Side.TOP in sides else 0)
        x1 = cell.x + cell.width + (overlap if Side.RIGHT in sides else 0)
        y1 = cell.y + cell.height + (overlap if Side.BOTTOM in sides else 0)
        placements.append(
            Placement(
                patch=image[y0:y1, x0:x1],
                x=x0,
                y=y0,
                weights=feather_window(x1 - x0, y1 - y0, 2 * overlap, sides),
                index=cell.index,
                sides=sides,
            )
        )
    return placements


def stitch(placements, canvas_w, canvas_h):
    """Reconstruct an image by weighted overlap-add of placed patches.

    Every output pixel is the weighted mean of the patches covering it, clamped to [0, 1].
    Placements are accumulated sequentially in the given order.

    :param list[Placement] placements: Placed patches.
    :param int canvas_w: Canvas width.
    :param int canvas_h: Canvas height.
    :raise PlacementOutOfBounds: A placement does not fit into the canvas.
    :raise UncoveredPixel: Some pixel has zero total weight.
    :raise DimensionMismatch: Patches have different numbers of channels.
    :return numpy.ndarray:
    """
    channels = placements[0].patch.shape[2] if placements else 1
    numerator = np.zeros((canvas_h, canvas_w, channels))
    denominator = np.zeros((canvas_h, canvas_w))
    for p in placements:
        if p.x < 0 or p.y < 0 or p.x + p.width > canvas_w or p.y + p.height > canvas_h:
            raise PlacementOutOfBounds(
                f"Patch {p.width}x{p.height} at ({p.x}, {p.y}) "
                f"does not fit into {canvas_w}x{canvas_h} canvas."
            )
        if p.patch.shape[2] != channels:
            raise DimensionMismatch(
                f"Patch at ({p.x}, {p.y}) has {p.patch.shape[2]} channels, expected {channels}."
            )
        region = np.s_[p.y : p.y + p.height, p.x : p.x + p.width]  # noqa: E203
        numerator[region] += p.weights[:, :, np.newaxis] * p.patch
        denominator[region] += p.weights

    uncovered = np.argwhere(denominator <= 0)
    if len(uncovered):
        y, x = uncovered[0]
        raise UncoveredPixel(
            f"Pixel ({x}, {y}) is not covered by any patch ({len(uncovered)} uncovered pixels)."
        )
    return np.clip(numerator / denominator[:, :, np.newaxis], 0, 1)


def _bilinear_axis(length, scale):
    src = (np.arange(length * scale) + 0.5) / scale - 0.5
    src = np.clip(src, 0, length - 1)
    lo = np.floor(src).astype(int)
    hi = np.minimum(lo + 1, length - 1)
    return lo, hi, src - lo


def upscale(image, scale, mode=Mode.NEAREST):
    """Upscale an image by an integer factor.

    Nearest replicates pixels. Bilinear samples the source with clamped edges, mapping the
    center of output pixel i to (i + 0.5) / scale - 0.5.

    :param numpy.ndarray image: The image.
    :param int scale: Upscaling factor.
    :param Mode|str mode: Resampling mode.
    :return numpy.ndarray:
    """
    image = as_image(image)
    mode = Mode(mode)
    if scale < 1:
        raise ParseError(f"Scale must be at least 1, got {scale}.")
    if mode == Mode.NEAREST:
        return np.repeat(np.repeat(image, scale, axis=0), scale, axis=1)

    height, width = image.shape[:2]
    y0, y1, fy = _bilinear_axis(height, scale)
    x0, x1, fx = _bilinear_axis(width, scale)
    fx = fx[np.newaxis, :, np.newaxis]
    fy = fy[:, np.newaxis, np.newaxis]
    # a + f * (b - a) keeps constant regions exact
    top = image[y0][:, x0] + fx * (image[y0][:, x1] - image[y0][:, x0])
    bottom = image[y1][:, x0] + fx * (image[y1][:, x1] - image[y1][:, x0])
    return top + fy * (bottom - top)


def branch_modes(result):
    """Resampling mode of every grid cell: bilinear for the foreground, nearest otherwise.

    :param PartitionResult result: Partitioning result.
    :return list[Mode]:
    """
    return [
        Mode.BILINEAR if i in result.foreground else Mode.NEAREST
        for i in range(result.grid_side**2)
    ]


def _enhance_patch(image, placement, scale, mode, band):
    height, width = image.shape[:2]
    # one source pixel of context makes the patch resampling equal to the whole image one
    x0, y0 = max(placement.x - 1, 0), max(placement.y - 1, 0)
    x1 = min(placement.x + placement.width + 1, width)
    y1 = min(placement.y + placement.height + 1, height)
    upscaled = upscale(image[y0:y1, x0:x1], scale, mode)
    dx, dy = (placement.x - x0) * scale, (placement.y - y0) * scale
    w, h = placement.width * scale, placement.height * scale
    return Placement(
        patch=upscaled[dy : dy + h, dx : dx + w],  # noqa: E203
        x=placement.x * scale,
        y=placement.y * scale,
        weights=feather_window(w, h, band * scale, placement.sides),
        index=placement.index,
        sides=placement.sides,
    )


def hybrid_enhance(image, grid_side, gamma, scale, overlap=DEFAULT_OVERLAP, workers=1):
    """Upscale an image patch-wise, routing high-variance patches to the high-fidelity branch.

    :param numpy.ndarray image: The image.
    :param int grid_side: Number of cells per side.
    :param float|AllocationRatio gamma: Allocation ratio.
    :param int scale: Upscaling factor.
    :param int overlap: Patch expansion at the source resolution, pixels.
    :param int workers: Number of threads enhancing patches.
    :return numpy.ndarray: Image `scale` times larger.
    """
    image = as_image(image)
    height, width = image.shape[:2]
    result = select_foreground(image, grid_side, as_ratio(gamma))
    modes = branch_modes(result)
    placements = extract_overlapping(image, grid_side, overlap)

    def enhance(placement):
        return _enhance_patch(image, placement, scale, modes[placement.index], 2 * overlap)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            enhanced = list(executor.map(enhance, placements))
    else:
        enhanced = [enhance(p) for p in placements]
    return stitch(enhanced, width * scale, height * scale)
