"""Region-aware grid partitioning by spatial variance."""
import logging
from dataclasses import dataclass

import numpy as np

from ..domain import AllocationRatio, as_ratio
from ..errors import DimensionMismatch, IndivisibleResolution
from .netpbm import as_image

logger = logging.getLogger(__name__)

DEFAULT_GRID_SIDE = 4


@dataclass(frozen=True)
class Cell:
    """Rectangle of a grid cell in pixels."""

    index: int
    x: int
    y: int
    width: int
    height: int

    @property
    def slices(self):
        """Row and column slices of the cell."""
        return slice(self.y, self.y + self.height), slice(self.x, self.x + self.width)


def grid_cells(width, height, grid_side):
    """Split a canvas into equal cells in row-major order.

    :param int width: Canvas width.
    :param int height: Canvas height.
    :param int grid_side: Number of cells per side.
    :raise IndivisibleResolution: The canvas is not divisible by the grid side.
    :return list[Cell]:
    """
    if grid_side <= 0 or width % grid_side or height % grid_side:
        raise IndivisibleResolution(
            f"Image {width}x{height} is not divisible into a {grid_side}x{grid_side} grid."
        )
    cw, ch = width // grid_side, height // grid_side
    return [
        Cell(row * grid_side + col, col * cw, row * ch, cw, ch)
        for row in range(grid_side)
        for col in range(grid_side)
    ]


def grid_partition(image, grid_side):
    """Split an image into equal patches in row-major order.

    Patches are views of the image and tile it exactly.

    :param numpy.ndarray image: The image.
    :param int grid_side: Number of patches per side.
    :raise IndivisibleResolution: The image is not divisible by the grid side.
    :return list[numpy.ndarray]:
    """
    height, width = image.shape[:2]
    return [image[cell.slices] for cell in grid_cells(width, height, grid_side)]


def patch_variance(patch):
    """Population variance of the pixel values pooled over channels."""
    return float(np.var(patch))


@dataclass(frozen=True)
class PartitionResult:
    """Variances of the grid cells and their split into foreground and background."""

    grid_side: int
    width: int
    height: int
    variances: tuple
    foreground: frozenset
    background: frozenset
    gamma: AllocationRatio


def select_foreground(image, grid_side, gamma):
    """Route the highest-variance cells to the foreground.

    The foreground holds round-half-up(gamma * grid_side ** 2) cells. Among equal variances
    the lower cell index wins a foreground slot.

    :param numpy.ndarray image: The image.
    :param int grid_side: Number of cells per side.
    :param float|AllocationRatio gamma: Allocation ratio.
    :raise IndivisibleResolution: The image is not divisible by the grid side.
    :return PartitionResult:
    """
    image = as_image(image)
    gamma = as_ratio(gamma)
    height, width = image.shape[:2]
    variances = np.array([patch_variance(p) for p in grid_partition(image, grid_side)])
    order = np.argsort(-variances, kind="stable")
    count = gamma.patch_count(grid_side)
    foreground = frozenset(int(i) for i in order[:count])
    background = frozenset(int(i) for i in order[count:])
    logger.debug("Foreground cells %s", sorted(foreground))
    return PartitionResult(
        grid_side=grid_side,
        width=width,
        height=height,
        variances=tuple(float(v) for v in variances),
        foreground=foreground,
        background=background,
        gamma=gamma,
    )


def rasterize_foreground(result, width=None, height=None):
    """Build a binary mask of the foreground cells.

    :param PartitionResult result: Partitioning result.
    :param int width: Mask width, defaults to the partitioned image width.
    :param int height: Mask height, defaults to the partitioned image height.
    :return numpy.ndarray: Boolean array of shape (height, width).
    """
    width = result.width if width is None else width
    height = result.height if height is None else height
    mask = np.zeros((height, width), dtype=bool)
    for cell in grid_cells(width, height, result.grid_side):
        if cell.index in result.foreground:
            mask[cell.slices] = True
    return mask


def binary_iou(a, b):
    """Intersection over union of two binary masks, 1 when both are empty.

    :param numpy.ndarray a: First mask.
    :param numpy.ndarray b: Second mask.
    :raise DimensionMismatch: The masks have different shapes.
    :return float:
    """
    if a.shape != b.shape:
        raise DimensionMismatch(f"Mask shapes differ: {a.shape} and {b.shape}.")
    union = np.count_nonzero(a | b)
    if union == 0:
        return 1.0
    return np.count_nonzero(a & b) / union


def mask_iou(result, reference, threshold=0.5):
    """Compare the foreground with a reference mask.

    The reference is binarized as values greater than or equal to the threshold.

    :param PartitionResult result: Partitioning result.
    :param numpy.ndarray reference: Single-channel reference image.
    :param float threshold: Binarization threshold.
    :raise DimensionMismatch: The reference is not single-channel or has other dimensions.
    :return float:
    """
    reference = np.asarray(reference, dtype=np.float64)
    if reference.ndim == 3 and reference.shape[2] == 1:
        reference = reference[:, :, 0]
    if reference.ndim != 2:
        raise DimensionMismatch(f"Reference mask must be single-channel, got {reference.shape}.")
    if reference.shape != (result.height, result.width):
        raise DimensionMismatch(
            f"Reference mask is {reference.shape[1]}x{reference.shape[0]}, "
            f"partitioned image is {result.width}x{result.height}."
        )
    return binary_iou(rasterize_foreground(result), reference >= threshold)
