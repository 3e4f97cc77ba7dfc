import numpy as np
import pytest

from hybridsr.errors import DimensionMismatch, IndivisibleResolution
from hybridsr.imaging import (
    grid_partition,
    mask_iou,
    patch_variance,
    rasterize_foreground,
    select_foreground,
)
from hybridsr.imaging.partitioner import binary_iou, grid_cells


def two_pass_variance(values):
    values = [float(v) for v in values]
    mean = sum(values) / len(values)
    return sum((v - mean) ** 2 for v in values) / len(values)


def test_grid_cells():
    cells = grid_cells(8, 4, 2)
    assert [(c.index, c.x, c.y, c.width, c.height) for c in cells] == [
        (0, 0, 0, 4, 2),
        (1, 4, 0, 4, 2),
        (2, 0, 2, 4, 2),
        (3, 4, 2, 4, 2),
    ]


@pytest.mark.parametrize("width, height, grid_side", ((10, 8, 4), (8, 10, 4), (8, 8, 0)))
def test_grid_cells_indivisible(width, height, grid_side):
    with pytest.raises(IndivisibleResolution):
        grid_cells(width, height, grid_side)


def test_grid_partition_tiles_exactly(rng):
    image = rng.random((16, 24, 3))
    patches = grid_partition(image, 4)
    assert len(patches) == 16
    assert all(p.shape == (4, 6, 3) for p in patches)
    rows = [np.concatenate(patches[r * 4 : r * 4 + 4], axis=1) for r in range(4)]  # noqa: E203
    np.testing.assert_array_equal(np.concatenate(rows, axis=0), image)


def test_grid_partition_views(rng):
    image = rng.random((8, 8, 1))
    (first, *_) = grid_partition(image, 2)
    assert np.shares_memory(first, image)


def test_patch_variance_matches_oracle(rng):
    for _ in range(20):
        patch = rng.random((4, 4, 3))
        assert patch_variance(patch) == pytest.approx(two_pass_variance(patch.ravel()), abs=1e-12)


def test_patch_variance_constant():
    assert patch_variance(np.full((4, 4, 1), 0.3)) == 0


def test_constant_image_ties():
    result = select_foreground(np.full((16, 16, 1), 0.5), 4, 0.25)
    assert result.foreground == {0, 1, 2, 3}
    assert result.background == set(range(4, 16))


def test_selects_highest_variance(rng):
    image = np.zeros((16, 16, 1))
    # noisy cells 5 and 10 of the 4x4 grid
    image[4:8, 4:8] = rng.random((4, 4, 1))
    image[8:12, 8:12] = rng.random((4, 4, 1))
    result = select_foreground(image, 4, 2 / 16)
    assert result.foreground == {5, 10}


@pytest.mark.parametrize("gamma", (0, 0.125, 0.25, 0.5, 0.75, 1))
def test_matches_sort_oracle(rng, gamma):
    for _ in range(200):
        # dyadic values keep variances exact, so ties are real ties
        image = rng.integers(0, 4, size=(16, 16, 1)) / 256
        result = select_foreground(image, 4, gamma)
        variances = [two_pass_variance(p.ravel()) for p in grid_partition(image, 4)]
        order = sorted(range(16), key=lambda i: (-variances[i], i))
        count = int(gamma * 16 + 0.5)
        assert result.foreground == set(order[:count])
        assert result.foreground | result.background == set(range(16))
        assert not result.foreground & result.background


def test_variance_shuffle_invariance(rng):
    image = rng.integers(0, 256, size=(16, 16, 1)) / 256
    result = select_foreground(image, 4, 0.25)
    shuffled = image.copy()
    for cell in grid_cells(16, 16, 4):
        patch = shuffled[cell.slices]
        flat = patch.reshape(-1, 1)
        shuffled[cell.slices] = rng.permutation(flat).reshape(patch.shape)
    other = select_foreground(shuffled, 4, 0.25)
    assert other.variances == result.variances
    assert other.foreground == result.foreground


def dyadic_image(rng):
    # dyadic values keep variances exact under offsets and small integer scales
    return rng.integers(0, 64, size=(16, 16, 1)) / 256


def test_constant_offset_invariance(rng):
    for _ in range(20):
        image = dyadic_image(rng)
        result = select_foreground(image, 4, 0.25)
        shifted = select_foreground(image + 0.25, 4, 0.25)
        assert shifted.variances == result.variances
        assert shifted.foreground == result.foreground


@pytest.mark.parametrize("scale", (0.5, 2, 3))
def test_scaling_invariance(rng, scale):
    for _ in range(20):
        image = dyadic_image(rng)
        result = select_foreground(image, 4, 0.25)
        scaled = select_foreground(image * scale, 4, 0.25)
        assert scaled.variances == pytest.approx([v * scale**2 for v in result.variances])
        assert scaled.foreground == result.foreground


def test_result_fields():
    result = select_foreground(np.zeros((8, 12)), 2, 0.5)
    assert (result.width, result.height, result.grid_side) == (12, 8, 2)
    assert float(result.gamma) == 0.5
    assert len(result.variances) == 4


def test_indivisible_image():
    with pytest.raises(IndivisibleResolution):
        select_foreground(np.zeros((10, 10, 1)), 4, 0.25)


def test_rasterize_foreground():
    result = select_foreground(np.full((8, 8, 1), 0.5), 2, 0.25)
    mask = rasterize_foreground(result)
    assert mask.dtype == bool
    assert mask[:4, :4].all()
    assert mask.sum() == 16


def test_rasterize_foreground_other_size():
    result = select_foreground(np.full((8, 8, 1), 0.5), 2, 0.5)
    mask = rasterize_foreground(result, 16, 4)
    assert mask.shape == (4, 16)
    assert mask[:2].all()
    assert not mask[2:].any()


def test_binary_iou():
    a = np.array([[True, True], [False, False]])
    b = np.array([[True, False], [True, False]])
    assert binary_iou(a, b) == pytest.approx(1 / 3)
    assert binary_iou(a, a) == 1
    assert binary_iou(np.zeros((2, 2), bool), np.zeros((2, 2), bool)) == 1


def test_mask_iou():
    result = select_foreground(np.full((8, 8, 1), 0.5), 2, 0.25)
    reference = np.zeros((8, 8))
    reference[:4, :8] = 0.5
    assert mask_iou(result, reference) == pytest.approx(0.5)
    # the threshold is inclusive
    assert mask_iou(result, reference, threshold=0.6) == 0
    assert mask_iou(result, reference[:, :, np.newaxis]) == pytest.approx(0.5)


def test_mask_iou_symmetric(rng):
    for _ in range(20):
        first = select_foreground(dyadic_image(rng), 4, rng.uniform())
        second = select_foreground(dyadic_image(rng), 4, rng.uniform())
        assert mask_iou(first, rasterize_foreground(second)) == mask_iou(
            second, rasterize_foreground(first)
        )


def test_mask_iou_mismatch():
    result = select_foreground(np.zeros((8, 8, 1)), 2, 0.25)
    with pytest.raises(DimensionMismatch):
        mask_iou(result, np.zeros((4, 8)))
    with pytest.raises(DimensionMismatch):
        mask_iou(result, np.zeros((8, 8, 3)))
