import numpy as np
import pytest

from hybridsr.errors import (
    DimensionMismatch,
    OverlapTooLarge,
    ParseError,
    PlacementOutOfBounds,
    UncoveredPixel,
)
from hybridsr.imaging import (
    Mode,
    Placement,
    Side,
    extract_overlapping,
    feather_window,
    hybrid_enhance,
    select_foreground,
    stitch,
    upscale,
)
from hybridsr.imaging.partitioner import grid_cells
from hybridsr.imaging.stitcher import branch_modes


def weight_sum(placements, width, height):
    total = np.zeros((height, width))
    for p in placements:
        total[p.y : p.y + p.height, p.x : p.x + p.width] += p.weights  # noqa: E203
    return total


def random_combos(rng, count):
    for _ in range(count):
        grid_side = int(rng.integers(1, 5))
        cell = int(rng.integers(2, 9)) * 2
        overlap = int(rng.integers(0, cell // 2 + 1))
        channels = int(rng.choice([1, 3]))
        image = rng.random((grid_side * cell, grid_side * cell, channels))
        yield image, grid_side, overlap


def test_feather_window_without_band():
    np.testing.assert_array_equal(feather_window(4, 3, 0, Side.LEFT | Side.TOP), np.ones((3, 4)))


def test_feather_window_without_sides():
    np.testing.assert_array_equal(feather_window(4, 3, 2, Side.NONE), np.ones((3, 4)))


def test_feather_window_single_column():
    window = feather_window(3, 2, 1, Side.LEFT)
    np.testing.assert_allclose(window, [[0.5, 1, 1], [0.5, 1, 1]])


def test_feather_window_ramps():
    window = feather_window(6, 1, 3, Side.LEFT | Side.RIGHT)
    np.testing.assert_allclose(window[0], [0.25, 0.5, 0.75, 0.75, 0.5, 0.25])


def test_feather_window_complementary():
    leading = feather_window(4, 1, 4, Side.LEFT)
    trailing = feather_window(4, 1, 4, Side.RIGHT)
    np.testing.assert_allclose(leading + trailing, np.ones((1, 4)), atol=1e-12)


def test_feather_window_product():
    window = feather_window(4, 4, 2, Side.LEFT | Side.TOP)
    assert window[0, 0] == pytest.approx(1 / 9)
    assert window[3, 3] == 1


def test_feather_window_band_too_wide():
    with pytest.raises(OverlapTooLarge):
        feather_window(4, 4, 5, Side.LEFT)


def test_extract_without_overlap_is_grid(rng):
    image = rng.random((8, 12, 3))
    placements = extract_overlapping(image, 2, 0)
    for p, cell in zip(placements, grid_cells(12, 8, 2)):
        assert (p.x, p.y, p.width, p.height) == (cell.x, cell.y, cell.width, cell.height)
        np.testing.assert_array_equal(p.weights, np.ones((cell.height, cell.width)))
        np.testing.assert_array_equal(p.patch, image[cell.slices])


def test_extract_geometry():
    placements = extract_overlapping(np.zeros((16, 16, 1)), 2, 2)
    first, second, third, fourth = placements
    assert first.sides == Side.RIGHT | Side.BOTTOM
    assert fourth.sides == Side.LEFT | Side.TOP
    assert (first.x, first.y, first.width, first.height) == (0, 0, 10, 10)
    assert (second.x, second.y, second.width, second.height) == (6, 0, 10, 10)
    assert (third.x, third.y) == (0, 6)
    assert [p.index for p in placements] == [0, 1, 2, 3]


def test_extract_interior_patch():
    placements = extract_overlapping(np.zeros((12, 12, 1)), 3, 1)
    center = placements[4]
    assert center.sides == Side.LEFT | Side.TOP | Side.RIGHT | Side.BOTTOM
    assert (center.x, center.y, center.width, center.height) == (3, 3, 6, 6)


def test_extract_overlap_too_large():
    with pytest.raises(OverlapTooLarge):
        extract_overlapping(np.zeros((16, 16, 1)), 4, 3)
    assert extract_overlapping(np.zeros((16, 16, 1)), 4, 2)


def test_extract_negative_overlap():
    with pytest.raises(ParseError):
        extract_overlapping(np.zeros((16, 16, 1)), 4, -1)


def test_partition_of_unity(rng):
    for image, grid_side, overlap in random_combos(rng, 50):
        height, width = image.shape[:2]
        placements = extract_overlapping(image, grid_side, overlap)
        total = weight_sum(placements, width, height)
        assert np.abs(total - 1).max() <= 1e-12


def test_round_trip(rng):
    for image, grid_side, overlap in random_combos(rng, 50):
        height, width = image.shape[:2]
        restored = stitch(extract_overlapping(image, grid_side, overlap), width, height)
        assert np.abs(restored - image).max() <= 1e-9


def test_stitch_order_invariance(rng):
    image = rng.random((32, 32, 3))
    placements = extract_overlapping(image, 4, 3)
    forward = stitch(placements, 32, 32)
    backward = stitch(placements[::-1], 32, 32)
    shuffled = stitch([placements[i] for i in rng.permutation(len(placements))], 32, 32)
    assert np.abs(forward - backward).max() <= 1e-12
    assert np.abs(forward - shuffled).max() <= 1e-12


def test_stitch_weighted_mean():
    left = Placement(np.zeros((1, 2, 1)), 0, 0, np.array([[1.0, 1.0]]))
    right = Placement(np.ones((1, 2, 1)), 1, 0, np.array([[3.0, 1.0]]))
    np.testing.assert_allclose(stitch([left, right], 3, 1)[0, :, 0], [0, 0.75, 1])


def test_stitch_clamps():
    overshoot = Placement(np.full((1, 1, 1), 1.0), 0, 0, np.ones((1, 1)))
    assert stitch([overshoot], 1, 1)[0, 0, 0] == 1


def test_stitch_out_of_bounds():
    p = Placement(np.zeros((2, 2, 1)), 3, 0, np.ones((2, 2)))
    with pytest.raises(PlacementOutOfBounds):
        stitch([p], 4, 4)
    with pytest.raises(PlacementOutOfBounds):
        stitch([Placement(np.zeros((2, 2, 1)), -1, 0, np.ones((2, 2)))], 4, 4)


def test_stitch_uncovered_pixel():
    p = Placement(np.zeros((2, 2, 1)), 0, 0, np.ones((2, 2)))
    with pytest.raises(UncoveredPixel) as excinfo:
        stitch([p], 4, 2)
    assert "(2, 0)" in excinfo.value.message


def test_stitch_zero_weights():
    p = Placement(np.zeros((2, 2, 1)), 0, 0, np.zeros((2, 2)))
    with pytest.raises(UncoveredPixel):
        stitch([p], 2, 2)


def test_stitch_channel_mismatch():
    gray = Placement(np.zeros((2, 2, 1)), 0, 0, np.ones((2, 2)))
    color = Placement(np.zeros((2, 2, 3)), 0, 0, np.ones((2, 2)))
    with pytest.raises(DimensionMismatch):
        stitch([gray, color], 2, 2)


def test_placement_weights_shape():
    with pytest.raises(DimensionMismatch):
        Placement(np.zeros((2, 2, 1)), 0, 0, np.ones((2, 3)))


@pytest.mark.parametrize("mode", (Mode.NEAREST, Mode.BILINEAR))
def test_upscale_identity(rng, mode):
    image = rng.random((4, 5, 3))
    np.testing.assert_allclose(upscale(image, 1, mode), image)


def test_upscale_nearest():
    image = np.array([[0.0, 1.0]])
    np.testing.assert_array_equal(upscale(image, 2)[:, :, 0], [[0, 0, 1, 1], [0, 0, 1, 1]])


def test_upscale_bilinear():
    image = np.array([[0.0, 1.0]])
    np.testing.assert_allclose(upscale(image, 2, "bilinear")[0, :, 0], [0, 0.25, 0.75, 1])


@pytest.mark.parametrize("mode", (Mode.NEAREST, Mode.BILINEAR))
def test_upscale_constant(mode):
    image = np.full((3, 3, 3), 0.3)
    assert (upscale(image, 4, mode) == 0.3).all()


def test_upscale_invalid_scale():
    with pytest.raises(ParseError):
        upscale(np.zeros((2, 2)), 0)


def test_branch_modes():
    result = select_foreground(np.full((8, 8, 1), 0.5), 2, 0.5)
    assert branch_modes(result) == [Mode.BILINEAR, Mode.BILINEAR, Mode.NEAREST, Mode.NEAREST]


@pytest.mark.parametrize("scale", (1, 2, 4))
def test_hybrid_enhance_dimensions(rng, scale):
    image = rng.random((32, 32, 3))
    assert hybrid_enhance(image, 4, 0.25, scale, overlap=4).shape == (32 * scale, 32 * scale, 3)


@pytest.mark.parametrize("gamma, mode", ((0, Mode.NEAREST), (1, Mode.BILINEAR)))
def test_hybrid_enhance_single_branch(rng, gamma, mode):
    image = rng.random((32, 32, 3))
    enhanced = hybrid_enhance(image, 4, gamma, 2, overlap=4)
    assert np.abs(enhanced - upscale(image, 2, mode)).max() <= 1e-9


def test_hybrid_enhance_routes_cells(rng):
    image = rng.random((32, 32, 1))
    result = select_foreground(image, 4, 0.25)
    enhanced = hybrid_enhance(image, 4, 0.25, 2, overlap=0)
    nearest = upscale(image, 2, Mode.NEAREST)
    bilinear = upscale(image, 2, Mode.BILINEAR)
    for cell in grid_cells(64, 64, 4):
        expected = bilinear if cell.index in result.foreground else nearest
        assert np.abs(enhanced[cell.slices] - expected[cell.slices]).max() <= 1e-9


def test_hybrid_enhance_workers(rng):
    image = rng.random((32, 32, 3))
    single = hybrid_enhance(image, 4, 0.25, 2, overlap=4)
    threaded = hybrid_enhance(image, 4, 0.25, 2, overlap=4, workers=4)
    np.testing.assert_array_equal(single, threaded)
