import numpy as np
import pytest

from hybridsr.errors import DimensionMismatch, InputNotFound, ParseError
from hybridsr.imaging import as_image, decode_image, encode_image, read_image, write_image


def test_as_image_gray():
    image = as_image([[0, 0.5], [1, 0.25]])
    assert image.shape == (2, 2, 1)
    assert image.dtype == np.float64


@pytest.mark.parametrize("shape", ((4,), (2, 2, 2), (2, 2, 4), (0, 2), (1, 2, 3, 1)))
def test_as_image_shape(shape):
    with pytest.raises(DimensionMismatch):
        as_image(np.zeros(shape))


@pytest.mark.parametrize("value", (-0.1, 1.1, np.nan))
def test_as_image_range(value):
    with pytest.raises(ParseError):
        as_image([[value]])


def test_decode_pgm():
    image = decode_image(b"P5\n3 2\n255\n" + bytes([0, 51, 102, 153, 204, 255]))
    assert image.shape == (2, 3, 1)
    np.testing.assert_allclose(image[:, :, 0], [[0, 0.2, 0.4], [0.6, 0.8, 1.0]])


def test_decode_ppm():
    image = decode_image(b"P6 1 1 255 " + bytes([255, 0, 51]))
    assert image.shape == (1, 1, 3)
    np.testing.assert_allclose(image[0, 0], [1, 0, 0.2])


def test_decode_comments():
    data = b"P5\n# created by hand\n2 # width\n1\n# maxval\n255\n" + bytes([0, 255])
    np.testing.assert_allclose(decode_image(data)[:, :, 0], [[0, 1]])


def test_decode_16_bit():
    data = b"P5\n2 1\n65535\n" + bytes([0x00, 0x00, 0xFF, 0xFF])
    np.testing.assert_allclose(decode_image(data)[:, :, 0], [[0, 1]])


def test_decode_maxval():
    data = b"P5\n2 1\n15\n" + bytes([3, 15])
    np.testing.assert_allclose(decode_image(data)[:, :, 0], [[0.2, 1]])


@pytest.mark.parametrize(
    "data",
    (
        b"P2\n1 1\n255\n0",
        b"P5\n1 1\n",
        b"P5\n1 1\n255",
        b"P5\n2 2\n255\n" + bytes([0, 0, 0]),
        b"P5\nx 1\n255\n" + bytes([0]),
        b"P5\n0 1\n255\n",
        b"P5\n1 1\n70000\n" + bytes([0, 0]),
        b"P5\n1 1\n10\n" + bytes([11]),
    ),
)
def test_decode_malformed(data):
    with pytest.raises(ParseError):
        decode_image(data, "broken.pgm")


def test_encode_pgm():
    data = encode_image(np.array([[0.0, 1.0]]))
    assert data == b"P5\n2 1\n255\n" + bytes([0, 255])


def test_encode_rounds_half_up():
    data = encode_image(np.array([[0.5, 0.25, 0.75, 1.0]]))
    # 127.5 goes up, 63.75 and 191.25 to the nearest level
    assert data.endswith(bytes([128, 64, 191, 255]))


def test_encode_quantization_error(rng):
    image = rng.random((8, 8, 3))
    decoded = decode_image(encode_image(image))
    assert np.abs(decoded - image).max() <= 0.5 / 255 + 1e-12


def test_read_write(tmp_path, rng):
    path = tmp_path / "image.ppm"
    image = np.round(rng.random((4, 6, 3)) * 255) / 255
    write_image(path, image)
    np.testing.assert_allclose(read_image(path), image)


def test_read_missing(tmp_path):
    with pytest.raises(InputNotFound):
        read_image(tmp_path / "missing.pgm")
