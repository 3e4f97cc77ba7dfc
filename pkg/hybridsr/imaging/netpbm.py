"""Images as numpy arrays and binary Netpbm (PGM/PPM) files.

An image is a float64 array of shape (height, width, channels) with 1 or 3 channels and
values in [0, 1].
"""
import logging
import re

import numpy as np

from ..errors import DimensionMismatch, InputNotFound, ParseError

logger = logging.getLogger(__name__)

_MAGIC_CHANNELS = {b"P5": 1, b"P6": 3}
_CHANNELS_MAGIC = {v: k for k, v in _MAGIC_CHANNELS.items()}

# a header token or a comment up to the end of line
_HEADER_TOKEN = re.compile(rb"\s*(?:#[^\n]*\n\s*)*([^\s#]+)")


def as_image(pixels):
    """Coerce an array to an image.

    Two-dimensional arrays are treated as single-channel images.

    :param array_like pixels: Pixel values.
    :raise DimensionMismatch: Unsupported shape.
    :raise ParseError: Values outside of [0, 1].
    :return numpy.ndarray:
    """
    image = np.asarray(pixels, dtype=np.float64)
    if image.ndim == 2:
        image = image[:, :, np.newaxis]
    if image.ndim != 3 or image.shape[2] not in (1, 3) or 0 in image.shape:
        raise DimensionMismatch(f"Unsupported image shape {image.shape}.")
    if not np.all((image >= 0) & (image <= 1)):
        raise ParseError("Image values must be in [0, 1].")
    return image


def decode_image(data, name="<bytes>"):
    """Decode a binary PGM (P5) or PPM (P6) image.

    Header comments are skipped. Samples wider than 8 bits (maxval above 255) are big-endian.

    :param bytes data: File contents.
    :param str name: Name of the source for error messages.
    :raise ParseError: Malformed or unsupported file.
    :return numpy.ndarray:
    """
    tokens = []
    pos = 0
    while len(tokens) < 4:
        match = _HEADER_TOKEN.match(data, pos)
        if match is None:
            raise ParseError(f"Truncated Netpbm header in {name}.")
        tokens.append(match.group(1))
        pos = match.end()

    magic, *fields = tokens
    if magic not in _MAGIC_CHANNELS:
        raise ParseError(f"Unsupported Netpbm format {magic!r} in {name}, expected P5 or P6.")
    try:
        width, height, maxval = (int(f) for f in fields)
    except ValueError as exc:
        raise ParseError(f"Malformed Netpbm header in {name}: {exc}") from exc
    if width <= 0 or height <= 0 or not 0 < maxval <= 65535:
        raise ParseError(f"Invalid Netpbm header in {name}: {width}x{height}, maxval {maxval}.")
    if pos >= len(data) or not data[pos : pos + 1].isspace():  # noqa: E203
        raise ParseError(f"Missing raster in {name}.")
    # exactly one whitespace character separates the header from the raster
    pos += 1

    channels = _MAGIC_CHANNELS[magic]
    dtype = np.dtype(">u2") if maxval > 255 else np.dtype("u1")
    count = width * height * channels
    raster = data[pos : pos + count * dtype.itemsize]  # noqa: E203
    if len(raster) != count * dtype.itemsize:
        raise ParseError(
            f"Truncated raster in {name}: expected {count * dtype.itemsize} bytes, "
            f"got {len(raster)}."
        )
    samples = np.frombuffer(raster, dtype=dtype).astype(np.float64)
    if samples.max(initial=0) > maxval:
        raise ParseError(f"Sample values exceed maxval {maxval} in {name}.")
    return (samples / maxval).reshape(height, width, channels)


def encode_image(image):
    """Encode an image as 8-bit binary PGM or PPM.

    Values are quantized with rounding half up.

    :param array_like image: The image.
    :return bytes:
    """
    image = as_image(image)
    height, width, channels = image.shape
    samples = np.floor(image * 255 + 0.5).astype(np.uint8)
    header = b"%s\n%d %d\n255\n" % (_CHANNELS_MAGIC[channels], width, height)
    return header + samples.tobytes()


def read_image(path):
    """Read a binary PGM or PPM file.

    :param str|Path path: Path to the file.
    :raise InputNotFound: The file is missing or unreadable.
    :raise ParseError: Malformed file.
    :return numpy.ndarray:
    """
    try:
        with open(path, "rb") as f:
            data = f.read()
    except OSError as exc:
        raise InputNotFound(f"Could not read image {path}: {exc}") from exc
    image = decode_image(data, str(path))
    logger.debug("Read image %s: %s", path, image.shape)
    return image


def write_image(path, image):
    """Write an image as 8-bit binary PGM or PPM.

    :param str|Path path: Path to the file.
    :param array_like image: The image.
    """
    with open(path, "wb") as f:
        f.write(encode_image(image))
