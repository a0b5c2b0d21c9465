"""PGM (netpbm P2/P5) reading and writing.

Loading normalizes pixel values to [0, 1] by the header maxval (16-bit
samples are big-endian, per the format).  Saving always emits binary P5
with maxval 255, rounding half-up, so save -> load -> save is
byte-identical.  Malformed files raise ParseError with the byte offset.
"""

from __future__ import annotations

import numpy as np

from .errors import ParseError
from .image import GrayImage

__all__ = ["load_pgm", "save_pgm", "parse_pgm_bytes", "encode_pgm_bytes"]

_WHITESPACE = b" \t\r\n\x0b\x0c"


def _skip_space(data: bytes, pos: int) -> int:
    while pos < len(data):
        if data[pos] in _WHITESPACE:
            pos += 1
        elif data[pos] == ord("#"):
            while pos < len(data) and data[pos] not in b"\r\n":
                pos += 1
        else:
            break
    return pos


def _token(data: bytes, pos: int) -> tuple[bytes, int]:
    pos = _skip_space(data, pos)
    if pos >= len(data):
        raise ParseError("unexpected end of header", offset=pos)
    start = pos
    while pos < len(data) and data[pos] not in _WHITESPACE and data[pos] != ord("#"):
        pos += 1
    return data[start:pos], pos


def _int_token(data: bytes, pos: int, what: str) -> tuple[int, int]:
    tok, new_pos = _token(data, pos)
    try:
        return int(tok), new_pos
    except ValueError:
        raise ParseError(f"invalid {what} {tok!r}", offset=pos) from None


def parse_pgm_bytes(data: bytes) -> GrayImage:
    magic, pos = _token(data, 0)
    if magic not in (b"P2", b"P5"):
        raise ParseError(f"unsupported magic {magic!r} (need P2 or P5)", offset=0)
    width, pos = _int_token(data, pos, "width")
    height, pos = _int_token(data, pos, "height")
    maxval, pos = _int_token(data, pos, "maxval")
    if width < 1 or height < 1:
        raise ParseError(f"bad dimensions {width}x{height}", offset=pos)
    if not 1 <= maxval <= 65535:
        raise ParseError(f"maxval {maxval} outside [1, 65535]", offset=pos)

    count = width * height
    if magic == b"P5":
        if pos >= len(data):
            raise ParseError("missing raster separator", offset=pos)
        pos += 1  # exactly one whitespace byte after maxval
        bytes_per = 2 if maxval > 255 else 1
        need = count * bytes_per
        raster = data[pos : pos + need]
        if len(raster) != need:
            raise ParseError(
                f"raster has {len(raster)} bytes, expected {need}", offset=pos + len(raster)
            )
        dtype = ">u2" if bytes_per == 2 else np.uint8
        values = np.frombuffer(raster, dtype=dtype).astype(np.float64)
    else:
        values = np.empty(count)
        for i in range(count):
            v, pos = _int_token(data, pos, "sample")
            values[i] = v
    if values.max(initial=0) > maxval:
        raise ParseError(f"sample exceeds maxval {maxval}", offset=pos)
    pixels = values.reshape(height, width) / maxval
    return GrayImage.from_array(pixels)


def encode_pgm_bytes(img: GrayImage | np.ndarray) -> bytes:
    if isinstance(img, GrayImage):
        pixels = img.cropped().pixels
    else:
        pixels = np.asarray(img, dtype=np.float64)
    quant = np.floor(np.clip(pixels, 0.0, 1.0) * 255.0 + 0.5).astype(np.uint8)
    h, w = quant.shape
    return b"P5\n%d %d\n255\n" % (w, h) + quant.tobytes()


def load_pgm(path: str) -> GrayImage:
    with open(path, "rb") as fh:
        return parse_pgm_bytes(fh.read())


def save_pgm(img: GrayImage | np.ndarray, path: str) -> None:
    with open(path, "wb") as fh:
        fh.write(encode_pgm_bytes(img))
