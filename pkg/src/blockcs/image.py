"""Grayscale image container with block-padding bookkeeping.

Images are H x W float64 arrays with values in [0, 1].  Acquisition pads
on the right/bottom with zeros so both dimensions become multiples of the
block size; the original dimensions are kept so reconstructions can be
cropped back.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError


@dataclass
class GrayImage:
    """A grayscale image plus its pre-padding dimensions.

    ``height``/``width`` record the original size; they equal the pixel
    array's shape unless the image has been padded.
    """

    pixels: np.ndarray
    height: int
    width: int

    def __post_init__(self):
        self.pixels = np.asarray(self.pixels, dtype=np.float64)
        if self.pixels.ndim != 2:
            raise DimensionError(f"expected 2-D pixel array, got shape {self.pixels.shape}")

    @classmethod
    def from_array(cls, pixels: np.ndarray) -> "GrayImage":
        pixels = np.asarray(pixels, dtype=np.float64)
        return cls(pixels, pixels.shape[0], pixels.shape[1])

    @property
    def shape(self) -> tuple[int, int]:
        return self.pixels.shape

    def padded_to(self, multiple: int) -> "GrayImage":
        """Zero-pad on the right/bottom so both dims divide ``multiple``."""
        h, w = self.pixels.shape
        ph = (-h) % multiple
        pw = (-w) % multiple
        if ph == 0 and pw == 0:
            return GrayImage(self.pixels, self.height, self.width)
        padded = np.pad(self.pixels, ((0, ph), (0, pw)))
        return GrayImage(padded, self.height, self.width)

    def cropped(self) -> "GrayImage":
        """Drop any padding, restoring the original dimensions."""
        px = self.pixels[: self.height, : self.width]
        return GrayImage(px, self.height, self.width)

    def clipped(self) -> "GrayImage":
        return GrayImage(np.clip(self.pixels, 0.0, 1.0), self.height, self.width)
