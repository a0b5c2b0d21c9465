"""Sensing-matrix constructions and block-based image acquisition.

A block sensing matrix maps a vectorized A x A image block (raster order)
to its measurements.  Acquisition of a whole image can equivalently be run
three ways: per-block matrix products, one product with the block-diagonal
expansion, or a stride-A convolution whose filters are the matrix rows;
all three agree to floating-point reordering error.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, ParseError
from .image import GrayImage
from .nn import ConvParams, conv2d

__all__ = [
    "SensingMatrix",
    "MeasurementSet",
    "rows_for_rate",
    "make_gaussian",
    "make_bernoulli",
    "make_chebyshev",
    "block_partition",
    "blocks_to_image",
    "acquire_block",
    "acquire_blocks",
    "expand_block_diagonal",
    "acquire_image",
    "acquire_image_conv",
    "matrix_to_filters",
    "filters_to_matrix",
    "save_matrix",
    "load_matrix",
    "save_measurements",
    "load_measurements",
]

KIND_CODES = {"gaussian": 0, "bernoulli": 1, "chebyshev": 2, "learned": 3}
_CODE_KINDS = {v: k for k, v in KIND_CODES.items()}

MATRIX_MAGIC = b"BCSM"
MEASUREMENT_MAGIC = b"BCSY"
FORMAT_VERSION = 1


@dataclass
class SensingMatrix:
    """Dense rows x A^2 block sensing operator."""

    entries: np.ndarray
    block_size: int
    kind: str

    def __post_init__(self):
        self.entries = np.asarray(self.entries, dtype=np.float64)
        a2 = self.block_size**2
        if self.entries.ndim != 2 or self.entries.shape[1] != a2:
            raise DimensionError(
                f"entries shape {self.entries.shape} inconsistent with block size {self.block_size}"
            )
        if not 1 <= self.entries.shape[0] <= a2:
            raise DimensionError(f"row count {self.entries.shape[0]} outside [1, {a2}]")
        if self.kind not in KIND_CODES:
            raise ValueError(f"unknown matrix kind {self.kind!r}")

    @property
    def rows(self) -> int:
        return self.entries.shape[0]

    @property
    def rate(self) -> float:
        return self.rows / self.block_size**2


@dataclass
class MeasurementSet:
    """Per-block measurement vectors on an r x c block grid (row-major)."""

    vectors: np.ndarray  # (r*c, m_a)
    grid_rows: int
    grid_cols: int
    block_size: int

    def __post_init__(self):
        self.vectors = np.asarray(self.vectors, dtype=np.float64)
        if self.vectors.ndim != 2:
            raise DimensionError(f"vectors must be 2-D, got shape {self.vectors.shape}")
        if self.vectors.shape[0] != self.grid_rows * self.grid_cols:
            raise DimensionError(
                f"{self.vectors.shape[0]} blocks != grid {self.grid_rows}x{self.grid_cols}"
            )

    @property
    def measurements_per_block(self) -> int:
        return self.vectors.shape[1]

    @property
    def rate(self) -> float:
        return self.measurements_per_block / self.block_size**2

    def as_grid(self) -> np.ndarray:
        """Channel-first view: (m_a, r, c)."""
        r, c = self.grid_rows, self.grid_cols
        return self.vectors.reshape(r, c, -1).transpose(2, 0, 1)


def rows_for_rate(rate: float, block_size: int) -> int:
    """Measurements per block at a sampling rate: floor(rate * A^2), at least 1."""
    if not 0.0 < rate <= 1.0:
        raise ValueError(f"sampling rate must be in (0, 1], got {rate}")
    if block_size < 1:
        raise ValueError(f"block size must be >= 1, got {block_size}")
    return max(1, int(np.floor(rate * block_size**2)))


def make_gaussian(rows: int, block_size: int, seed: int) -> SensingMatrix:
    """I.i.d. N(0, 1/rows) entries, so columns have unit energy in expectation."""
    rng = np.random.default_rng(seed)
    entries = rng.normal(0.0, 1.0 / np.sqrt(rows), size=(rows, block_size**2))
    return SensingMatrix(entries, block_size, "gaussian")


def make_bernoulli(rows: int, block_size: int, seed: int) -> SensingMatrix:
    """Equiprobable +/- 1/sqrt(rows) entries (exactly unit-norm columns)."""
    rng = np.random.default_rng(seed)
    signs = rng.integers(0, 2, size=(rows, block_size**2)) * 2 - 1
    return SensingMatrix(signs / np.sqrt(rows), block_size, "bernoulli")


def make_chebyshev(
    rows: int,
    block_size: int,
    seed: int,
    degree: int = 4,
    gap: int = 5,
) -> SensingMatrix:
    """Binarized Chebyshev chaotic sequence, +/- 1/sqrt(rows) entries.

    Iterates x <- cos(degree * arccos(x)) from a seeded start in (-1, 1),
    keeps every ``gap``-th iterate, and takes signs.
    """
    rng = np.random.default_rng(seed)
    x = float(rng.uniform(-0.99, 0.99))
    n = rows * block_size**2
    vals = np.empty(n)
    cos, acos = math.cos, math.acos
    for i in range(n):
        for _ in range(gap):
            x = cos(degree * acos(min(1.0, max(-1.0, x))))
        vals[i] = x
    signs = np.where(vals >= 0.0, 1.0, -1.0)
    entries = (signs / np.sqrt(rows)).reshape(rows, block_size**2)
    return SensingMatrix(entries, block_size, "chebyshev")


def block_partition(img: GrayImage | np.ndarray, block_size: int) -> tuple[np.ndarray, int, int]:
    """Split an image into vectorized non-overlapping blocks.

    Pads on the right/bottom with zeros to multiples of ``block_size``.
    Returns (blocks, grid_rows, grid_cols) with blocks (r*c, A^2), each
    block raster-scanned, blocks ordered row-major over the grid.
    """
    if not isinstance(img, GrayImage):
        img = GrayImage.from_array(img)
    padded = img.padded_to(block_size).pixels
    h, w = padded.shape
    r, c = h // block_size, w // block_size
    blocks = (
        padded.reshape(r, block_size, c, block_size)
        .transpose(0, 2, 1, 3)
        .reshape(r * c, block_size**2)
    )
    return blocks, r, c


def blocks_to_image(blocks: np.ndarray, grid_rows: int, grid_cols: int, block_size: int) -> np.ndarray:
    """Inverse of block_partition (returns the padded-size pixel array)."""
    blocks = np.asarray(blocks, dtype=np.float64)
    if blocks.shape[0] != grid_rows * grid_cols:
        raise DimensionError(f"{blocks.shape[0]} blocks != grid {grid_rows}x{grid_cols}")
    return (
        blocks.reshape(grid_rows, grid_cols, block_size, block_size)
        .transpose(0, 2, 1, 3)
        .reshape(grid_rows * block_size, grid_cols * block_size)
    )


def acquire_block(matrix: SensingMatrix, block: np.ndarray) -> np.ndarray:
    block = np.asarray(block, dtype=np.float64)
    if block.shape != (matrix.block_size**2,):
        raise DimensionError(
            f"block length {block.shape} != expected ({matrix.block_size ** 2},)"
        )
    return matrix.entries @ block


def acquire_blocks(matrix: SensingMatrix, blocks: np.ndarray) -> np.ndarray:
    """Measure a stack of vectorized blocks: (n_blocks, A^2) -> (n_blocks, m_a)."""
    blocks = np.asarray(blocks, dtype=np.float64)
    if blocks.ndim != 2 or blocks.shape[1] != matrix.block_size**2:
        raise DimensionError(f"blocks shape {blocks.shape} incompatible with matrix")
    return blocks @ matrix.entries.T


def expand_block_diagonal(matrix: SensingMatrix, n_blocks: int) -> np.ndarray:
    """Full (n_blocks*m_a) x (n_blocks*A^2) block-diagonal sensing operator."""
    if n_blocks < 1:
        raise ValueError("n_blocks must be >= 1")
    return np.kron(np.eye(n_blocks), matrix.entries)


def matrix_to_filters(matrix: SensingMatrix) -> ConvParams:
    """Reshape matrix rows into (m_a, 1, A, A) stride-A conv filters, no bias."""
    a = matrix.block_size
    return ConvParams(matrix.entries.reshape(matrix.rows, 1, a, a))


def filters_to_matrix(filters: ConvParams, kind: str = "learned") -> SensingMatrix:
    w = filters.weight
    if w.shape[1] != 1 or w.shape[2] != w.shape[3]:
        raise DimensionError(f"expected (m_a, 1, A, A) filters, got {w.shape}")
    return SensingMatrix(w.reshape(w.shape[0], -1), w.shape[2], kind)


def acquire_image(matrix: SensingMatrix, img: GrayImage | np.ndarray) -> MeasurementSet:
    """Acquisition via per-block matrix products."""
    blocks, r, c = block_partition(img, matrix.block_size)
    return MeasurementSet(acquire_blocks(matrix, blocks), r, c, matrix.block_size)


def acquire_image_conv(matrix: SensingMatrix, img: GrayImage | np.ndarray) -> MeasurementSet:
    """Acquisition via a stride-A convolution with the matrix rows as filters."""
    if not isinstance(img, GrayImage):
        img = GrayImage.from_array(img)
    a = matrix.block_size
    padded = img.padded_to(a).pixels
    x = padded[None, None, :, :]
    y = conv2d(x, matrix_to_filters(matrix), stride=a, pad=0)  # (1, m_a, r, c)
    _, m_a, r, c = y.shape
    vectors = y[0].transpose(1, 2, 0).reshape(r * c, m_a)
    return MeasurementSet(vectors, r, c, a)


# ---------------------------------------------------------------------------
# binary file formats (little-endian)


def save_matrix(matrix: SensingMatrix, path: str) -> None:
    """BCSM file: magic, version u32, m_a u32, A u32, kind u8, f64 row-major."""
    with open(path, "wb") as fh:
        fh.write(MATRIX_MAGIC)
        fh.write(struct.pack("<III", FORMAT_VERSION, matrix.rows, matrix.block_size))
        fh.write(struct.pack("<B", KIND_CODES[matrix.kind]))
        fh.write(np.ascontiguousarray(matrix.entries, dtype="<f8").tobytes())


def load_matrix(path: str) -> SensingMatrix:
    with open(path, "rb") as fh:
        data = fh.read()
    if data[:4] != MATRIX_MAGIC:
        raise ParseError(f"bad sensing-matrix magic in {path!r}", offset=0)
    if len(data) < 17:
        raise ParseError(f"truncated sensing-matrix header in {path!r}", offset=len(data))
    version, rows, block = struct.unpack_from("<III", data, 4)
    if version != FORMAT_VERSION:
        raise ParseError(f"unsupported sensing-matrix version {version}", offset=4)
    (kind_code,) = struct.unpack_from("<B", data, 16)
    if kind_code not in _CODE_KINDS:
        raise ParseError(f"unknown matrix kind code {kind_code}", offset=16)
    need = rows * block**2 * 8
    payload = data[17:]
    if len(payload) != need:
        raise ParseError(
            f"sensing-matrix payload is {len(payload)} bytes, expected {need}", offset=17
        )
    entries = np.frombuffer(payload, dtype="<f8").reshape(rows, block**2).astype(np.float64)
    return SensingMatrix(entries, block, _CODE_KINDS[kind_code])


def save_measurements(mset: MeasurementSet, path: str) -> None:
    """BCSY file: magic, version u32, rate f64, A u32, r u32, c u32, m_a u32,
    then f64 vectors block-major (block 0 fully, then block 1, ...)."""
    with open(path, "wb") as fh:
        fh.write(MEASUREMENT_MAGIC)
        fh.write(struct.pack("<I", FORMAT_VERSION))
        fh.write(struct.pack("<d", mset.rate))
        fh.write(
            struct.pack(
                "<IIII",
                mset.block_size,
                mset.grid_rows,
                mset.grid_cols,
                mset.measurements_per_block,
            )
        )
        fh.write(np.ascontiguousarray(mset.vectors, dtype="<f8").tobytes())


def load_measurements(path: str) -> MeasurementSet:
    with open(path, "rb") as fh:
        data = fh.read()
    if data[:4] != MEASUREMENT_MAGIC:
        raise ParseError(f"bad measurement magic in {path!r}", offset=0)
    if len(data) < 32:
        raise ParseError(f"truncated measurement header in {path!r}", offset=len(data))
    (version,) = struct.unpack_from("<I", data, 4)
    if version != FORMAT_VERSION:
        raise ParseError(f"unsupported measurement version {version}", offset=4)
    block, r, c, m_a = struct.unpack_from("<IIII", data, 16)
    need = r * c * m_a * 8
    payload = data[32:]
    if len(payload) != need:
        raise ParseError(f"measurement payload is {len(payload)} bytes, expected {need}", offset=32)
    vectors = np.frombuffer(payload, dtype="<f8").reshape(r * c, m_a).astype(np.float64)
    return MeasurementSet(vectors, r, c, block)
