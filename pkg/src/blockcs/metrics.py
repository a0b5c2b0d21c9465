"""Image quality metrics (PSNR, SSIM) and the noisy-acquisition harness.

PSNR of identical images is reported as the +inf sentinel (``math.inf``);
CSV writers emit the literal ``inf``.  SSIM follows the de-facto standard
recipe: 11 x 11 Gaussian window with sigma 1.5, C1 = (0.01 L)^2,
C2 = (0.03 L)^2, averaged over the valid (fully interior) window
positions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.signal import convolve2d

from .errors import DimensionError
from .image import GrayImage
from .sensing import MeasurementSet

__all__ = [
    "QualityReport",
    "psnr",
    "ssim",
    "quality",
    "add_measurement_noise",
    "add_image_noise",
    "noise_sweep",
]


@dataclass
class QualityReport:
    psnr: float  # dB; math.inf for identical inputs
    ssim: float


def _pixels(x) -> np.ndarray:
    arr = getattr(x, "pixels", x)
    return np.asarray(arr, dtype=np.float64)


def psnr(x, y, peak: float = 1.0) -> float:
    """10 log10(peak^2 / MSE); +inf when the images are identical."""
    a, b = _pixels(x), _pixels(y)
    if a.shape != b.shape:
        raise DimensionError(f"shape mismatch {a.shape} vs {b.shape}")
    if peak <= 0:
        raise ValueError("peak must be > 0")
    mse = float(np.mean((a - b) ** 2))
    if mse == 0.0:
        return math.inf
    return 10.0 * math.log10(peak**2 / mse)


def _gaussian_window(size: int, sigma: float) -> np.ndarray:
    r = np.arange(size) - (size - 1) / 2.0
    g = np.exp(-(r**2) / (2.0 * sigma**2))
    k = np.outer(g, g)
    return k / k.sum()


def ssim(
    x,
    y,
    peak: float = 1.0,
    window: int = 11,
    sigma: float = 1.5,
    k1: float = 0.01,
    k2: float = 0.03,
) -> float:
    """Mean local structural similarity over Gaussian-weighted windows."""
    a, b = _pixels(x), _pixels(y)
    if a.shape != b.shape:
        raise DimensionError(f"shape mismatch {a.shape} vs {b.shape}")
    if min(a.shape) < window:
        raise DimensionError(f"images must be at least {window}x{window}, got {a.shape}")
    w = _gaussian_window(window, sigma)
    c1 = (k1 * peak) ** 2
    c2 = (k2 * peak) ** 2

    mu_a = convolve2d(a, w, mode="valid")
    mu_b = convolve2d(b, w, mode="valid")
    var_a = convolve2d(a * a, w, mode="valid") - mu_a**2
    var_b = convolve2d(b * b, w, mode="valid") - mu_b**2
    cov = convolve2d(a * b, w, mode="valid") - mu_a * mu_b

    num = (2.0 * mu_a * mu_b + c1) * (2.0 * cov + c2)
    den = (mu_a**2 + mu_b**2 + c1) * (var_a + var_b + c2)
    return float(np.mean(num / den))


def quality(x, y, peak: float = 1.0) -> QualityReport:
    return QualityReport(psnr=psnr(x, y, peak), ssim=ssim(x, y, peak))


def add_measurement_noise(mset: MeasurementSet, sigma: float, seed: int) -> MeasurementSet:
    """I.i.d. N(0, sigma^2) on every measurement; deterministic given the seed."""
    if sigma < 0:
        raise ValueError("noise level must be >= 0")
    if sigma == 0.0:
        return MeasurementSet(mset.vectors.copy(), mset.grid_rows, mset.grid_cols, mset.block_size)
    rng = np.random.default_rng(seed)
    noisy = mset.vectors + rng.normal(0.0, sigma, size=mset.vectors.shape)
    return MeasurementSet(noisy, mset.grid_rows, mset.grid_cols, mset.block_size)


def add_image_noise(img: GrayImage | np.ndarray, sigma: float, seed: int) -> GrayImage:
    """I.i.d. pixel noise applied before acquisition, clipped back to [0, 1]."""
    if sigma < 0:
        raise ValueError("noise level must be >= 0")
    if not isinstance(img, GrayImage):
        img = GrayImage.from_array(img)
    if sigma == 0.0:
        return GrayImage(img.pixels.copy(), img.height, img.width)
    rng = np.random.default_rng(seed)
    noisy = img.pixels + rng.normal(0.0, sigma, size=img.pixels.shape)
    return GrayImage(np.clip(noisy, 0.0, 1.0), img.height, img.width)


def noise_sweep(reconstruct, images, sigmas, seed: int = 0) -> list[float]:
    """Mean PSNR per noise level for a fixed reconstructor.

    ``reconstruct(image, sigma, seed)`` must return the reconstructed
    GrayImage (or array).  Each (image, sigma) pair gets its own derived
    seed so levels are independent but reproducible.
    """
    means = []
    for si, sigma in enumerate(sigmas):
        scores = []
        for ii, img in enumerate(images):
            rec = reconstruct(img, sigma, seed + 1000 * si + ii)
            scores.append(psnr(img, rec))
        means.append(float(np.mean(scores)))
    return means
