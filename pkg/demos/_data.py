"""Shared demo helpers: grayscale test images in [0, 1]."""

import numpy as np


def load_photos(max_images: int | None = None) -> dict[str, np.ndarray]:
    """Bundled scikit-image photographs, with a synthetic fallback."""
    photos: dict[str, np.ndarray] = {}
    try:
        from skimage import data

        for name in ["camera", "moon", "coins", "page", "clock", "brick", "grass", "gravel", "text", "cell"]:
            try:
                img = getattr(data, name)()
            except Exception:
                continue
            if img.ndim == 2 and img.dtype == np.uint8:
                photos[name] = img.astype(np.float64) / 255.0
    except ImportError:
        pass
    if not photos:
        rng = np.random.default_rng(0)
        for i in range(6):
            photos[f"synthetic{i}"] = synthetic_image(rng, 192)
    if max_images is not None:
        photos = dict(list(sorted(photos.items()))[:max_images])
    return photos


def synthetic_image(rng: np.random.Generator, size: int) -> np.ndarray:
    """Piecewise-smooth scene: low-frequency background plus a few shapes."""
    yy, xx = np.mgrid[0:size, 0:size] / size
    img = 0.4 + 0.3 * np.sin(2 * np.pi * (rng.uniform(0.5, 2) * xx + rng.uniform(0.5, 2) * yy))
    for _ in range(4):
        cy, cx = rng.uniform(0.2, 0.8, 2)
        r = rng.uniform(0.05, 0.2)
        mask = (yy - cy) ** 2 + (xx - cx) ** 2 < r**2
        img[mask] = rng.uniform(0, 1)
    img += 0.02 * rng.standard_normal((size, size))
    return np.clip(img, 0.0, 1.0)
