"""Shared fixtures: bundled grayscale photos and PGM fixture directories."""

import numpy as np
import pytest


def _to_unit_float(img) -> np.ndarray:
    arr = np.asarray(img)
    if arr.dtype == bool:
        return arr.astype(np.float64)
    if arr.dtype == np.uint8:
        return arr.astype(np.float64) / 255.0
    arr = arr.astype(np.float64)
    if arr.max() > 1.0:
        arr = arr / arr.max()
    return arr


def bundled_photos() -> dict[str, np.ndarray]:
    """Grayscale photographs shipped inside scikit-image (no network)."""
    from skimage import data

    names = ["camera", "moon", "coins", "page", "text", "clock", "brick", "grass", "gravel", "cell"]
    photos = {}
    for name in names:
        try:
            img = getattr(data, name)()
        except Exception:  # pragma: no cover - missing optional datafile
            continue
        if img.ndim == 2:
            photos[name] = _to_unit_float(img)
    return photos


@pytest.fixture(scope="session")
def photos() -> dict[str, np.ndarray]:
    imgs = bundled_photos()
    assert len(imgs) >= 6, "expected bundled scikit-image photographs"
    return imgs


@pytest.fixture()
def pgm_dir(tmp_path, photos):
    """Directory of small PGM crops of real photographs."""
    from blockcs.imageio import save_pgm

    out = tmp_path / "images"
    out.mkdir()
    for i, (name, img) in enumerate(sorted(photos.items())):
        crop = img[:96, :96]
        save_pgm(crop, str(out / f"{name}.pgm"))
    return out
