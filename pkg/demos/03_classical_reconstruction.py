"""Classical block-CS reconstruction baselines.

Acquires an image with a Gaussian sensing matrix at two sampling rates and
reconstructs it with linear MMSE, two-stage iterative hard thresholding,
and reweighted least squares, reporting PSNR/SSIM for each.
"""

import pathlib
import tempfile

from _data import load_photos
from blockcs import metrics, recon, sensing
from blockcs.imageio import save_pgm

OUT = pathlib.Path(tempfile.gettempdir())

img = load_photos(max_images=3)["camera"][64:160, 64:160]  # 96 x 96 crop
A = 32
rho = recon.ar1_autocorrelation(A, 0.95)

for rate in (0.1, 0.25):
    rows = sensing.rows_for_rate(rate, A)
    matrix = sensing.make_gaussian(rows, A, seed=11)
    mset = sensing.acquire_image_conv(matrix, img)
    print(f"\nrate {rate}: {rows} measurements per {A}x{A} block")
    for method, cfg in [
        ("mmse", None),
        ("iht", recon.ReconConfig(sparsity=max(8, rows // 3), max_iter=150, tol=1e-9)),
        ("irls", recon.ReconConfig(lam=0.001, max_iter=60, tol=1e-8)),
    ]:
        out = recon.reconstruct_image(matrix, mset, method=method, cfg=cfg, rho=rho,
                                      crop=img.shape)
        q = metrics.quality(img, out.clipped())
        print(f"  {method:5s}: PSNR {q.psnr:6.2f} dB, SSIM {q.ssim:.4f}")
        path = OUT / f"demo_recon_{method}_{int(rate * 100)}.pgm"
        save_pgm(out.clipped(), str(path))
        print(f"         -> {path}")
save_pgm(img, str(OUT / "demo_recon_original.pgm"))
print(f"\noriginal crop -> {OUT / 'demo_recon_original.pgm'}")
