"""Train the learned acquisition + refinement pipeline at toy scale.

Uses a small configuration (16x16 blocks, shallow octave U-net) so the run
finishes in a couple of minutes on a laptop, then:
  * compares the full pipeline against the initial linear reconstruction
    and against a fixed Gaussian matrix with linear-MMSE decoding,
  * exports the learned sensing matrix and inspects its statistics,
  * plugs the learned matrix into the classical solvers.
The desk-scale configuration from the acceptance suite is the same code
with block_size=32, base_width=16, depth=2, and 60 epochs.
"""

import pathlib
import tempfile
import time

import numpy as np

from _data import load_photos
from blockcs import analysis, metrics, net, recon, sensing
from blockcs.dataset import DatasetSpec, extract_patches
from blockcs.image import GrayImage

OUT = pathlib.Path(tempfile.gettempdir())

photos = load_photos()
spec = DatasetSpec("", patch_size=48, patches_per_image=6, flips=True, rotations=True,
                   split_seed=0, holdout_fraction=0.2, max_patches=160)
patches = extract_patches(spec, seed=0, images=[GrayImage.from_array(p) for p in photos.values()])
print(f"dataset: {patches.train.shape[0]} training patches, "
      f"{patches.holdout.shape[0]} holdout patches "
      f"({len(patches.train_sources)}/{len(patches.holdout_sources)} source images)")

cfg = net.NetworkConfig(block_size=16, rate=0.1, base_width=8, depth=1, oct_ratio=0.5)
train_cfg = net.TrainConfig(epochs=30, batch_size=16, seed=0)
print(f"config: block {cfg.block_size}, rate {cfg.rate} "
      f"({cfg.measurements_per_block} measurements/block), width {cfg.base_width}, "
      f"depth {cfg.depth}; {train_cfg.epochs} epochs")

t0 = time.time()
model, log = net.train_fresh(cfg, patches.train, train_cfg)
print(f"trained in {time.time() - t0:.0f}s; epoch loss "
      f"{log.epoch_loss[0]['loss_total']:.4f} -> {log.epoch_loss[-1]['loss_total']:.4f}")

holdout = [p[0] for p in patches.holdout]
mean = lambda fn: float(np.mean([metrics.psnr(img, fn(img).pixels) for img in holdout]))
full = mean(lambda img: net.forward(model, img))
init_only = mean(lambda img: net.initial_forward(model, img))

gauss = sensing.make_gaussian(cfg.measurements_per_block, cfg.block_size, seed=99)
blocks = np.concatenate([sensing.block_partition(p[0], cfg.block_size)[0]
                         for p in patches.train[:100]])
rho = recon.estimate_autocorrelation(blocks, cfg.block_size)
classic = lambda img: recon.reconstruct_image(
    gauss, sensing.acquire_image_conv(gauss, img), method="mmse", rho=rho, crop=img.shape)
baseline = mean(classic)

print(f"\nholdout PSNR: full pipeline {full:.2f} dB | initial-only {init_only:.2f} dB "
      f"| Gaussian+MMSE {baseline:.2f} dB")
print(f"refinement gain {full - init_only:+.2f} dB, gain over fixed matrix {full - baseline:+.2f} dB")

model_path = str(OUT / "demo_model.abcs")
net.save_model(model, model_path)
print(f"\nmodel -> {model_path}")

lsm = net.export_lsm(model)
lsm_path = str(OUT / "demo_lsm.bcsm")
sensing.save_matrix(lsm, lsm_path)
stats = analysis.gaussianity_stats(lsm, bins=15)
print(f"learned matrix: {lsm.rows} x {lsm.block_size ** 2}; entry mean {stats.mean:+.4f}, "
      f"std {stats.std:.4f}, skewness {stats.skewness:+.3f}, "
      f"excess kurtosis {stats.excess_kurtosis:+.3f}")

unit = lambda m: m.entries / np.linalg.norm(m.entries, axis=0)
d_lsm = analysis.rip_constant_montecarlo(unit(lsm), 2, trials=1500, seed=0).delta
d_gauss = analysis.rip_constant_montecarlo(unit(gauss), 2, trials=1500, seed=0).delta
print(f"unit-column Monte-Carlo delta_2: learned {d_lsm:.3f} vs Gaussian {d_gauss:.3f}")

plug = lambda m: mean(lambda img: recon.reconstruct_image(
    m, sensing.acquire_image_conv(m, img), method="mmse", rho=rho, crop=img.shape))
print(f"learned matrix inside the classical MMSE solver: {plug(lsm):.2f} dB "
      f"(Gaussian matrix: {plug(gauss):.2f} dB)")
