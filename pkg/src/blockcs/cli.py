"""Command-line surface: acquire, reconstruct, train, eval, analyze, export-lsm.

Exit codes: 0 success, 1 usage error, 2 data/config error.  CSV reports
spell +infinite PSNR as the literal ``inf``.
"""

from __future__ import annotations

import argparse
import math
import sys

import numpy as np

from . import analysis, metrics, net, recon, sensing
from .config import load_run_config
from .dataset import extract_patches
from .errors import CapacityError, ConfigError, DimensionError, ParseError, SolverError
from .image import GrayImage
from .imageio import load_pgm, save_pgm

__all__ = ["run_cli", "main"]

SUBCOMMANDS = ("train", "acquire", "reconstruct", "eval", "analyze", "export-lsm")


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="blockcs", description=__doc__)
    sub = parser.add_subparsers(dest="command")

    p = sub.add_parser("acquire", help="measure a PGM image with a sensing matrix")
    p.add_argument("--matrix", required=True)
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--noise-sigma", type=float, default=0.0)
    p.add_argument("--noise-on", choices=("measurements", "image"), default="measurements")
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("reconstruct", help="reconstruct an image")
    p.add_argument("--method", choices=("mmse", "iht", "irls"))
    p.add_argument("--matrix")
    p.add_argument("--measurements")
    p.add_argument("--model")
    p.add_argument("--in", dest="input")
    p.add_argument("--out", required=True)
    p.add_argument("--sparsity", type=int, default=8)
    p.add_argument("--lam", type=float, default=0.01)
    p.add_argument("--max-iter", type=int, default=200)
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--rho", choices=("identity", "ar1"), default="ar1")
    p.add_argument("--ar1-decay", type=float, default=0.95)
    p.add_argument("--crop", help="WxH to crop the assembled image to")

    p = sub.add_parser("train", help="train the learned pipeline")
    p.add_argument("--config", required=True)
    p.add_argument("--data", help="source image directory (PGM); overrides config")
    p.add_argument("--out", help="model output path; overrides config")

    p = sub.add_parser("eval", help="PSNR/SSIM report over a directory of PGMs")
    p.add_argument("--data", required=True)
    p.add_argument("--model")
    p.add_argument("--matrix")
    p.add_argument("--method", choices=("mmse", "iht", "irls"), default="mmse")
    p.add_argument("--noise-sigma", type=float, nargs="*", default=[0.0])
    p.add_argument("--noise-on", choices=("measurements", "image"), default="measurements")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--sparsity", type=int, default=8)
    p.add_argument("--lam", type=float, default=0.01)
    p.add_argument("--out", help="CSV output path (default stdout)")

    p = sub.add_parser("analyze", help="sensing-matrix statistics CSV")
    p.add_argument("--matrix", required=True)
    p.add_argument("--rip-s", type=int)
    p.add_argument("--mc-trials", type=int, default=1000)
    p.add_argument("--spark-max", type=int)
    p.add_argument("--bins", type=int, default=21)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="CSV output path (default stdout)")

    p = sub.add_parser("export-lsm", help="export a trained model's sensing matrix")
    p.add_argument("--model", required=True)
    p.add_argument("--out", required=True)

    return parser


def _fmt(value: float) -> str:
    if math.isinf(value):
        return "inf"
    return f"{value:.12g}"


def _write_text(path: str | None, text: str) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def _cmd_acquire(args) -> int:
    matrix = sensing.load_matrix(args.matrix)
    img = load_pgm(args.input)
    if args.noise_on == "image" and args.noise_sigma > 0:
        img = metrics.add_image_noise(img, args.noise_sigma, args.seed)
    mset = sensing.acquire_image_conv(matrix, img)
    if args.noise_on == "measurements" and args.noise_sigma > 0:
        mset = metrics.add_measurement_noise(mset, args.noise_sigma, args.seed)
    sensing.save_measurements(mset, args.out)
    print(
        f"acquired {args.input}: {mset.grid_rows}x{mset.grid_cols} blocks, "
        f"{mset.measurements_per_block} measurements each -> {args.out}"
    )
    return 0


def _parse_crop(text: str | None) -> tuple[int, int] | None:
    if text is None:
        return None
    try:
        w, h = text.lower().split("x")
        return int(h), int(w)
    except ValueError:
        raise _UsageError(f"bad --crop {text!r}, expected WxH") from None


def _cmd_reconstruct(args) -> int:
    if args.model:
        img = load_pgm(args.input) if args.input else None
        if img is None:
            raise _UsageError("network reconstruction needs --in")
        model = net.load_model(args.model)
        out = net.forward(model, img)
        save_pgm(out.clipped(), args.out)
    else:
        if not (args.method and args.matrix and args.measurements):
            raise _UsageError("classic reconstruction needs --method, --matrix, --measurements")
        matrix = sensing.load_matrix(args.matrix)
        mset = sensing.load_measurements(args.measurements)
        rho = None if args.rho == "identity" else recon.ar1_autocorrelation(
            matrix.block_size, args.ar1_decay
        )
        cfg = recon.ReconConfig(
            sparsity=args.sparsity, lam=args.lam, max_iter=args.max_iter, tol=args.tol
        )
        out = recon.reconstruct_image(
            matrix, mset, method=args.method, cfg=cfg, rho=rho, crop=_parse_crop(args.crop)
        )
        save_pgm(out.clipped(), args.out)
    print(f"reconstructed -> {args.out}")
    return 0


def _cmd_train(args) -> int:
    run = load_run_config(args.config, source_dir=args.data)
    if not run.dataset.source_dir:
        raise ConfigError("no dataset source directory (set --data or dataset.source_dir)")
    out_path = args.out or run.model_path
    if not out_path:
        raise ConfigError("no model output path (set --out or output.model)")
    patches = extract_patches(run.dataset, seed=run.train.seed)
    if patches.train.shape[0] == 0:
        raise ConfigError("dataset produced no training patches")
    model, log = net.train_fresh(run.network, patches.train, run.train)
    net.save_model(model, out_path)
    first, last = log.epoch_loss[0], log.epoch_loss[-1]
    print(
        f"trained {run.train.epochs} epochs on {patches.train.shape[0]} patches: "
        f"loss {first['loss_total']:.6f} -> {last['loss_total']:.6f}; model -> {out_path}"
    )
    if patches.holdout.shape[0]:
        scores = [
            metrics.psnr(p[0], net.forward(model, p[0]).pixels) for p in patches.holdout
        ]
        print(f"holdout PSNR over {len(scores)} patches: {np.mean(scores):.2f} dB")
    return 0


def _classic_reconstructor(matrix, args):
    cfg = recon.ReconConfig(sparsity=args.sparsity, lam=args.lam)
    rho = recon.ar1_autocorrelation(matrix.block_size)

    def rec(img: GrayImage, sigma: float, seed: int) -> GrayImage:
        src = img
        if args.noise_on == "image" and sigma > 0:
            src = metrics.add_image_noise(img, sigma, seed)
        mset = sensing.acquire_image_conv(matrix, src)
        if args.noise_on == "measurements" and sigma > 0:
            mset = metrics.add_measurement_noise(mset, sigma, seed)
        return recon.reconstruct_image(
            matrix, mset, method=args.method, cfg=cfg, rho=rho, crop=(img.height, img.width)
        )

    return rec


def _net_reconstructor(model, args):
    def rec(img: GrayImage, sigma: float, seed: int) -> GrayImage:
        src = img
        if args.noise_on == "image" and sigma > 0:
            src = metrics.add_image_noise(img, sigma, seed)
        mset = net.measure(model, src)
        if args.noise_on == "measurements" and sigma > 0:
            mset = metrics.add_measurement_noise(mset, sigma, seed)
        return net.reconstruct_from_measurements(model, mset, crop=(img.height, img.width))

    return rec


def _cmd_eval(args) -> int:
    from .dataset import list_source_images

    paths = list_source_images(args.data)
    if args.model:
        model = net.load_model(args.model)
        rate = model.config.rate
        method = "net"
        reconstruct = _net_reconstructor(model, args)
    elif args.matrix:
        matrix = sensing.load_matrix(args.matrix)
        rate = matrix.rate
        method = args.method
        reconstruct = _classic_reconstructor(matrix, args)
    else:
        raise _UsageError("eval needs --model or --matrix")

    lines = ["image,rate,sigma,method,psnr,ssim"]
    for si, sigma in enumerate(args.noise_sigma):
        for ii, path in enumerate(paths):
            img = load_pgm(str(path))
            out = reconstruct(img, sigma, args.seed + 1000 * si + ii)
            lines.append(
                f"{path.name},{_fmt(rate)},{_fmt(sigma)},{method},"
                f"{_fmt(metrics.psnr(img, out))},{_fmt(metrics.ssim(img, out))}"
            )
    _write_text(args.out, "\n".join(lines) + "\n")
    return 0


def _cmd_analyze(args) -> int:
    matrix = sensing.load_matrix(args.matrix)
    stats = analysis.gaussianity_stats(matrix, bins=args.bins)
    rows = [
        ("rows", matrix.rows),
        ("columns", matrix.block_size**2),
        ("rate", matrix.rate),
        ("mean", stats.mean),
        ("std", stats.std),
        ("skewness", stats.skewness),
        ("excess_kurtosis", stats.excess_kurtosis),
        ("degenerate", int(stats.degenerate)),
    ]
    try:
        rows.append(("coherence", analysis.coherence(matrix)))
    except ValueError:
        rows.append(("coherence", float("nan")))
    if args.spark_max:
        spark = analysis.spark_bruteforce(matrix, args.spark_max)
        rows.append(("spark", spark if spark is not None else f">{args.spark_max}"))
    if args.rip_s:
        n = matrix.block_size**2
        if math.comb(n, args.rip_s) <= analysis.RIP_SUPPORT_GUARD:
            rows.append(("rip_delta_exact", analysis.rip_constant_exact(matrix, args.rip_s).delta))
        mc = analysis.rip_constant_montecarlo(matrix, args.rip_s, args.mc_trials, args.seed)
        rows.append(("rip_s", args.rip_s))
        rows.append(("rip_delta_mc", mc.delta))
        rows.append(("rip_mc_trials", args.mc_trials))

    lines = ["statistic,value"]
    for name, value in rows:
        lines.append(f"{name},{_fmt(value) if isinstance(value, float) else value}")
    lines.append("bin_lo,bin_hi,count")
    for lo, hi, count in zip(stats.bin_edges[:-1], stats.bin_edges[1:], stats.counts):
        lines.append(f"{_fmt(float(lo))},{_fmt(float(hi))},{int(count)}")
    _write_text(args.out, "\n".join(lines) + "\n")
    return 0


def _cmd_export_lsm(args) -> int:
    model = net.load_model(args.model)
    matrix = net.export_lsm(model)
    sensing.save_matrix(matrix, args.out)
    print(f"exported {matrix.rows}x{matrix.block_size ** 2} learned matrix -> {args.out}")
    return 0


_HANDLERS = {
    "acquire": _cmd_acquire,
    "reconstruct": _cmd_reconstruct,
    "train": _cmd_train,
    "eval": _cmd_eval,
    "analyze": _cmd_analyze,
    "export-lsm": _cmd_export_lsm,
}


def run_cli(argv) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            parser.print_help()
            return 1
        return _HANDLERS[args.command](args)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except (FileNotFoundError, IsADirectoryError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ParseError, ConfigError, DimensionError, CapacityError, SolverError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run_cli(sys.argv[1:]))
