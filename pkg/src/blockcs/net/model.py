"""Learned block-CS pipeline: sampling layer, linear initial reconstruction,
octave U-net refinement with a residual skip, and model serialization.

The pipeline is, end to end:

    measurements = stride-A conv of the padded image with m_a learned A x A
                   filters (no bias) -- one filter per sensing-matrix row
    blocks       = 1x1 conv with A^2 filters (no bias, no activation), the
                   learned counterpart of the linear-MMSE matrix
    initial      = blocks rearranged onto the block grid (depth-to-space)
    output       = initial + refinement U-net(initial), cropped to the
                   original size

The U-net contracts with pairs of octave conv blocks (3x3, bias, ReLU)
followed by 2x2 max-pooling of both branches, doubling channel width per
level, and expands with octave transposed convolutions, skip
concatenations, and further conv pairs.  The single-channel input enters
as a pure high-frequency feature; the exit block merges back to a pure
high-frequency feature before a final 3x3 convolution to one channel with
no activation.

Parameters live in a flat name -> float64 array dict; every forward has a
hand-written backward against those names.
"""

from __future__ import annotations

import json
import math
import struct
from dataclasses import dataclass, field

import numpy as np

from ..errors import DimensionError, ParseError
from ..image import GrayImage
from ..nn import ConvParams, backward
from ..nn.layers import conv2d_fwd
from ..recon import AutocorrelationModel, ar1_autocorrelation, estimate_autocorrelation, mmse_matrix
from ..sensing import (
    MeasurementSet,
    SensingMatrix,
    block_partition,
    make_gaussian,
    matrix_to_filters,
    rows_for_rate,
)
from .octave import (
    OctConvParams,
    OctFeature,
    OctGrads,
    OctTConvParams,
    mod_oct_conv_fwd,
    oct_bias_relu_fwd,
    oct_bias_relu_bwd,
    oct_concat_fwd,
    oct_concat_bwd,
    oct_maxpool_fwd,
    oct_maxpool_bwd,
    mod_oct_conv_bwd,
    oct_transpose_conv_fwd,
    oct_transpose_conv_bwd,
    split_channels,
)

__all__ = [
    "NetworkConfig",
    "BcsNet",
    "parameter_specs",
    "init_params",
    "build_model",
    "block_merge",
    "measure",
    "initial_reconstruction",
    "reconstruct_from_measurements",
    "forward",
    "forward_train",
    "loss_terms",
    "loss_and_grads",
    "export_lsm",
    "save_model",
    "load_model",
]

MODEL_MAGIC = b"ABCS"
MODEL_VERSION = 1


@dataclass
class NetworkConfig:
    """Architecture hyperparameters for the learned pipeline."""

    block_size: int = 32
    rate: float = 0.1
    base_width: int = 16
    depth: int = 2
    oct_ratio: float = 0.5

    def __post_init__(self):
        if self.block_size < 1:
            raise ValueError("block size must be >= 1")
        if not 0.0 < self.rate <= 1.0:
            raise ValueError(f"sampling rate must be in (0, 1], got {self.rate}")
        if self.depth < 1:
            raise ValueError("depth must be >= 1")
        if self.base_width < 2:
            raise ValueError("base width must be >= 2")
        if not 0.0 <= self.oct_ratio <= 1.0:
            raise ValueError("octave ratio must be in [0, 1]")
        if self.oct_ratio >= 1.0:
            raise ValueError("octave ratio must leave the high branch non-empty")

    @property
    def measurements_per_block(self) -> int:
        return rows_for_rate(self.rate, self.block_size)

    def width(self, level: int) -> int:
        return self.base_width * 2**level

    def split(self, level: int) -> tuple[int, int]:
        return split_channels(self.width(level), self.oct_ratio)

    @property
    def unet_multiple(self) -> int:
        """Spatial divisibility the U-net needs (pools of both branches)."""
        extra = 1 if self.oct_ratio > 0.0 else 0
        return 2 ** (self.depth + extra)

    @property
    def pad_multiple(self) -> int:
        return math.lcm(self.block_size, self.unet_multiple)

    def to_json_dict(self) -> dict:
        return {
            "block_size": self.block_size,
            "rate": self.rate,
            "base_width": self.base_width,
            "depth": self.depth,
            "oct_ratio": self.oct_ratio,
        }

    @classmethod
    def from_json_dict(cls, d: dict) -> "NetworkConfig":
        return cls(
            block_size=int(d["block_size"]),
            rate=float(d["rate"]),
            base_width=int(d["base_width"]),
            depth=int(d["depth"]),
            oct_ratio=float(d["oct_ratio"]),
        )


@dataclass
class BcsNet:
    """A trained or freshly initialized pipeline: config plus flat params."""

    config: NetworkConfig
    params: dict[str, np.ndarray]


# ---------------------------------------------------------------------------
# parameter planning


@dataclass
class ParamSpec:
    shape: tuple[int, ...]
    fan_in: int | None  # None -> zero-initialized (biases)


def _oct_block_specs(specs: dict, prefix: str, c_in: tuple[int, int], c_out: tuple[int, int]):
    hi_i, lo_i = c_in
    hi_o, lo_o = c_out
    if hi_i and hi_o:
        specs[f"{prefix}.hh.w"] = ParamSpec((hi_o, hi_i, 3, 3), hi_i * 9)
    if hi_i and lo_o:
        specs[f"{prefix}.hl.w"] = ParamSpec((lo_o, hi_i, 3, 3), hi_i * 9)
    if lo_i and hi_o:
        specs[f"{prefix}.lh.w"] = ParamSpec((hi_o, lo_i, 3, 3), lo_i * 9)
        specs[f"{prefix}.lh_up.w"] = ParamSpec((hi_o, hi_o, 2, 2), hi_o)
    if lo_i and lo_o:
        specs[f"{prefix}.ll.w"] = ParamSpec((lo_o, lo_i, 3, 3), lo_i * 9)
    if hi_o:
        specs[f"{prefix}.bias_h"] = ParamSpec((hi_o,), None)
    if lo_o:
        specs[f"{prefix}.bias_l"] = ParamSpec((lo_o,), None)


def _oct_tblock_specs(specs: dict, prefix: str, c_in: tuple[int, int], c_out: tuple[int, int]):
    hi_i, lo_i = c_in
    hi_o, lo_o = c_out
    if hi_i and hi_o:
        specs[f"{prefix}.hh.w"] = ParamSpec((hi_i, hi_o, 2, 2), hi_i)
    if lo_i and hi_o:
        specs[f"{prefix}.lh.w"] = ParamSpec((lo_i, hi_o, 4, 4), lo_i)
    if lo_i and lo_o:
        specs[f"{prefix}.ll.w"] = ParamSpec((lo_i, lo_o, 2, 2), lo_i)
    if hi_i and lo_o:
        specs[f"{prefix}.hl.w"] = ParamSpec((lo_o, hi_i, 3, 3), hi_i * 9)
    if hi_o:
        specs[f"{prefix}.bias_h"] = ParamSpec((hi_o,), None)
    if lo_o:
        specs[f"{prefix}.bias_l"] = ParamSpec((lo_o,), None)


def parameter_specs(cfg: NetworkConfig) -> dict[str, ParamSpec]:
    """Name -> (shape, fan-in) for every learnable tensor of the pipeline."""
    a = cfg.block_size
    m_a = cfg.measurements_per_block
    specs: dict[str, ParamSpec] = {}
    specs["sample.w"] = ParamSpec((m_a, 1, a, a), a * a)
    specs["init.w"] = ParamSpec((a * a, m_a, 1, 1), m_a)
    for i in range(cfg.depth):
        c_in = (1, 0) if i == 0 else cfg.split(i - 1)
        _oct_block_specs(specs, f"enc{i}.c0", c_in, cfg.split(i))
        _oct_block_specs(specs, f"enc{i}.c1", cfg.split(i), cfg.split(i))
    _oct_block_specs(specs, "bot.c0", cfg.split(cfg.depth - 1), cfg.split(cfg.depth))
    _oct_block_specs(specs, "bot.c1", cfg.split(cfg.depth), cfg.split(cfg.depth))
    for i in reversed(range(cfg.depth)):
        _oct_tblock_specs(specs, f"dec{i}.up", cfg.split(i + 1), cfg.split(i))
        hi, lo = cfg.split(i)
        _oct_block_specs(specs, f"dec{i}.c0", (2 * hi, 2 * lo), cfg.split(i))
        _oct_block_specs(specs, f"dec{i}.c1", cfg.split(i), cfg.split(i))
    _oct_block_specs(specs, "out.merge", cfg.split(0), (cfg.base_width, 0))
    specs["out.final.w"] = ParamSpec((1, cfg.base_width, 3, 3), cfg.base_width * 9)
    specs["out.final.b"] = ParamSpec((1,), None)
    return specs


def init_params(
    cfg: NetworkConfig,
    seed: int,
    patches: np.ndarray | None = None,
) -> dict[str, np.ndarray]:
    """Seeded initialization: Gaussian sampling filters, the matching
    linear-MMSE matrix for the 1x1 reconstruction layer (empirical block
    autocorrelation when enough training patches are supplied, AR1(0.95)
    otherwise), and fan-in-scaled uniform U-net weights with zero biases.
    """
    ss = np.random.SeedSequence(seed)
    seed_matrix, seed_unet = (int(s.generate_state(1)[0]) for s in ss.spawn(2))
    a = cfg.block_size
    matrix = make_gaussian(cfg.measurements_per_block, a, seed_matrix)

    rho: AutocorrelationModel
    if patches is not None:
        stacks = [block_partition(p.reshape(p.shape[-2], p.shape[-1]), a)[0] for p in patches]
        blocks = np.concatenate(stacks, axis=0)
        rho = estimate_autocorrelation(blocks, a)
    else:
        rho = ar1_autocorrelation(a)

    params: dict[str, np.ndarray] = {}
    params["sample.w"] = matrix_to_filters(matrix).weight
    params["init.w"] = mmse_matrix(matrix, rho).reshape(a * a, matrix.rows, 1, 1)

    rng = np.random.default_rng(seed_unet)
    for name, spec in parameter_specs(cfg).items():
        if name in params:
            continue
        if spec.fan_in is None:
            params[name] = np.zeros(spec.shape)
        else:
            bound = 1.0 / math.sqrt(spec.fan_in)
            params[name] = rng.uniform(-bound, bound, size=spec.shape)
    return params


def build_model(cfg: NetworkConfig, seed: int, patches: np.ndarray | None = None) -> BcsNet:
    return BcsNet(cfg, init_params(cfg, seed, patches))


# ---------------------------------------------------------------------------
# structured views over the flat dict


def _conv(params: dict, key: str) -> ConvParams | None:
    w = params.get(f"{key}.w")
    return None if w is None else ConvParams(w)


def _oct_params(params: dict, prefix: str) -> OctConvParams:
    return OctConvParams(
        hh=_conv(params, f"{prefix}.hh"),
        hl=_conv(params, f"{prefix}.hl"),
        lh=_conv(params, f"{prefix}.lh"),
        lh_up=_conv(params, f"{prefix}.lh_up"),
        ll=_conv(params, f"{prefix}.ll"),
    )


def _oct_tparams(params: dict, prefix: str) -> OctTConvParams:
    return OctTConvParams(
        hh=_conv(params, f"{prefix}.hh"),
        lh=_conv(params, f"{prefix}.lh"),
        ll=_conv(params, f"{prefix}.ll"),
        hl=_conv(params, f"{prefix}.hl"),
    )


def _store_oct_grads(grads: dict, prefix: str, og, gb_h, gb_l) -> None:
    for path in ("hh", "hl", "lh", "lh_up", "ll"):
        cg = getattr(og, path, None)
        if cg is not None:
            grads[f"{prefix}.{path}.w"] = cg.weight
    if gb_h is not None:
        grads[f"{prefix}.bias_h"] = gb_h
    if gb_l is not None:
        grads[f"{prefix}.bias_l"] = gb_l


def _oct_block_fwd(f: OctFeature, params: dict, prefix: str):
    """Octave conv 3x3 + bias + ReLU (one contracting-path unit)."""
    pre, c_conv = mod_oct_conv_fwd(f, _oct_params(params, prefix))
    out, c_act = oct_bias_relu_fwd(pre, params.get(f"{prefix}.bias_h"), params.get(f"{prefix}.bias_l"))
    return out, (c_conv, c_act)


def _oct_block_bwd(cache, g: OctGrads, grads: dict, prefix: str) -> OctGrads:
    c_conv, c_act = cache
    g, gb_h, gb_l = oct_bias_relu_bwd(c_act, g)
    g, og = mod_oct_conv_bwd(c_conv, g)
    _store_oct_grads(grads, prefix, og, gb_h, gb_l)
    return g


def _oct_tblock_fwd(f: OctFeature, params: dict, prefix: str):
    """Octave transposed conv + bias + ReLU (one expanding-path unit)."""
    pre, c_conv = oct_transpose_conv_fwd(f, _oct_tparams(params, prefix))
    out, c_act = oct_bias_relu_fwd(pre, params.get(f"{prefix}.bias_h"), params.get(f"{prefix}.bias_l"))
    return out, (c_conv, c_act)


def _oct_tblock_bwd(cache, g: OctGrads, grads: dict, prefix: str) -> OctGrads:
    c_conv, c_act = cache
    g, gb_h, gb_l = oct_bias_relu_bwd(c_act, g)
    g, og = oct_transpose_conv_bwd(c_conv, g)
    _store_oct_grads(grads, prefix, og, gb_h, gb_l)
    return g


# ---------------------------------------------------------------------------
# block grid <-> image (depth-to-space over the block grid)


def block_merge(blocks: np.ndarray, block_size: int) -> np.ndarray:
    """(N, A^2, r, c) channel-of-blocks tensor -> (N, 1, r*A, c*A) image."""
    return _block_merge_fwd(blocks, block_size)[0]


def _block_merge_fwd(blocks: np.ndarray, a: int):
    n, a2, r, c = blocks.shape
    if a2 != a * a:
        raise DimensionError(f"channel count {a2} != block size squared {a * a}")
    y = blocks.reshape(n, a, a, r, c).transpose(0, 3, 1, 4, 2).reshape(n, 1, r * a, c * a)
    return np.ascontiguousarray(y), (a, r, c)


def _block_merge_bwd(cache, gy: np.ndarray) -> np.ndarray:
    a, r, c = cache
    n = gy.shape[0]
    g = gy.reshape(n, r, a, c, a).transpose(0, 2, 4, 1, 3).reshape(n, a * a, r, c)
    return np.ascontiguousarray(g)


# ---------------------------------------------------------------------------
# U-net forward/backward


def _check_unet_input(cfg: NetworkConfig, x: np.ndarray) -> None:
    mult = cfg.unet_multiple
    if x.shape[2] % mult or x.shape[3] % mult:
        raise DimensionError(
            f"U-net input {x.shape[2]}x{x.shape[3]} must be divisible by {mult}"
        )


def unet_forward(params: dict, cfg: NetworkConfig, x: np.ndarray) -> np.ndarray:
    return _unet_fwd(params, cfg, x)[0]


def _unet_fwd(params: dict, cfg: NetworkConfig, x: np.ndarray):
    _check_unet_input(cfg, x)
    caches: dict = {"enc": [], "dec": [None] * cfg.depth}
    f = OctFeature(np.asarray(x, dtype=np.float64), None)
    skips: list[OctFeature] = []
    for i in range(cfg.depth):
        f, c0 = _oct_block_fwd(f, params, f"enc{i}.c0")
        f, c1 = _oct_block_fwd(f, params, f"enc{i}.c1")
        skips.append(f)
        f, cp = oct_maxpool_fwd(f, 2)
        caches["enc"].append((c0, c1, cp))
    f, cb0 = _oct_block_fwd(f, params, "bot.c0")
    f, cb1 = _oct_block_fwd(f, params, "bot.c1")
    caches["bot"] = (cb0, cb1)
    for i in reversed(range(cfg.depth)):
        f, cu = _oct_tblock_fwd(f, params, f"dec{i}.up")
        f, cc = oct_concat_fwd(skips[i], f)  # contracting features first
        f, c0 = _oct_block_fwd(f, params, f"dec{i}.c0")
        f, c1 = _oct_block_fwd(f, params, f"dec{i}.c1")
        caches["dec"][i] = (cu, cc, c0, c1)
    f, cm = _oct_block_fwd(f, params, "out.merge")
    caches["merge"] = cm
    final = ConvParams(params["out.final.w"], params["out.final.b"])
    y, cf = conv2d_fwd(f.high, final, stride=1, pad=1)
    caches["final"] = cf
    return y, caches


def _unet_bwd(caches: dict, cfg: NetworkConfig, gy: np.ndarray):
    grads: dict[str, np.ndarray] = {}
    gx, fin = backward(caches["final"], gy)
    grads["out.final.w"] = fin.weight
    grads["out.final.b"] = fin.bias
    g = OctGrads(gx, None)
    g = _oct_block_bwd(caches["merge"], g, grads, "out.merge")
    skip_grads: list[OctGrads | None] = [None] * cfg.depth
    for i in range(cfg.depth):  # decoder levels, reverse of forward execution
        cu, cc, c0, c1 = caches["dec"][i]
        g = _oct_block_bwd(c1, g, grads, f"dec{i}.c1")
        g = _oct_block_bwd(c0, g, grads, f"dec{i}.c0")
        g_skip, g_up = oct_concat_bwd(cc, g)
        skip_grads[i] = g_skip
        g = _oct_tblock_bwd(cu, g_up, grads, f"dec{i}.up")
    g = _oct_block_bwd(caches["bot"][1], g, grads, "bot.c1")
    g = _oct_block_bwd(caches["bot"][0], g, grads, "bot.c0")
    for i in reversed(range(cfg.depth)):
        c0, c1, cp = caches["enc"][i]
        g = oct_maxpool_bwd(cp, g)
        g = g.add(skip_grads[i])
        g = _oct_block_bwd(c1, g, grads, f"enc{i}.c1")
        g = _oct_block_bwd(c0, g, grads, f"enc{i}.c0")
    return g.high, grads


# ---------------------------------------------------------------------------
# full pipeline


@dataclass
class ForwardCache:
    sample: object
    init: object
    merge: object
    unet: dict


def forward_train(params: dict, cfg: NetworkConfig, x: np.ndarray):
    """Caching forward over a batch (N, 1, H, W); H, W must already be
    multiples of ``cfg.pad_multiple``.  Returns (initial, refined, cache)."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 4 or x.shape[1] != 1:
        raise DimensionError(f"expected (N, 1, H, W) batch, got {x.shape}")
    if x.shape[2] % cfg.block_size or x.shape[3] % cfg.block_size:
        raise DimensionError(
            f"batch spatial dims {x.shape[2:]} not multiples of block size {cfg.block_size}"
        )
    meas, c_sample = conv2d_fwd(x, ConvParams(params["sample.w"]), stride=cfg.block_size)
    blocks, c_init = conv2d_fwd(meas, ConvParams(params["init.w"]), stride=1)
    xhat, c_merge = _block_merge_fwd(blocks, cfg.block_size)
    res, c_unet = _unet_fwd(params, cfg, xhat)
    xtilde = xhat + res
    return xhat, xtilde, ForwardCache(c_sample, c_init, c_merge, c_unet)


def backward_train(
    cache: ForwardCache,
    cfg: NetworkConfig,
    g_xtilde: np.ndarray,
    g_xhat_extra: np.ndarray | None = None,
):
    """Backward through the full pipeline given the refined-output gradient
    plus an optional extra gradient landing directly on the initial
    reconstruction (the auxiliary loss term)."""
    g_unet_in, grads = _unet_bwd(cache.unet, cfg, g_xtilde)
    g_xhat = g_unet_in + g_xtilde  # residual skip
    if g_xhat_extra is not None:
        g_xhat = g_xhat + g_xhat_extra
    g_blocks = _block_merge_bwd(cache.merge, g_xhat)
    g_meas, init_g = backward(cache.init, g_blocks)
    _, sample_g = backward(cache.sample, g_meas)
    grads["init.w"] = init_g.weight
    grads["sample.w"] = sample_g.weight
    return grads


def loss_terms(xhat: np.ndarray, xtilde: np.ndarray, target: np.ndarray):
    """(total-path loss, initial-path loss): each 1/(2N) sum of squared error."""
    n = target.shape[0]
    loss_main = 0.5 * float(np.sum((xtilde - target) ** 2)) / n
    loss_init = 0.5 * float(np.sum((xhat - target) ** 2)) / n
    return loss_main, loss_init


def loss_and_grads(
    params: dict,
    cfg: NetworkConfig,
    batch: np.ndarray,
    init_loss_weight: float = 1.0,
):
    """Combined objective main + w * initial and its parameter gradients."""
    batch = np.asarray(batch, dtype=np.float64)
    n = batch.shape[0]
    xhat, xtilde, cache = forward_train(params, cfg, batch)
    loss_main, loss_init = loss_terms(xhat, xtilde, batch)
    g_xtilde = (xtilde - batch) / n
    g_extra = init_loss_weight * (xhat - batch) / n
    grads = backward_train(cache, cfg, g_xtilde, g_extra)
    total = loss_main + init_loss_weight * loss_init
    return total, loss_main, loss_init, grads


# ---------------------------------------------------------------------------
# inference-facing API


def _tensor_from_mset(mset: MeasurementSet) -> np.ndarray:
    return np.ascontiguousarray(mset.as_grid()[None])  # (1, m_a, r, c)


def _mset_from_tensor(t: np.ndarray, block_size: int) -> MeasurementSet:
    _, m_a, r, c = t.shape
    vectors = t[0].transpose(1, 2, 0).reshape(r * c, m_a)
    return MeasurementSet(vectors, r, c, block_size)


def measure(model: BcsNet, img: GrayImage | np.ndarray) -> MeasurementSet:
    """Acquire an image through the learned sampling filters."""
    if not isinstance(img, GrayImage):
        img = GrayImage.from_array(img)
    cfg = model.config
    padded = img.padded_to(cfg.pad_multiple).pixels
    x = padded[None, None]
    meas = conv2d_fwd(x, ConvParams(model.params["sample.w"]), stride=cfg.block_size)[0]
    return _mset_from_tensor(meas, cfg.block_size)


def initial_reconstruction(model: BcsNet, vectors: np.ndarray) -> np.ndarray:
    """Map measurement vectors (n_blocks, m_a) to block vectors (n_blocks, A^2)
    through the bias-free 1x1 reconstruction layer (pure linear map)."""
    vectors = np.atleast_2d(np.asarray(vectors, dtype=np.float64))
    a2, m_a = model.params["init.w"].shape[:2]
    if vectors.shape[1] != m_a:
        raise DimensionError(f"measurement length {vectors.shape[1]} != expected {m_a}")
    return vectors @ model.params["init.w"].reshape(a2, m_a).T


def reconstruct_from_measurements(
    model: BcsNet,
    mset: MeasurementSet,
    crop: tuple[int, int] | None = None,
) -> GrayImage:
    """Initial reconstruction plus U-net refinement from measurements alone."""
    cfg = model.config
    if mset.block_size != cfg.block_size:
        raise DimensionError(
            f"measurement block size {mset.block_size} != model block size {cfg.block_size}"
        )
    t = _tensor_from_mset(mset)
    blocks = conv2d_fwd(t, ConvParams(model.params["init.w"]), stride=1)[0]
    xhat = block_merge(blocks, cfg.block_size)
    res = unet_forward(model.params, cfg, xhat)
    pixels = (xhat + res)[0, 0]
    h, w = crop if crop is not None else pixels.shape
    return GrayImage(pixels, h, w).cropped()


def forward(model: BcsNet, img: GrayImage | np.ndarray) -> GrayImage:
    """Full pipeline on one image: measure, reconstruct, crop to input size."""
    if not isinstance(img, GrayImage):
        img = GrayImage.from_array(img)
    mset = measure(model, img)
    return reconstruct_from_measurements(model, mset, crop=(img.height, img.width))


def initial_forward(model: BcsNet, img: GrayImage | np.ndarray) -> GrayImage:
    """Initial-reconstruction-only pipeline (no refinement), cropped."""
    if not isinstance(img, GrayImage):
        img = GrayImage.from_array(img)
    mset = measure(model, img)
    cfg = model.config
    t = _tensor_from_mset(mset)
    blocks = conv2d_fwd(t, ConvParams(model.params["init.w"]), stride=1)[0]
    xhat = block_merge(blocks, cfg.block_size)[0, 0]
    return GrayImage(xhat, img.height, img.width).cropped()


def export_lsm(model: BcsNet) -> SensingMatrix:
    """Flatten the sampling filters into a learned sensing matrix (row k is
    filter k in raster order)."""
    w = model.params["sample.w"]
    return SensingMatrix(w.reshape(w.shape[0], -1).copy(), model.config.block_size, "learned")


# ---------------------------------------------------------------------------
# serialization: magic, version u32, config JSON (u32 length prefix), then
# per tensor sorted by name: name length u32, name utf-8, 4 dims u32
# (trailing 1-padded), row-major float32 little-endian payload


def save_model(model: BcsNet, path: str) -> None:
    blob = json.dumps(model.config.to_json_dict()).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(MODEL_MAGIC)
        fh.write(struct.pack("<I", MODEL_VERSION))
        fh.write(struct.pack("<I", len(blob)))
        fh.write(blob)
        for name in sorted(model.params):
            arr = model.params[name]
            dims = tuple(arr.shape) + (1,) * (4 - arr.ndim)
            encoded = name.encode("utf-8")
            fh.write(struct.pack("<I", len(encoded)))
            fh.write(encoded)
            fh.write(struct.pack("<IIII", *dims))
            fh.write(np.ascontiguousarray(arr, dtype="<f4").tobytes())


def load_model(path: str) -> BcsNet:
    with open(path, "rb") as fh:
        data = fh.read()
    if data[:4] != MODEL_MAGIC:
        raise ParseError(f"bad model magic in {path!r}", offset=0)
    (version,) = struct.unpack_from("<I", data, 4)
    if version != MODEL_VERSION:
        raise ParseError(f"unsupported model version {version}", offset=4)
    (cfg_len,) = struct.unpack_from("<I", data, 8)
    try:
        cfg = NetworkConfig.from_json_dict(json.loads(data[12 : 12 + cfg_len]))
    except (ValueError, KeyError) as exc:
        raise ParseError(f"bad model config block: {exc}", offset=12) from exc
    offset = 12 + cfg_len
    specs = parameter_specs(cfg)
    params: dict[str, np.ndarray] = {}
    while offset < len(data):
        if offset + 4 > len(data):
            raise ParseError("truncated tensor header", offset=offset)
        (name_len,) = struct.unpack_from("<I", data, offset)
        offset += 4
        name = data[offset : offset + name_len].decode("utf-8")
        offset += name_len
        dims = struct.unpack_from("<IIII", data, offset)
        offset += 16
        count = int(np.prod(dims))
        payload = data[offset : offset + 4 * count]
        if len(payload) != 4 * count:
            raise ParseError(f"truncated payload for tensor {name!r}", offset=offset)
        offset += 4 * count
        if name not in specs:
            raise ParseError(f"unexpected tensor {name!r} for this architecture", offset=offset)
        shape = specs[name].shape
        if count != int(np.prod(shape)):
            raise ParseError(
                f"tensor {name!r} has {count} values, expected {int(np.prod(shape))}",
                offset=offset,
            )
        params[name] = np.frombuffer(payload, dtype="<f4").astype(np.float64).reshape(shape)
    missing = sorted(set(specs) - set(params))
    if missing:
        raise ParseError(f"model file missing tensors: {missing[:4]}...", offset=len(data))
    return BcsNet(cfg, params)
