"""Octave feature maps and their convolution operators.

An octave feature splits channels into a full-resolution high-frequency
branch and a half-resolution low-frequency branch.  The downsampling
variant exchanges information between branches with 3x3 convolutions, a
2x2 max-pool on the high road, and a learnable 2x2 stride-2 transposed
convolution on the low-to-high road (upsampling is a trainable block, not
a fixed interpolation).  The transposed variant doubles both branches'
resolution: kernel-2 stride-2 transposed convs within a branch, a
kernel-4 stride-4 transposed conv for low-to-high, and a plain 3x3
convolution for high-to-low.

With an empty low branch both operators degenerate exactly to the vanilla
convolution / transposed convolution of the high branch.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import DimensionError
from ..nn import ConvParams, ConvGrads, backward
from ..nn.layers import (
    concat_channels_fwd,
    conv2d_fwd,
    conv_transpose2d_fwd,
    maxpool2d_fwd,
    relu_fwd,
    same_padding,
)

__all__ = [
    "OctFeature",
    "OctConvParams",
    "OctTConvParams",
    "OctGrads",
    "mod_oct_conv",
    "mod_oct_conv_fwd",
    "mod_oct_conv_bwd",
    "oct_transpose_conv",
    "oct_transpose_conv_fwd",
    "oct_transpose_conv_bwd",
    "oct_bias_relu_fwd",
    "oct_bias_relu_bwd",
    "oct_maxpool_fwd",
    "oct_maxpool_bwd",
    "oct_concat_fwd",
    "oct_concat_bwd",
    "split_channels",
]


@dataclass
class OctFeature:
    """High branch at (h, w) and low branch at (h/2, w/2); either may be None."""

    high: np.ndarray | None
    low: np.ndarray | None

    def __post_init__(self):
        if self.high is None and self.low is None:
            raise DimensionError("octave feature needs at least one branch")
        if self.high is not None and self.low is not None:
            hh, hw = self.high.shape[2:]
            lh, lw = self.low.shape[2:]
            if (lh, lw) != (hh // 2, hw // 2) or hh % 2 or hw % 2:
                raise DimensionError(
                    f"low branch {lh}x{lw} is not half of high branch {hh}x{hw}"
                )

    def map(self, fn) -> "OctFeature":
        return OctFeature(
            None if self.high is None else fn(self.high),
            None if self.low is None else fn(self.low),
        )

    def add(self, other: "OctFeature") -> "OctFeature":
        def _sum(a, b):
            if a is None:
                return b
            if b is None:
                return a
            return a + b

        return OctFeature(_sum(self.high, other.high), _sum(self.low, other.low))


# gradient pairs share the container shape semantics
OctGrads = OctFeature


def split_channels(width: int, ratio: float) -> tuple[int, int]:
    """(high, low) channel counts for a total width and low-frequency ratio."""
    if not 0.0 <= ratio <= 1.0:
        raise ValueError(f"octave ratio must be in [0, 1], got {ratio}")
    low = int(ratio * width)
    return width - low, low


@dataclass
class OctConvParams:
    """Weights of one downsampling-style octave convolution.

    Any path whose source or destination branch is empty is None.  The
    low-to-high road is a 3x3 conv at low resolution (``lh``) followed by a
    learnable 2x2 stride-2 transposed conv (``lh_up``).  Biases belong to
    the activation wrapper, not to the raw operator.
    """

    hh: ConvParams | None = None
    hl: ConvParams | None = None
    lh: ConvParams | None = None
    lh_up: ConvParams | None = None
    ll: ConvParams | None = None


@dataclass
class OctTConvParams:
    """Weights of one resolution-doubling octave transposed convolution."""

    hh: ConvParams | None = None  # transposed, kernel 2 stride 2
    lh: ConvParams | None = None  # transposed, kernel 4 stride 4
    ll: ConvParams | None = None  # transposed, kernel 2 stride 2
    hl: ConvParams | None = None  # plain 3x3 conv, same padding


@dataclass
class OctConvGrads:
    hh: ConvGrads | None = None
    hl: ConvGrads | None = None
    lh: ConvGrads | None = None
    lh_up: ConvGrads | None = None
    ll: ConvGrads | None = None


@dataclass
class _OctConvCache:
    hh: object | None
    hl: object | None
    pool: object | None
    lh: object | None
    lh_up: object | None
    ll: object | None
    in_high: bool
    in_low: bool


def mod_oct_conv_fwd(f: OctFeature, p: OctConvParams):
    pad3 = same_padding(3)
    y_high = y_low = None
    c_hh = c_hl = c_pool = c_lh = c_lh_up = c_ll = None

    if f.high is not None and p.hh is not None:
        y_high, c_hh = conv2d_fwd(f.high, p.hh, stride=1, pad=pad3)
    if f.low is not None and p.lh is not None:
        u, c_lh = conv2d_fwd(f.low, p.lh, stride=1, pad=pad3)
        up, c_lh_up = conv_transpose2d_fwd(u, p.lh_up, stride=2)
        y_high = up if y_high is None else y_high + up
    if f.low is not None and p.ll is not None:
        y_low, c_ll = conv2d_fwd(f.low, p.ll, stride=1, pad=pad3)
    if f.high is not None and p.hl is not None:
        (pooled, _), c_pool = maxpool2d_fwd(f.high, 2)
        d, c_hl = conv2d_fwd(pooled, p.hl, stride=1, pad=pad3)
        y_low = d if y_low is None else y_low + d

    cache = _OctConvCache(
        c_hh, c_hl, c_pool, c_lh, c_lh_up, c_ll, f.high is not None, f.low is not None
    )
    return OctFeature(y_high, y_low), cache


def mod_oct_conv(f: OctFeature, p: OctConvParams) -> OctFeature:
    return mod_oct_conv_fwd(f, p)[0]


def mod_oct_conv_bwd(cache: _OctConvCache, g: OctGrads):
    gx_high = gx_low = None
    grads = OctConvGrads()

    if cache.hh is not None:
        gx, grads.hh = backward(cache.hh, g.high)
        gx_high = gx
    if cache.lh is not None:
        gu, grads.lh_up = backward(cache.lh_up, g.high)
        gx, grads.lh = backward(cache.lh, gu)
        gx_low = gx
    if cache.ll is not None:
        gx, grads.ll = backward(cache.ll, g.low)
        gx_low = gx if gx_low is None else gx_low + gx
    if cache.hl is not None:
        gp, grads.hl = backward(cache.hl, g.low)
        gx, _ = backward(cache.pool, gp)
        gx_high = gx if gx_high is None else gx_high + gx

    return OctGrads(gx_high, gx_low), grads


@dataclass
class _OctTConvCache:
    hh: object | None
    lh: object | None
    ll: object | None
    hl: object | None


def oct_transpose_conv_fwd(f: OctFeature, p: OctTConvParams):
    y_high = y_low = None
    c_hh = c_lh = c_ll = c_hl = None

    if f.high is not None and p.hh is not None:
        y_high, c_hh = conv_transpose2d_fwd(f.high, p.hh, stride=2)
    if f.low is not None and p.lh is not None:
        up, c_lh = conv_transpose2d_fwd(f.low, p.lh, stride=4)
        y_high = up if y_high is None else y_high + up
    if f.low is not None and p.ll is not None:
        y_low, c_ll = conv_transpose2d_fwd(f.low, p.ll, stride=2)
    if f.high is not None and p.hl is not None:
        d, c_hl = conv2d_fwd(f.high, p.hl, stride=1, pad=same_padding(3))
        y_low = d if y_low is None else y_low + d

    return OctFeature(y_high, y_low), _OctTConvCache(c_hh, c_lh, c_ll, c_hl)


def oct_transpose_conv(f: OctFeature, p: OctTConvParams) -> OctFeature:
    return oct_transpose_conv_fwd(f, p)[0]


def oct_transpose_conv_bwd(cache: _OctTConvCache, g: OctGrads):
    gx_high = gx_low = None
    grads = OctConvGrads()

    if cache.hh is not None:
        gx, grads.hh = backward(cache.hh, g.high)
        gx_high = gx
    if cache.lh is not None:
        gx, grads.lh = backward(cache.lh, g.high)
        gx_low = gx
    if cache.ll is not None:
        gx, grads.ll = backward(cache.ll, g.low)
        gx_low = gx if gx_low is None else gx_low + gx
    if cache.hl is not None:
        gx, grads.hl = backward(cache.hl, g.low)
        gx_high = gx if gx_high is None else gx_high + gx

    return OctGrads(gx_high, gx_low), grads


# ---------------------------------------------------------------------------
# branch-wise bias + ReLU, pooling, concatenation


@dataclass
class _BiasReluCache:
    relu_high: object | None
    relu_low: object | None
    has_bias_high: bool
    has_bias_low: bool


def oct_bias_relu_fwd(f: OctFeature, bias_high: np.ndarray | None, bias_low: np.ndarray | None):
    y_high = y_low = None
    c_high = c_low = None
    if f.high is not None:
        h = f.high + bias_high[None, :, None, None] if bias_high is not None else f.high
        y_high, c_high = relu_fwd(h)
    if f.low is not None:
        l = f.low + bias_low[None, :, None, None] if bias_low is not None else f.low
        y_low, c_low = relu_fwd(l)
    cache = _BiasReluCache(c_high, c_low, bias_high is not None, bias_low is not None)
    return OctFeature(y_high, y_low), cache


def oct_bias_relu_bwd(cache: _BiasReluCache, g: OctGrads):
    gx_high = gx_low = None
    gb_high = gb_low = None
    if cache.relu_high is not None:
        gx_high, _ = backward(cache.relu_high, g.high)
        if cache.has_bias_high:
            gb_high = gx_high.sum(axis=(0, 2, 3))
    if cache.relu_low is not None:
        gx_low, _ = backward(cache.relu_low, g.low)
        if cache.has_bias_low:
            gb_low = gx_low.sum(axis=(0, 2, 3))
    return OctGrads(gx_high, gx_low), gb_high, gb_low


@dataclass
class _OctPoolCache:
    high: object | None
    low: object | None


def oct_maxpool_fwd(f: OctFeature, k: int = 2):
    y_high = y_low = None
    c_high = c_low = None
    if f.high is not None:
        (y_high, _), c_high = maxpool2d_fwd(f.high, k)
    if f.low is not None:
        (y_low, _), c_low = maxpool2d_fwd(f.low, k)
    return OctFeature(y_high, y_low), _OctPoolCache(c_high, c_low)


def oct_maxpool_bwd(cache: _OctPoolCache, g: OctGrads):
    gx_high = backward(cache.high, g.high)[0] if cache.high is not None else None
    gx_low = backward(cache.low, g.low)[0] if cache.low is not None else None
    return OctGrads(gx_high, gx_low)


@dataclass
class _OctConcatCache:
    high: object | None
    low: object | None


def oct_concat_fwd(a: OctFeature, b: OctFeature):
    """Branch-wise channel concatenation; ``a`` occupies the first channels."""
    if (a.high is None) != (b.high is None) or (a.low is None) != (b.low is None):
        raise DimensionError("octave concat requires matching branch structure")
    y_high = y_low = None
    c_high = c_low = None
    if a.high is not None:
        y_high, c_high = concat_channels_fwd(a.high, b.high)
    if a.low is not None:
        y_low, c_low = concat_channels_fwd(a.low, b.low)
    return OctFeature(y_high, y_low), _OctConcatCache(c_high, c_low)


def oct_concat_bwd(cache: _OctConcatCache, g: OctGrads):
    ga_high = gb_high = ga_low = gb_low = None
    if cache.high is not None:
        (ga_high, gb_high), _ = backward(cache.high, g.high)
    if cache.low is not None:
        (ga_low, gb_low), _ = backward(cache.low, g.low)
    return OctGrads(ga_high, ga_low), OctGrads(gb_high, gb_low)
