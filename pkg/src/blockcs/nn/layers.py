"""Dense NCHW layer primitives with hand-written backward passes.

Every forward op has a ``*_fwd`` variant returning ``(output, cache)``;
``backward(cache, upstream)`` dispatches on the cache type and returns
``(input_grad, param_grads)``.  All compute paths are float64 so the
finite-difference checker has headroom.  Caches hold references to the
forward arrays; do not mutate parameters between forward and backward.

Convolutions run as batched GEMMs over an im2col buffer.  The buffer is
built with one strided copy per kernel tap, degenerating to a pure
reshape for 1x1 kernels and for non-overlapping kernel == stride
geometries (the block-sampling layout), so the heavy lifting stays inside
BLAS.

Conventions:
  * tensors are (batch, channels, height, width)
  * conv weights are (out_c, in_c, kh, kw); zero padding on both sides
  * transposed-conv weights are (src_c, dst_c, k, k) with kernel == stride,
    so ``conv_transpose2d(y, p, s)`` is the exact adjoint of
    ``conv2d(x, p, stride=s, pad=0)`` when ``p`` is the conv's parameters
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import singledispatch

import numpy as np
from scipy import fft as _fft

from ..errors import DimensionError
from ._freqmix import mix_nc_oc, mix_no_nc, mix_no_oc

__all__ = [
    "ConvParams",
    "ConvGrads",
    "conv2d",
    "conv2d_fwd",
    "conv_transpose2d",
    "conv_transpose2d_fwd",
    "maxpool2d",
    "maxpool2d_fwd",
    "relu",
    "relu_fwd",
    "concat_channels",
    "concat_channels_fwd",
    "backward",
    "same_padding",
]


@dataclass
class ConvParams:
    """Weights plus optional per-output-channel bias for one conv layer."""

    weight: np.ndarray
    bias: np.ndarray | None = None

    def __post_init__(self):
        self.weight = np.asarray(self.weight, dtype=np.float64)
        if self.weight.ndim != 4:
            raise DimensionError(f"conv weight must be rank 4, got shape {self.weight.shape}")
        if self.bias is not None:
            self.bias = np.asarray(self.bias, dtype=np.float64)
            if self.bias.ndim != 1:
                raise DimensionError(f"bias must be rank 1, got shape {self.bias.shape}")


@dataclass
class ConvGrads:
    weight: np.ndarray
    bias: np.ndarray | None = None


def same_padding(kernel: int) -> int:
    """Padding that preserves spatial dims for odd kernels at stride 1."""
    return kernel // 2


def _as_batch(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 4:
        raise DimensionError(f"expected (N, C, H, W) tensor, got shape {x.shape}")
    return x


def _out_dim(size: int, k: int, stride: int) -> int:
    return (size - k) // stride + 1


def _im2col(xp: np.ndarray, kh: int, kw: int, stride: int) -> np.ndarray:
    """(N, C, Hp, Wp) -> (N, C*kh*kw, Ho*Wo) column buffer.

    1x1/stride-1 kernels and non-overlapping kernel == stride geometries
    reduce to reshapes; everything else copies one strided slice per tap.
    """
    n, c, hp, wp = xp.shape
    ho, wo = _out_dim(hp, kh, stride), _out_dim(wp, kw, stride)
    if kh == 1 and kw == 1 and stride == 1:
        return xp.reshape(n, c, hp * wp)
    if kh == stride and kw == stride and hp % kh == 0 and wp % kw == 0:
        col = xp.reshape(n, c, ho, kh, wo, kw).transpose(0, 1, 3, 5, 2, 4)
        return np.ascontiguousarray(col).reshape(n, c * kh * kw, ho * wo)
    col = np.empty((n, c, kh, kw, ho, wo))
    for a in range(kh):
        for b in range(kw):
            col[:, :, a, b] = xp[:, :, a : a + ho * stride : stride, b : b + wo * stride : stride]
    return col.reshape(n, c * kh * kw, ho * wo)


def _col2im(dcol: np.ndarray, shape: tuple, kh: int, kw: int, stride: int) -> np.ndarray:
    """Adjoint of _im2col: scatter-add columns back onto the (padded) grid."""
    n, c, hp, wp = shape
    ho, wo = _out_dim(hp, kh, stride), _out_dim(wp, kw, stride)
    if kh == 1 and kw == 1 and stride == 1:
        return dcol.reshape(n, c, hp, wp)
    if kh == stride and kw == stride and hp % kh == 0 and wp % kw == 0:
        g = dcol.reshape(n, c, kh, kw, ho, wo).transpose(0, 1, 4, 2, 5, 3)
        return np.ascontiguousarray(g).reshape(n, c, hp, wp)
    d6 = dcol.reshape(n, c, kh, kw, ho, wo)
    gxp = np.zeros(shape)
    for a in range(kh):
        for b in range(kw):
            gxp[:, :, a : a + ho * stride : stride, b : b + wo * stride : stride] += d6[:, :, a, b]
    return gxp


# ---------------------------------------------------------------------------
# conv2d
#
# Two interchangeable evaluation routes with identical semantics:
#   * im2col + GEMM for strided, tiny, or oddly padded geometries
#   * frequency domain for large stride-1 convolutions, where the column
#     buffer (9x the activation) would dominate memory traffic
# Results agree to FFT roundoff (~1e-13), far below every contract
# tolerance in the package.

FFT_AREA_THRESHOLD = 576  # stride-1 convs on at least this many pixels go through FFT


def _use_fft_route(kh: int, kw: int, stride: int, pad: int, h: int, w: int) -> bool:
    return (
        stride == 1
        and kh == kw
        and 1 < kh <= min(h, w)
        and pad <= kh - 1
        and h * w >= FFT_AREA_THRESHOLD
    )


@dataclass
class Conv2dCache:
    col: np.ndarray  # im2col buffer of the padded input
    in_shape: tuple[int, ...]
    padded_shape: tuple[int, ...]
    params: ConvParams
    stride: int
    pad: int


@dataclass
class Conv2dFftCache:
    xf: np.ndarray  # input spectrum at the padded FFT size
    wf_flip: np.ndarray  # kernel spectrum (spatially flipped kernel)
    fft_shape: tuple[int, int]
    in_shape: tuple[int, ...]
    params: ConvParams
    pad: int


_PHASE_CACHE: dict[tuple[int, int, int, int], np.ndarray] = {}


def _flip_phase(fh: int, fw: int, kh: int, kw: int) -> np.ndarray:
    """Spectral factor linking a flipped kernel's FFT to the kernel's FFT:
    fft(w) = conj(fft(flip(w))) * phase for real w."""
    key = (fh, fw, kh, kw)
    cached = _PHASE_CACHE.get(key)
    if cached is None:
        u = np.arange(fh)[:, None]
        v = np.arange(fw // 2 + 1)[None, :]
        cached = np.exp(-2j * np.pi * ((kh - 1) * u / fh + (kw - 1) * v / fw))
        _PHASE_CACHE[key] = cached
    return cached


def _conv2d_fft_fwd(x: np.ndarray, p: ConvParams, pad: int):
    n, c, h, w = x.shape
    out_c, _, kh, kw = p.weight.shape
    fh = _fft.next_fast_len(max(h + kh - 1, h + 2 * pad), real=True)
    fw = _fft.next_fast_len(max(w + kw - 1, w + 2 * pad), real=True)
    xf = _fft.rfft2(x, s=(fh, fw), workers=-1)
    wf_flip = _fft.rfft2(p.weight[:, :, ::-1, ::-1], s=(fh, fw), workers=-1)
    yf = mix_nc_oc(xf, wf_flip)
    y_full = _fft.irfft2(yf, s=(fh, fw), workers=-1)
    ho, wo = h + 2 * pad - kh + 1, w + 2 * pad - kw + 1
    oh, ow = kh - 1 - pad, kw - 1 - pad
    y = np.ascontiguousarray(y_full[:, :, oh : oh + ho, ow : ow + wo])
    if p.bias is not None:
        y += p.bias[None, :, None, None]
    return y, Conv2dFftCache(xf, wf_flip, (fh, fw), x.shape, p, pad)


def _conv2d_fft_bwd(cache: Conv2dFftCache, gy: np.ndarray):
    p, pad = cache.params, cache.pad
    out_c, in_c, kh, kw = p.weight.shape
    n, _, h, w = cache.in_shape
    fh, fw = cache.fft_shape
    gy = np.asarray(gy, dtype=np.float64)
    gyf = _fft.rfft2(gy, s=(fh, fw), workers=-1)
    wf = np.conj(cache.wf_flip) * _flip_phase(fh, fw, kh, kw)  # unflipped spectrum
    # input grad: convolution of the upstream grad with the kernel
    gxf = mix_no_oc(gyf, wf)
    gx_full = _fft.irfft2(gxf, s=(fh, fw), workers=-1)
    gx = np.ascontiguousarray(gx_full[:, :, pad : pad + h, pad : pad + w])
    # weight grad: correlation of the input with the upstream grad at the
    # kernel lags (negative lags wrap around the FFT grid)
    gwf = mix_no_nc(np.conj(gyf), cache.xf)
    gw_full = _fft.irfft2(gwf, s=(fh, fw), workers=-1)
    rows = (np.arange(kh) - pad) % fh
    cols = (np.arange(kw) - pad) % fw
    gw = gw_full[:, :, rows[:, None], cols[None, :]]
    gb = gy.sum(axis=(0, 2, 3)) if p.bias is not None else None
    return gx, ConvGrads(np.ascontiguousarray(gw), gb)


def conv2d_fwd(x: np.ndarray, p: ConvParams, stride: int = 1, pad: int = 0):
    x = _as_batch(x)
    out_c, in_c, kh, kw = p.weight.shape
    if x.shape[1] != in_c:
        raise DimensionError(f"input has {x.shape[1]} channels, kernel expects {in_c}")
    if stride < 1 or pad < 0:
        raise ValueError("stride must be >= 1 and pad >= 0")
    if kh > x.shape[2] + 2 * pad or kw > x.shape[3] + 2 * pad:
        raise DimensionError(
            f"kernel {kh}x{kw} larger than padded input "
            f"{x.shape[2] + 2 * pad}x{x.shape[3] + 2 * pad}"
        )
    if _use_fft_route(kh, kw, stride, pad, x.shape[2], x.shape[3]):
        return _conv2d_fft_fwd(x, p, pad)
    xp = np.pad(x, ((0, 0), (0, 0), (pad, pad), (pad, pad))) if pad else x
    n, _, hp, wp = xp.shape
    ho, wo = _out_dim(hp, kh, stride), _out_dim(wp, kw, stride)
    col = _im2col(xp, kh, kw, stride)
    y = np.matmul(p.weight.reshape(out_c, -1), col).reshape(n, out_c, ho, wo)
    if p.bias is not None:
        y += p.bias[None, :, None, None]
    return y, Conv2dCache(col, x.shape, xp.shape, p, stride, pad)


def conv2d(x: np.ndarray, p: ConvParams, stride: int = 1, pad: int = 0) -> np.ndarray:
    return conv2d_fwd(x, p, stride, pad)[0]


def _conv2d_bwd(cache: Conv2dCache, gy: np.ndarray):
    p, s, pad = cache.params, cache.stride, cache.pad
    out_c, in_c, kh, kw = p.weight.shape
    gy = np.asarray(gy, dtype=np.float64)
    n = gy.shape[0]
    gy3 = gy.reshape(n, out_c, -1)
    w2 = p.weight.reshape(out_c, -1)
    gw = np.matmul(gy3, cache.col.transpose(0, 2, 1)).sum(axis=0).reshape(p.weight.shape)
    gb = gy.sum(axis=(0, 2, 3)) if p.bias is not None else None
    dcol = np.matmul(w2.T, gy3)
    gxp = _col2im(dcol, cache.padded_shape, kh, kw, s)
    if pad:
        h, w = cache.in_shape[2], cache.in_shape[3]
        gx = gxp[:, :, pad : pad + h, pad : pad + w]
    else:
        gx = gxp
    return gx, ConvGrads(gw, gb)


# ---------------------------------------------------------------------------
# conv_transpose2d (kernel == stride, so output blocks never overlap)


@dataclass
class ConvT2dCache:
    x: np.ndarray
    params: ConvParams
    stride: int


def conv_transpose2d_fwd(x: np.ndarray, p: ConvParams, stride: int):
    x = _as_batch(x)
    src_c, dst_c, kh, kw = p.weight.shape
    if kh != stride or kw != stride:
        raise DimensionError(
            f"transposed conv requires kernel == stride, got kernel {kh}x{kw}, stride {stride}"
        )
    if x.shape[1] != src_c:
        raise DimensionError(f"input has {x.shape[1]} channels, kernel expects {src_c}")
    n, _, h, w = x.shape
    x3 = x.reshape(n, src_c, h * w)
    y3 = np.matmul(p.weight.reshape(src_c, -1).T, x3)  # (N, dst*k*k, H*W)
    y = y3.reshape(n, dst_c, kh, kw, h, w).transpose(0, 1, 4, 2, 5, 3)
    y = np.ascontiguousarray(y).reshape(n, dst_c, h * stride, w * stride)
    if p.bias is not None:
        y += p.bias[None, :, None, None]
    return y, ConvT2dCache(x, p, stride)


def conv_transpose2d(x: np.ndarray, p: ConvParams, stride: int) -> np.ndarray:
    return conv_transpose2d_fwd(x, p, stride)[0]


def _conv_transpose2d_bwd(cache: ConvT2dCache, gy: np.ndarray):
    x, p, s = cache.x, cache.params, cache.stride
    src_c, dst_c, _, _ = p.weight.shape
    n, _, h, w = x.shape
    gy = np.asarray(gy, dtype=np.float64)
    g6 = gy.reshape(n, dst_c, h, s, w, s).transpose(0, 1, 3, 5, 2, 4)  # (N, dst, k, k, H, W)
    g3 = np.ascontiguousarray(g6).reshape(n, dst_c * s * s, h * w)
    w2 = p.weight.reshape(src_c, -1)
    gx = np.matmul(w2, g3).reshape(x.shape)
    x3 = x.reshape(n, src_c, h * w)
    gw = np.matmul(x3, g3.transpose(0, 2, 1)).sum(axis=0).reshape(p.weight.shape)
    gb = gy.sum(axis=(0, 2, 3)) if p.bias is not None else None
    return gx, ConvGrads(gw, gb)


# ---------------------------------------------------------------------------
# max pooling (non-overlapping k x k windows; ties go to the first entry in
# row-major window order, which keeps the backward routing deterministic)


@dataclass
class MaxPool2dCache:
    idx: np.ndarray  # (N, C, Ho, Wo) flat window-local argmax
    in_shape: tuple[int, ...]
    k: int


def maxpool2d_fwd(x: np.ndarray, k: int):
    x = _as_batch(x)
    n, c, h, w = x.shape
    if h % k or w % k:
        raise DimensionError(f"spatial dims {h}x{w} not divisible by pool size {k}")
    ho, wo = h // k, w // k
    xr = x.reshape(n, c, ho, k, wo, k).transpose(0, 1, 2, 4, 3, 5).reshape(n, c, ho, wo, k * k)
    idx = xr.argmax(axis=4)
    y = np.take_along_axis(xr, idx[..., None], axis=4)[..., 0]
    return (y, idx), MaxPool2dCache(idx, x.shape, k)


def maxpool2d(x: np.ndarray, k: int):
    """Returns (pooled, argmax indices); indices are window-local row-major."""
    return maxpool2d_fwd(x, k)[0]


def _maxpool2d_bwd(cache: MaxPool2dCache, gy: np.ndarray):
    n, c, h, w = cache.in_shape
    k = cache.k
    ho, wo = h // k, w // k
    gy = np.asarray(gy, dtype=np.float64)
    g = np.zeros((n, c, ho, wo, k * k))
    np.put_along_axis(g, cache.idx[..., None], gy[..., None], axis=4)
    gx = g.reshape(n, c, ho, wo, k, k).transpose(0, 1, 2, 4, 3, 5).reshape(n, c, h, w)
    return gx, None


# ---------------------------------------------------------------------------
# ReLU


@dataclass
class ReluCache:
    mask: np.ndarray


def relu_fwd(x: np.ndarray):
    x = np.asarray(x, dtype=np.float64)
    mask = x > 0
    return np.where(mask, x, 0.0), ReluCache(mask)


def relu(x: np.ndarray) -> np.ndarray:
    return relu_fwd(x)[0]


def _relu_bwd(cache: ReluCache, gy: np.ndarray):
    return np.asarray(gy, dtype=np.float64) * cache.mask, None


# ---------------------------------------------------------------------------
# channel concatenation


@dataclass
class ConcatCache:
    split: int  # channel count of the first input


def concat_channels_fwd(a: np.ndarray, b: np.ndarray):
    a, b = _as_batch(a), _as_batch(b)
    if a.shape[0] != b.shape[0] or a.shape[2:] != b.shape[2:]:
        raise DimensionError(f"batch/spatial mismatch: {a.shape} vs {b.shape}")
    return np.concatenate([a, b], axis=1), ConcatCache(a.shape[1])


def concat_channels(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return concat_channels_fwd(a, b)[0]


def _concat_channels_bwd(cache: ConcatCache, gy: np.ndarray):
    gy = np.asarray(gy, dtype=np.float64)
    return (gy[:, : cache.split], gy[:, cache.split :]), None


# ---------------------------------------------------------------------------
# generic dispatch


@singledispatch
def backward(cache, gy):
    """Backward for any cached layer: returns (input grad, param grads).

    The input grad mirrors the forward input structure (a tuple for
    concat_channels).  Param grads are ``ConvGrads`` or None.
    """
    raise TypeError(f"no backward registered for cache type {type(cache).__name__}")


backward.register(Conv2dCache, _conv2d_bwd)
backward.register(Conv2dFftCache, _conv2d_fft_bwd)
backward.register(ConvT2dCache, _conv_transpose2d_bwd)
backward.register(MaxPool2dCache, _maxpool2d_bwd)
backward.register(ReluCache, _relu_bwd)
backward.register(ConcatCache, _concat_channels_bwd)
