"""Minimal dense tensor engine: layers, Adam, and gradient checking."""

from .gradcheck import grad_check
from .layers import (
    ConvGrads,
    ConvParams,
    backward,
    concat_channels,
    concat_channels_fwd,
    conv2d,
    conv2d_fwd,
    conv_transpose2d,
    conv_transpose2d_fwd,
    maxpool2d,
    maxpool2d_fwd,
    relu,
    relu_fwd,
    same_padding,
)
from .optim import AdamState, adam_init, adam_step

__all__ = [
    "ConvGrads",
    "ConvParams",
    "AdamState",
    "adam_init",
    "adam_step",
    "backward",
    "concat_channels",
    "concat_channels_fwd",
    "conv2d",
    "conv2d_fwd",
    "conv_transpose2d",
    "conv_transpose2d_fwd",
    "grad_check",
    "maxpool2d",
    "maxpool2d_fwd",
    "relu",
    "relu_fwd",
    "same_padding",
]
