"""Learned sampling + octave U-net reconstruction pipeline."""

from .model import (
    BcsNet,
    NetworkConfig,
    build_model,
    block_merge,
    export_lsm,
    forward,
    forward_train,
    init_params,
    initial_forward,
    initial_reconstruction,
    load_model,
    loss_and_grads,
    loss_terms,
    measure,
    parameter_specs,
    reconstruct_from_measurements,
    save_model,
    unet_forward,
)
from .octave import (
    OctConvParams,
    OctFeature,
    OctTConvParams,
    mod_oct_conv,
    mod_oct_conv_fwd,
    oct_transpose_conv,
    oct_transpose_conv_fwd,
    split_channels,
)
from .train import TrainConfig, TrainLog, default_schedule, train, train_fresh

__all__ = [
    "BcsNet",
    "NetworkConfig",
    "OctConvParams",
    "OctFeature",
    "OctTConvParams",
    "TrainConfig",
    "TrainLog",
    "block_merge",
    "build_model",
    "default_schedule",
    "export_lsm",
    "forward",
    "forward_train",
    "init_params",
    "initial_forward",
    "initial_reconstruction",
    "load_model",
    "loss_and_grads",
    "loss_terms",
    "measure",
    "mod_oct_conv",
    "mod_oct_conv_fwd",
    "oct_transpose_conv",
    "oct_transpose_conv_fwd",
    "parameter_specs",
    "reconstruct_from_measurements",
    "save_model",
    "split_channels",
    "train",
    "train_fresh",
    "unet_forward",
]
