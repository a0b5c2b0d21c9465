"""JSON run configuration with full-object validation up front.

A run config bundles the sampling rate and block size with the network,
training, and dataset sections.  Validation rejects unknown keys and bad
ranges before any work starts, so a typo cannot silently train the wrong
model.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from .dataset import DatasetSpec
from .errors import ConfigError
from .net import NetworkConfig, TrainConfig

__all__ = ["RunConfig", "load_run_config", "parse_run_config"]


@dataclass
class RunConfig:
    network: NetworkConfig
    train: TrainConfig
    dataset: DatasetSpec
    model_path: str | None = None


def _check_keys(section: dict, allowed: set[str], where: str) -> None:
    unknown = set(section) - allowed
    if unknown:
        raise ConfigError(f"unknown keys in {where}: {sorted(unknown)}")


def _section(cfg: dict, name: str) -> dict:
    value = cfg.get(name, {})
    if not isinstance(value, dict):
        raise ConfigError(f"section {name!r} must be an object")
    return value


def parse_run_config(cfg: dict, source_dir: str | None = None) -> RunConfig:
    if not isinstance(cfg, dict):
        raise ConfigError("run config must be a JSON object")
    _check_keys(cfg, {"rate", "block_size", "network", "train", "dataset", "output"}, "run config")

    net_section = _section(cfg, "network")
    _check_keys(net_section, {"base_width", "depth", "oct_ratio"}, "network")
    try:
        network = NetworkConfig(
            block_size=int(cfg.get("block_size", 32)),
            rate=float(cfg.get("rate", 0.1)),
            base_width=int(net_section.get("base_width", 16)),
            depth=int(net_section.get("depth", 2)),
            oct_ratio=float(net_section.get("oct_ratio", 0.5)),
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad network section: {exc}") from exc

    train_section = _section(cfg, "train")
    _check_keys(
        train_section,
        {"epochs", "batch_size", "schedule", "seed", "init_loss_weight"},
        "train",
    )
    schedule = train_section.get("schedule")
    if schedule is not None:
        try:
            schedule = [(int(a), int(b), float(lr)) for a, b, lr in schedule]
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad schedule: {exc}") from exc
    try:
        train = TrainConfig(
            epochs=int(train_section.get("epochs", 60)),
            batch_size=int(train_section.get("batch_size", 16)),
            schedule=schedule,
            seed=int(train_section.get("seed", 0)),
            init_loss_weight=float(train_section.get("init_loss_weight", 1.0)),
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad train section: {exc}") from exc

    ds_section = _section(cfg, "dataset")
    _check_keys(
        ds_section,
        {
            "source_dir",
            "patch_size",
            "patches_per_image",
            "flips",
            "rotations",
            "split_seed",
            "holdout_fraction",
            "max_patches",
        },
        "dataset",
    )
    src = source_dir or ds_section.get("source_dir", "")
    max_patches = ds_section.get("max_patches")
    try:
        dataset = DatasetSpec(
            source_dir=str(src),
            patch_size=int(ds_section.get("patch_size", 96)),
            patches_per_image=int(ds_section.get("patches_per_image", 8)),
            flips=bool(ds_section.get("flips", True)),
            rotations=bool(ds_section.get("rotations", True)),
            split_seed=int(ds_section.get("split_seed", 0)),
            holdout_fraction=float(ds_section.get("holdout_fraction", 0.2)),
            max_patches=None if max_patches is None else int(max_patches),
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad dataset section: {exc}") from exc
    if dataset.patch_size % network.pad_multiple:
        raise ConfigError(
            f"patch size {dataset.patch_size} must be a multiple of {network.pad_multiple} "
            f"(block size and pooling depth)"
        )

    out_section = _section(cfg, "output")
    _check_keys(out_section, {"model"}, "output")
    model_path = out_section.get("model")
    return RunConfig(network, train, dataset, model_path)


def load_run_config(path: str, source_dir: str | None = None) -> RunConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            cfg = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON in {path!r}: {exc}") from exc
    return parse_run_config(cfg, source_dir)
