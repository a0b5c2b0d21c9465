"""Joint training of the sampling, initial-reconstruction, and refinement
parameters with Adam on the combined objective.

Defaults are desk-scale: ~500 patches of 96 x 96, minibatch 16, 60 epochs
with the learning rate stepping 1e-3 / 1e-4 / 1e-5 over epoch thirds.
Runs are deterministic given the seed (fixed shuffles, fixed reduction
order).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import TrainingDiverged
from ..nn import adam_init, adam_step
from .model import BcsNet, NetworkConfig, build_model, loss_and_grads

__all__ = ["TrainConfig", "TrainLog", "default_schedule", "train", "train_fresh"]


def default_schedule(epochs: int) -> list[tuple[int, int, float]]:
    """Three phases over epoch thirds: 1e-3, 1e-4, 1e-5."""
    a = max(1, round(epochs / 3))
    b = max(a + 1, round(2 * epochs / 3))
    if epochs < 3:
        return [(1, epochs, 1e-3)]
    return [(1, a, 1e-3), (a + 1, b, 1e-4), (b + 1, epochs, 1e-5)]


@dataclass
class TrainConfig:
    epochs: int = 60
    batch_size: int = 16
    schedule: list[tuple[int, int, float]] | None = None  # (first, last, lr), 1-based inclusive
    seed: int = 0
    init_loss_weight: float = 1.0

    def __post_init__(self):
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.batch_size < 1:
            raise ValueError("batch size must be >= 1")
        if self.schedule is None:
            self.schedule = default_schedule(self.epochs)
        self._validate_schedule()

    def _validate_schedule(self):
        spans = sorted(self.schedule)
        if spans[0][0] != 1 or spans[-1][1] != self.epochs:
            raise ValueError(f"schedule {self.schedule} does not cover [1, {self.epochs}]")
        for (a0, a1, _), (b0, _, _) in zip(spans, spans[1:]):
            if a1 + 1 != b0:
                raise ValueError(f"schedule ranges must partition [1, {self.epochs}]")
        for a0, a1, lr in spans:
            if a0 > a1 or lr <= 0:
                raise ValueError(f"bad schedule entry ({a0}, {a1}, {lr})")

    def lr_for_epoch(self, epoch: int) -> float:
        for first, last, lr in self.schedule:
            if first <= epoch <= last:
                return lr
        raise ValueError(f"epoch {epoch} outside schedule")


@dataclass
class TrainLog:
    epoch_loss: list[dict] = field(default_factory=list)
    step_loss: list[float] = field(default_factory=list)


def _param_norm(params: dict[str, np.ndarray]) -> float:
    return float(np.sqrt(sum(float(np.sum(p * p)) for p in params.values())))


def train(model: BcsNet, patches: np.ndarray, cfg: TrainConfig) -> tuple[BcsNet, TrainLog]:
    """Train a model on a stack of patches (K, 1, P, P) or (K, P, P).

    Patch dims must be multiples of the model's pad multiple.  Returns a new
    model (inputs untouched) plus the loss log.  Raises TrainingDiverged with
    diagnostics on a non-finite loss.
    """
    patches = np.asarray(patches, dtype=np.float64)
    if patches.ndim == 3:
        patches = patches[:, None]
    if patches.ndim != 4 or patches.shape[1] != 1:
        raise ValueError(f"expected patch stack (K, 1, P, P), got {patches.shape}")
    net_cfg = model.config
    if patches.shape[2] % net_cfg.pad_multiple or patches.shape[3] % net_cfg.pad_multiple:
        raise ValueError(
            f"patch dims {patches.shape[2:]} must be multiples of {net_cfg.pad_multiple}"
        )

    params = dict(model.params)
    state = adam_init(params)
    rng = np.random.default_rng(cfg.seed)
    log = TrainLog()
    k = patches.shape[0]
    step = 0
    for epoch in range(1, cfg.epochs + 1):
        lr = cfg.lr_for_epoch(epoch)
        order = rng.permutation(k)
        epoch_total = epoch_main = epoch_init = 0.0
        n_batches = 0
        for start in range(0, k, cfg.batch_size):
            batch = patches[order[start : start + cfg.batch_size]]
            total, main, init, grads = loss_and_grads(
                params, net_cfg, batch, cfg.init_loss_weight
            )
            if not np.isfinite(total):
                raise TrainingDiverged(step=step, lr=lr, param_norm=_param_norm(params))
            params, state = adam_step(params, grads, state, lr)
            step += 1
            log.step_loss.append(total)
            epoch_total += total
            epoch_main += main
            epoch_init += init
            n_batches += 1
        log.epoch_loss.append(
            {
                "epoch": epoch,
                "lr": lr,
                "loss_total": epoch_total / n_batches,
                "loss_main": epoch_main / n_batches,
                "loss_init": epoch_init / n_batches,
            }
        )
    return BcsNet(net_cfg, params), log


def train_fresh(
    net_cfg: NetworkConfig,
    patches: np.ndarray,
    cfg: TrainConfig,
) -> tuple[BcsNet, TrainLog]:
    """Build a seeded model (empirical autocorrelation from the patches) and train it."""
    patches = np.asarray(patches, dtype=np.float64)
    model = build_model(net_cfg, cfg.seed, patches)
    return train(model, patches, cfg)
