"""Adam over flat name->array parameter dicts.

The update is the bias-corrected form with epsilon inside the square root:
``p -= lr * m_hat / sqrt(v_hat + eps)``.  For a fresh scalar with gradient 1
and lr 1e-3 the first step is -lr/sqrt(1 + eps) = -9.99999995e-4.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = ["AdamState", "adam_init", "adam_step"]


@dataclass
class AdamState:
    m: dict[str, np.ndarray] = field(default_factory=dict)
    v: dict[str, np.ndarray] = field(default_factory=dict)
    step: int = 0


def adam_init(params: dict[str, np.ndarray]) -> AdamState:
    return AdamState(
        m={k: np.zeros_like(p) for k, p in params.items()},
        v={k: np.zeros_like(p) for k, p in params.items()},
        step=0,
    )


def adam_step(
    params: dict[str, np.ndarray],
    grads: dict[str, np.ndarray],
    state: AdamState,
    lr: float,
    beta1: float = 0.9,
    beta2: float = 0.999,
    eps: float = 1e-8,
) -> tuple[dict[str, np.ndarray], AdamState]:
    """One Adam step; returns fresh params/state (inputs untouched)."""
    step = state.step + 1
    c1 = 1.0 - beta1**step
    c2 = 1.0 - beta2**step
    new_params: dict[str, np.ndarray] = {}
    new_m: dict[str, np.ndarray] = {}
    new_v: dict[str, np.ndarray] = {}
    for key in params:
        g = grads[key]
        if g.shape != params[key].shape:
            raise ValueError(f"gradient shape {g.shape} != param shape {params[key].shape} for {key!r}")
        m = beta1 * state.m[key] + (1.0 - beta1) * g
        v = beta2 * state.v[key] + (1.0 - beta2) * g * g
        new_params[key] = params[key] - lr * (m / c1) / np.sqrt(v / c2 + eps)
        new_m[key] = m
        new_v[key] = v
    return new_params, AdamState(new_m, new_v, step)
