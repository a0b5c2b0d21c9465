"""Central finite-difference validation of analytic gradients.

``grad_check`` scores a differentiable op by perturbing each input
coordinate by +/-eps and comparing the analytic gradient against the
central difference of a fixed random linear functional of the output.
Large tensors can be spot-checked on a seeded coordinate subset via
``max_coords`` (full-model parameter sets are too big for exhaustive
differencing within any sane runtime).
"""

from __future__ import annotations

from collections.abc import Callable, Sequence

import numpy as np

__all__ = ["grad_check"]


def grad_check(
    fn: Callable,
    arrays: Sequence[np.ndarray],
    eps: float = 1e-5,
    seed: int = 0,
    max_coords: int | None = None,
) -> float:
    """Max relative error between analytic and numeric gradients.

    ``fn(*arrays)`` must return ``(out, grad_fn)`` where ``grad_fn(upstream)``
    yields one gradient per entry of ``arrays``.  The scalar objective is
    ``sum(u * out)`` for a fixed seeded ``u``; relative error per coordinate is
    ``|analytic - numeric| / max(|analytic|, |numeric|, 1e-8)``.

    Inputs should avoid ReLU kinks and pooling ties (jitter them); the op must
    be differentiable at the test point.
    """
    arrays = [np.asarray(a, dtype=np.float64) for a in arrays]
    rng = np.random.default_rng(seed)

    out, grad_fn = fn(*arrays)
    out = np.asarray(out, dtype=np.float64)
    u = rng.standard_normal(out.shape)
    analytic = grad_fn(u)
    if len(analytic) != len(arrays):
        raise ValueError(f"grad_fn returned {len(analytic)} grads for {len(arrays)} inputs")

    def objective() -> float:
        return float(np.sum(u * np.asarray(fn(*arrays)[0], dtype=np.float64)))

    worst = 0.0
    for arr, ana in zip(arrays, analytic):
        flat = arr.reshape(-1)
        ana_flat = np.asarray(ana, dtype=np.float64).reshape(-1)
        n = flat.size
        if max_coords is not None and n > max_coords:
            coords = np.sort(rng.choice(n, size=max_coords, replace=False))
        else:
            coords = range(n)
        for i in coords:
            saved = flat[i]
            flat[i] = saved + eps
            lo_plus = objective()
            flat[i] = saved - eps
            lo_minus = objective()
            flat[i] = saved
            numeric = (lo_plus - lo_minus) / (2.0 * eps)
            err = abs(ana_flat[i] - numeric) / max(abs(ana_flat[i]), abs(numeric), 1e-8)
            if err > worst:
                worst = err
    return worst
