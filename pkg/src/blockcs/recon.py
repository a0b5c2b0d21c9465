"""Classical block-CS reconstruction: linear-MMSE initialization, two-stage
iterative hard thresholding, and reweighted least squares, all in an
orthonormal 2-D DCT sparsifying basis.

Solvers operate on one vectorized block (length n).  When n is a perfect
square the sparsifying transform is the separable 2-D DCT of the
sqrt(n) x sqrt(n) block; otherwise it falls back to the 1-D DCT.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.fft import dct, dctn, idctn

from .errors import DimensionError, SolverError
from .sensing import SensingMatrix, MeasurementSet, blocks_to_image
from .image import GrayImage

__all__ = [
    "AutocorrelationModel",
    "ReconConfig",
    "ReconResult",
    "ar1_autocorrelation",
    "estimate_autocorrelation",
    "mmse_matrix",
    "dct2",
    "idct2",
    "sparsifying_basis",
    "iht_reconstruct",
    "irls_reconstruct",
    "reconstruct_image",
]

IRLS_WEIGHT_EPS = 1e-6
MMSE_CONDITION_LIMIT = 1e12


@dataclass
class AutocorrelationModel:
    """Second-moment model of vectorized blocks (symmetric PSD)."""

    matrix: np.ndarray
    source: str  # "empirical" or "ar1"
    decay: float | None = None

    def __post_init__(self):
        self.matrix = np.asarray(self.matrix, dtype=np.float64)
        if self.matrix.ndim != 2 or self.matrix.shape[0] != self.matrix.shape[1]:
            raise DimensionError(f"autocorrelation must be square, got {self.matrix.shape}")


@dataclass
class ReconConfig:
    sparsity: int = 8
    lam: float = 0.01
    max_iter: int = 200
    tol: float = 1e-8

    def __post_init__(self):
        if self.sparsity < 1:
            raise ValueError("sparsity must be >= 1")
        if self.tol <= 0:
            raise ValueError("tolerance must be > 0")
        if self.lam < 0:
            raise ValueError("regularization weight must be >= 0")


@dataclass
class ReconResult:
    x: np.ndarray
    converged: bool
    iterations: int
    residual_history: list[float] = field(default_factory=list)
    objective_history: list[float] = field(default_factory=list)


def ar1_autocorrelation(block_size: int, decay: float = 0.95) -> AutocorrelationModel:
    """Separable AR(1) model: rho[j, k] = decay ** manhattan(j, k)."""
    idx = np.arange(block_size**2)
    ri, ci = idx // block_size, idx % block_size
    dist = np.abs(ri[:, None] - ri[None, :]) + np.abs(ci[:, None] - ci[None, :])
    return AutocorrelationModel(decay**dist, "ar1", decay)


def estimate_autocorrelation(patches: np.ndarray, block_size: int | None = None) -> AutocorrelationModel:
    """Sample second-moment matrix of mean-removed vectorized blocks.

    Needs at least n = A^2 samples; with fewer it falls back to AR1(0.95).
    The result is symmetrized and eigenvalue-floored at zero.
    """
    patches = np.asarray(patches, dtype=np.float64)
    if patches.ndim != 2:
        raise DimensionError(f"expected (count, A^2) patch stack, got {patches.shape}")
    n = patches.shape[1]
    if block_size is None:
        block_size = int(round(math.sqrt(n)))
    if block_size**2 != n:
        raise DimensionError(f"patch length {n} is not a square block")
    if patches.shape[0] < n:
        return ar1_autocorrelation(block_size)
    centered = patches - patches.mean(axis=0)
    rho = centered.T @ centered / patches.shape[0]
    rho = 0.5 * (rho + rho.T)
    eigval, eigvec = np.linalg.eigh(rho)
    rho = (eigvec * np.clip(eigval, 0.0, None)) @ eigvec.T
    rho = 0.5 * (rho + rho.T)
    return AutocorrelationModel(rho, "empirical")


def mmse_matrix(
    matrix: SensingMatrix | np.ndarray,
    rho: AutocorrelationModel | np.ndarray | None = None,
    return_jitter_flag: bool = False,
):
    """Linear-MMSE reconstruction matrix rho B^T (B rho B^T)^-1.

    ``rho=None`` means the identity prior.  If the inner matrix is
    ill-conditioned (cond >= 1e12) a Tikhonov jitter of 1e-10 * trace / m is
    added and the jitter flag is set.
    """
    b = np.asarray(getattr(matrix, "entries", matrix), dtype=np.float64)
    m = b.shape[0]
    if rho is None:
        rho_b_t = b.T.copy()
    else:
        r = np.asarray(getattr(rho, "matrix", rho), dtype=np.float64)
        if r.shape != (b.shape[1], b.shape[1]):
            raise DimensionError(f"rho shape {r.shape} incompatible with matrix {b.shape}")
        rho_b_t = r @ b.T
    inner = b @ rho_b_t
    jittered = False
    if np.linalg.cond(inner) >= MMSE_CONDITION_LIMIT:
        inner = inner + (1e-10 * np.trace(inner) / m) * np.eye(m)
        jittered = True
    recon = np.linalg.solve(inner.T, rho_b_t.T).T  # rho B^T inner^-1
    if return_jitter_flag:
        return recon, jittered
    return recon


# ---------------------------------------------------------------------------
# sparsifying transform


def dct2(block: np.ndarray) -> np.ndarray:
    """Orthonormal type-II 2-D DCT of a square block."""
    block = np.asarray(block, dtype=np.float64)
    if block.ndim != 2 or block.shape[0] != block.shape[1]:
        raise DimensionError(f"dct2 expects a square block, got {block.shape}")
    return dctn(block, type=2, norm="ortho")


def idct2(coeffs: np.ndarray) -> np.ndarray:
    coeffs = np.asarray(coeffs, dtype=np.float64)
    if coeffs.ndim != 2 or coeffs.shape[0] != coeffs.shape[1]:
        raise DimensionError(f"idct2 expects a square block, got {coeffs.shape}")
    return idctn(coeffs, type=2, norm="ortho")


def sparsifying_basis(n: int) -> np.ndarray:
    """Analysis matrix Psi with coeffs = Psi @ x for a length-n block vector.

    2-D DCT (Kronecker of two 1-D DCT matrices, raster ordering) when n is a
    perfect square, else the 1-D DCT matrix.
    """
    a = int(round(math.sqrt(n)))
    d1 = dct(np.eye(a if a * a == n else n), type=2, norm="ortho", axis=0)
    if a * a == n:
        return np.kron(d1, d1)
    return d1


def _hard_threshold(coeffs: np.ndarray, keep: int) -> np.ndarray:
    if keep >= coeffs.size:
        return coeffs
    out = np.zeros_like(coeffs)
    top = np.argpartition(np.abs(coeffs), -keep)[-keep:]
    out[top] = coeffs[top]
    return out


def iht_reconstruct(
    matrix,
    y: np.ndarray,
    cfg: ReconConfig,
    rho: AutocorrelationModel | np.ndarray | None = None,
) -> ReconResult:
    """Two-stage iterative hard thresholding in the DCT basis.

    Starts from the linear-MMSE estimate (identity prior unless ``rho``
    supplies a block autocorrelation), runs gradient steps with
    mu = 1/||B||_2^2, and hard-thresholds the transform coefficients: the
    first stage keeps 2s coefficients, the second tightens to s.  Residuals
    are tracked from the first projected iterate; if the iteration budget
    runs out the lowest-residual s-sparse iterate is returned with
    ``converged=False``.
    """
    b = np.asarray(getattr(matrix, "entries", matrix), dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if y.shape != (b.shape[0],):
        raise DimensionError(f"measurement length {y.shape} != matrix rows {b.shape[0]}")
    n = b.shape[1]
    psi = sparsifying_basis(n)
    mu = 1.0 / max(np.linalg.norm(b, 2) ** 2, 1e-300)
    s = min(cfg.sparsity, n)

    x = mmse_matrix(b, rho) @ y
    history: list[float] = []
    best_x, best_res = None, np.inf
    iters = 0

    def run_stage(x, keep, budget, track_best):
        nonlocal iters, best_x, best_res
        for _ in range(budget):
            iters += 1
            grad = b.T @ (y - b @ x)
            v = _hard_threshold(psi @ (x + mu * grad), keep)
            x_new = psi.T @ v
            res = float(np.linalg.norm(y - b @ x_new))
            history.append(res)
            if track_best and res < best_res:
                best_res, best_x = res, x_new
            delta = np.linalg.norm(x_new - x)
            x = x_new
            if delta <= cfg.tol * max(1.0, np.linalg.norm(x)):
                return x, True
        return x, False

    half = cfg.max_iter // 2
    x, _ = run_stage(x, min(2 * s, n), half, track_best=False)
    x, converged = run_stage(x, s, cfg.max_iter - half, track_best=True)
    if not converged and best_x is not None:
        x = best_x
    return ReconResult(x=x, converged=converged, iterations=iters, residual_history=history)


def irls_reconstruct(matrix, y: np.ndarray, cfg: ReconConfig) -> ReconResult:
    """Reweighted least squares for 0.5||Bx - y||^2 + lam * ||Psi x||_1.

    Each sweep solves (B^T B + lam Psi^T W Psi) x = B^T y with
    W = diag(1 / (|Psi x| + eps)); the objective is monotone non-increasing
    up to O(n * lam * eps^2).
    """
    b = np.asarray(getattr(matrix, "entries", matrix), dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if y.shape != (b.shape[0],):
        raise DimensionError(f"measurement length {y.shape} != matrix rows {b.shape[0]}")
    n = b.shape[1]
    psi = sparsifying_basis(n)
    bt_b = b.T @ b
    bt_y = b.T @ y

    def objective(x: np.ndarray) -> float:
        return float(0.5 * np.sum((b @ x - y) ** 2) + cfg.lam * np.sum(np.abs(psi @ x)))

    if cfg.lam == 0.0:
        x, *_ = np.linalg.lstsq(b, y, rcond=None)
        return ReconResult(x=x, converged=True, iterations=1, objective_history=[objective(x)])

    x = b.T @ y
    obj_hist = [objective(x)]
    for it in range(1, cfg.max_iter + 1):
        w = 1.0 / (np.abs(psi @ x) + IRLS_WEIGHT_EPS)
        lhs = bt_b + cfg.lam * (psi.T * w) @ psi
        try:
            x_new = np.linalg.solve(lhs, bt_y)
        except np.linalg.LinAlgError as exc:
            raise SolverError(f"reweighted solve failed: {exc}", iteration=it) from exc
        obj_hist.append(objective(x_new))
        delta = np.linalg.norm(x_new - x)
        x = x_new
        if delta <= cfg.tol * max(1.0, np.linalg.norm(x)):
            return ReconResult(x=x, converged=True, iterations=it, objective_history=obj_hist)
    return ReconResult(x=x, converged=False, iterations=cfg.max_iter, objective_history=obj_hist)


def reconstruct_image(
    matrix: SensingMatrix,
    mset: MeasurementSet,
    method: str = "mmse",
    cfg: ReconConfig | None = None,
    rho: AutocorrelationModel | None = None,
    crop: tuple[int, int] | None = None,
) -> GrayImage:
    """Reconstruct every block of a MeasurementSet and assemble the image.

    ``method`` is one of mmse, iht, irls.  ``crop`` optionally restores
    pre-padding dimensions.
    """
    if mset.block_size != matrix.block_size:
        raise DimensionError(
            f"measurement block size {mset.block_size} != matrix block size {matrix.block_size}"
        )
    cfg = cfg or ReconConfig()
    if method == "mmse":
        recon = mmse_matrix(matrix, rho)
        blocks = mset.vectors @ recon.T
    elif method == "iht":
        blocks = np.stack([iht_reconstruct(matrix, v, cfg, rho).x for v in mset.vectors])
    elif method == "irls":
        blocks = np.stack([irls_reconstruct(matrix, v, cfg).x for v in mset.vectors])
    else:
        raise ValueError(f"unknown reconstruction method {method!r}")
    pixels = blocks_to_image(blocks, mset.grid_rows, mset.grid_cols, mset.block_size)
    h, w = crop if crop is not None else pixels.shape
    return GrayImage(pixels, h, w).cropped()
