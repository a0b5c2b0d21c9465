"""Sensing-matrix diagnostics: coherence, spark, restricted-isometry
constants, and entry-distribution statistics.

Exact spark/RIP are combinatorial, so every enumerating routine carries an
explicit capacity guard and raises instead of silently falling back.  The
Monte-Carlo RIP estimate maximizes over a random subset of supports and is
therefore always a lower bound on the exact constant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .errors import CapacityError

__all__ = [
    "RipReport",
    "BoundCheck",
    "DistributionStats",
    "coherence",
    "spark_bruteforce",
    "rip_constant_exact",
    "rip_constant_montecarlo",
    "coherence_rip_bound_check",
    "gaussianity_stats",
    "welch_bound",
]

SPARK_SUBSET_GUARD = 10**7
RIP_SUPPORT_GUARD = 10**6
RANK_TOLERANCE = 1e-10  # sigma_min/sigma_max below this counts as dependent


@dataclass
class RipReport:
    sparsity: int
    delta: float
    method: str  # "exact" or "montecarlo"
    trials: int | None = None


@dataclass
class BoundCheck:
    holds: bool
    delta: float
    mu: float
    bound: float  # (s-1) * mu
    slack: float  # bound - delta


@dataclass
class DistributionStats:
    mean: float
    std: float
    skewness: float
    excess_kurtosis: float
    bin_edges: np.ndarray
    counts: np.ndarray
    degenerate: bool
    reference_density: np.ndarray  # standard-normal pdf at standardized bin centers


def _as_matrix(mat) -> np.ndarray:
    entries = getattr(mat, "entries", mat)
    m = np.asarray(entries, dtype=np.float64)
    if m.ndim != 2:
        raise ValueError(f"expected a 2-D matrix, got shape {m.shape}")
    return m


def coherence(mat) -> float:
    """Largest normalized inner product between distinct columns, in [0, 1]."""
    b = _as_matrix(mat)
    norms = np.linalg.norm(b, axis=0)
    if np.any(norms == 0.0):
        raise ValueError("coherence undefined for matrices with zero columns")
    g = np.abs((b / norms).T @ (b / norms))
    np.fill_diagonal(g, 0.0)
    return float(min(g.max(), 1.0))


def spark_bruteforce(mat, s_max: int) -> int | None:
    """Smallest number of linearly dependent columns, searched up to s_max.

    Returns the spark if some subset of size <= s_max is dependent; n + 1 if
    the search covered all sizes (s_max >= n) and the matrix has full column
    rank; None when the spark is provably greater than s_max.
    """
    b = _as_matrix(mat)
    m, n = b.shape
    if s_max < 1:
        raise ValueError("s_max must be >= 1")
    top = min(s_max, n)
    if math.comb(n, top) > SPARK_SUBSET_GUARD:
        raise CapacityError(
            f"C({n}, {top}) = {math.comb(n, top)} subsets exceeds guard {SPARK_SUBSET_GUARD}"
        )
    for k in range(1, top + 1):
        if k > m:
            return k  # more columns than rows are always dependent
        for cols in combinations(range(n), k):
            sv = np.linalg.svd(b[:, cols], compute_uv=False)
            if sv[0] == 0.0 or sv[-1] < RANK_TOLERANCE * sv[0]:
                return k
    if s_max >= n:
        return n + 1  # full column rank: no dependent subset exists
    return None


def _support_delta(b: np.ndarray, cols) -> float:
    g = b[:, cols].T @ b[:, cols]
    eig = np.linalg.eigvalsh(g)
    return max(eig[-1] - 1.0, 1.0 - eig[0])


def rip_constant_exact(mat, s: int) -> RipReport:
    """delta_s by exhaustive enumeration of all size-s supports."""
    b = _as_matrix(mat)
    n = b.shape[1]
    if not 1 <= s <= n:
        raise ValueError(f"sparsity {s} outside [1, {n}]")
    if math.comb(n, s) > RIP_SUPPORT_GUARD:
        raise CapacityError(
            f"C({n}, {s}) = {math.comb(n, s)} supports exceeds guard {RIP_SUPPORT_GUARD}"
        )
    delta = max(_support_delta(b, cols) for cols in combinations(range(n), s))
    return RipReport(sparsity=s, delta=float(delta), method="exact")


def rip_constant_montecarlo(mat, s: int, trials: int, seed: int) -> RipReport:
    """delta_s maximized over ``trials`` uniformly random supports (lower bound)."""
    b = _as_matrix(mat)
    n = b.shape[1]
    if not 1 <= s <= n:
        raise ValueError(f"sparsity {s} outside [1, {n}]")
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rng = np.random.default_rng(seed)
    delta = 0.0
    for _ in range(trials):
        cols = rng.choice(n, size=s, replace=False)
        delta = max(delta, _support_delta(b, cols))
    return RipReport(sparsity=s, delta=float(delta), method="montecarlo", trials=trials)


def coherence_rip_bound_check(mat, s: int) -> BoundCheck:
    """Check delta_s <= (s-1) * mu (Gershgorin bound for unit-norm columns)."""
    if s < 2:
        raise ValueError("bound check needs s >= 2")
    mu = coherence(mat)
    delta = rip_constant_exact(mat, s).delta
    bound = (s - 1) * mu
    slack = bound - delta
    return BoundCheck(holds=bool(delta <= bound + 1e-12), delta=delta, mu=mu, bound=bound, slack=slack)


def welch_bound(m: int, n: int) -> float:
    """Lower bound on the coherence of any m x n matrix with unit-norm columns."""
    if n <= m:
        return 0.0
    return math.sqrt((n - m) / (m * (n - 1)))


def gaussianity_stats(mat, bins: int) -> DistributionStats:
    """Entry-distribution moments and histogram for Gaussian-likeness checks.

    Skewness and excess kurtosis are those of the standardized entries; the
    histogram spans [min, max] with equal-width bins, and counts sum to the
    entry count.  ``reference_density`` is the standard-normal pdf evaluated
    at the standardized bin centers, for overlay comparison.
    """
    b = _as_matrix(mat)
    if bins < 2:
        raise ValueError("bins must be >= 2")
    flat = b.reshape(-1)
    mean = float(flat.mean())
    std = float(flat.std())
    degenerate = std == 0.0
    if degenerate:
        z = np.zeros_like(flat)
        skew = 0.0
        kurt = 0.0
    else:
        z = (flat - mean) / std
        skew = float(np.mean(z**3))
        kurt = float(np.mean(z**4) - 3.0)
    counts, edges = np.histogram(flat, bins=bins, range=(flat.min(), flat.max()))
    centers = 0.5 * (edges[:-1] + edges[1:])
    zc = np.zeros_like(centers) if degenerate else (centers - mean) / std
    density = np.exp(-0.5 * zc**2) / math.sqrt(2.0 * math.pi)
    return DistributionStats(
        mean=mean,
        std=std,
        skewness=skew,
        excess_kurtosis=kurt,
        bin_edges=edges,
        counts=counts,
        degenerate=degenerate,
        reference_density=density,
    )
