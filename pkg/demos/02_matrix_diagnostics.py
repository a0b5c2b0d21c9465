"""Sensing-matrix theory instruments at desk scale.

Computes coherence, spark, and restricted-isometry constants exactly on
small matrices, checks the classical bounds connecting them, and compares
Monte-Carlo RIP estimates against exhaustive enumeration.
"""

import numpy as np

from blockcs import analysis, sensing

rng = np.random.default_rng(1)

print("=== orthonormal columns are a perfect isometry ===")
q, _ = np.linalg.qr(rng.standard_normal((8, 8)))
print(f"coherence {analysis.coherence(q):.3f}, "
      f"delta_2 {analysis.rip_constant_exact(q, 2).delta:.2e}, "
      f"spark {analysis.spark_bruteforce(q, 8)}")

print("\n=== a random 6 x 12 matrix with unit columns ===")
b = rng.standard_normal((6, 12))
b /= np.linalg.norm(b, axis=0)
mu = analysis.coherence(b)
print(f"coherence {mu:.4f} (Welch lower bound {analysis.welch_bound(6, 12):.4f})")
for s in (2, 3):
    exact = analysis.rip_constant_exact(b, s)
    mc = analysis.rip_constant_montecarlo(b, s, trials=50, seed=0)
    bound = analysis.coherence_rip_bound_check(b, s)
    print(f"s={s}: exact delta {exact.delta:.4f}, Monte-Carlo (50 trials) {mc.delta:.4f}, "
          f"(s-1)*mu bound {bound.bound:.4f} holds={bound.holds}")
spark = analysis.spark_bruteforce(b, 6)
print(f"spark: {spark if spark is not None else '> 6'}")

print("\n=== planted dependence is found by the spark search ===")
planted = rng.standard_normal((5, 9))
planted[:, 8] = 2.0 * planted[:, 1] - planted[:, 4]
print(f"spark {analysis.spark_bruteforce(planted, 4)} (a 3-column dependence was planted)")

print("\n=== entry distribution of a Gaussian sensing matrix ===")
matrix = sensing.make_gaussian(sensing.rows_for_rate(0.1, 32), 32, seed=3)
stats = analysis.gaussianity_stats(matrix, bins=11)
print(f"mean {stats.mean:+.5f}, std {stats.std:.5f}, "
      f"skewness {stats.skewness:+.4f}, excess kurtosis {stats.excess_kurtosis:+.4f}")
peak = stats.counts.max()
for lo, hi, count in zip(stats.bin_edges[:-1], stats.bin_edges[1:], stats.counts):
    bar = "#" * int(40 * count / peak)
    print(f"  [{lo:+.3f}, {hi:+.3f})  {count:6d} {bar}")
