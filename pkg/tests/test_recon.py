"""Classical reconstruction: MMSE matrix identities, autocorrelation
models, DCT orthonormality, planted-signal IHT recovery, and IRLS against
a coordinate-descent L1 oracle."""

import numpy as np
import pytest

from blockcs.recon import (
    ReconConfig,
    ar1_autocorrelation,
    dct2,
    estimate_autocorrelation,
    idct2,
    iht_reconstruct,
    irls_reconstruct,
    mmse_matrix,
    sparsifying_basis,
)
from blockcs.sensing import SensingMatrix, make_gaussian


class TestMmseMatrix:
    def test_orthonormal_rows_identity_prior(self):
        rng = np.random.default_rng(0)
        q, _ = np.linalg.qr(rng.standard_normal((16, 16)))
        b = q[:, :4].T  # 4 orthonormal rows of length 16
        recon = mmse_matrix(b)
        np.testing.assert_allclose(recon, b.T, atol=1e-10)

    def test_square_invertible_gives_inverse(self):
        rng = np.random.default_rng(1)
        b = rng.standard_normal((6, 6)) + 3 * np.eye(6)
        recon = mmse_matrix(b)
        np.testing.assert_allclose(recon, np.linalg.inv(b), atol=1e-8)

    def test_matches_direct_formula_with_ar1(self):
        rng = np.random.default_rng(2)
        b = rng.standard_normal((4, 16))
        rho = ar1_autocorrelation(4, 0.9)
        recon = mmse_matrix(b, rho)
        # independent dense evaluation
        r = rho.matrix
        expected = r @ b.T @ np.linalg.inv(b @ r @ b.T)
        np.testing.assert_allclose(recon, expected, atol=1e-9)

    def test_right_inverse_identity(self):
        rng = np.random.default_rng(3)
        b = rng.standard_normal((5, 12))
        recon = mmse_matrix(b)
        np.testing.assert_allclose(b @ recon, np.eye(5), atol=1e-8)

    def test_jitter_flag_on_singular_inner(self):
        b = np.zeros((2, 4))
        b[0, 0] = 1.0
        b[1, 0] = 1.0  # duplicated rows: B B^T singular
        recon, jittered = mmse_matrix(b, return_jitter_flag=True)
        assert jittered
        assert np.all(np.isfinite(recon))

    def test_accepts_sensing_matrix(self):
        m = make_gaussian(4, 4, seed=0)
        recon = mmse_matrix(m)
        assert recon.shape == (16, 4)


class TestAutocorrelation:
    def test_ar1_diagonal_is_one(self):
        rho = ar1_autocorrelation(5, 0.95)
        np.testing.assert_allclose(np.diag(rho.matrix), 1.0)

    def test_ar1_adjacent_entry(self):
        rho = ar1_autocorrelation(4, 0.95)
        assert rho.matrix[0, 1] == pytest.approx(0.95)  # horizontal neighbor
        assert rho.matrix[0, 4] == pytest.approx(0.95)  # vertical neighbor
        assert rho.matrix[0, 5] == pytest.approx(0.95**2)  # diagonal neighbor

    def test_ar1_symmetric_psd(self):
        rho = ar1_autocorrelation(6, 0.9)
        np.testing.assert_allclose(rho.matrix, rho.matrix.T, atol=1e-12)
        assert np.linalg.eigvalsh(rho.matrix).min() > -1e-10

    def test_empirical_iid_noise_approaches_scaled_identity(self):
        rng = np.random.default_rng(4)
        sigma = 0.3
        patches = sigma * rng.standard_normal((20000, 16))
        rho = estimate_autocorrelation(patches, 4)
        assert rho.source == "empirical"
        off_diag = rho.matrix - np.diag(np.diag(rho.matrix))
        assert np.abs(np.diag(rho.matrix) - sigma**2).max() < 0.02
        assert np.abs(off_diag).max() < 0.02

    def test_falls_back_to_ar1_with_few_patches(self):
        patches = np.random.default_rng(5).standard_normal((10, 16))
        rho = estimate_autocorrelation(patches, 4)
        assert rho.source == "ar1"

    def test_empirical_is_psd(self):
        rng = np.random.default_rng(6)
        patches = rng.random((300, 16))
        rho = estimate_autocorrelation(patches, 4)
        assert np.linalg.eigvalsh(rho.matrix).min() >= -1e-10


class TestDct:
    def test_constant_block_dc_coefficient(self):
        a = 8
        c = 0.37
        coeffs = dct2(np.full((a, a), c))
        assert coeffs[0, 0] == pytest.approx(c * a, abs=1e-12)
        coeffs[0, 0] = 0.0
        assert np.abs(coeffs).max() < 1e-12

    def test_round_trip(self):
        rng = np.random.default_rng(7)
        x = rng.standard_normal((16, 16))
        np.testing.assert_allclose(idct2(dct2(x)), x, atol=1e-12)

    def test_parseval(self):
        rng = np.random.default_rng(8)
        x = rng.standard_normal((12, 12))
        assert np.linalg.norm(x) == pytest.approx(np.linalg.norm(dct2(x)), abs=1e-12)

    def test_basis_matrix_matches_dct2(self):
        rng = np.random.default_rng(9)
        x = rng.standard_normal((6, 6))
        psi = sparsifying_basis(36)
        np.testing.assert_allclose(psi @ x.reshape(-1), dct2(x).reshape(-1), atol=1e-12)

    def test_basis_matrix_orthonormal(self):
        for n in (16, 12):  # square and non-square lengths
            psi = sparsifying_basis(n)
            np.testing.assert_allclose(psi.T @ psi, np.eye(n), atol=1e-12)


class TestIht:
    def test_identity_sensing_recovers_immediately(self):
        rng = np.random.default_rng(10)
        x = rng.standard_normal(16)
        result = iht_reconstruct(np.eye(16), x, ReconConfig(sparsity=16, max_iter=10))
        np.testing.assert_allclose(result.x, x, atol=1e-8)

    def test_zero_measurements(self):
        b = make_gaussian(8, 4, seed=11)
        result = iht_reconstruct(b, np.zeros(8), ReconConfig(sparsity=3))
        np.testing.assert_allclose(result.x, np.zeros(16), atol=1e-12)

    def test_planted_signal_recovery_rate(self):
        # n=64, m=32, s=3: noiseless recovery in >= 95/100 seeded trials.
        # Planted coefficients have magnitude in [1, 2] with random signs so
        # the instances are well separated from the noise floor.
        n, m, s = 64, 32, 3
        psi = sparsifying_basis(n)
        successes = 0
        for seed in range(100):
            rng = np.random.default_rng(seed)
            b = rng.standard_normal((m, n)) / np.sqrt(m)
            coeffs = np.zeros(n)
            support = rng.choice(n, size=s, replace=False)
            coeffs[support] = rng.uniform(1.0, 2.0, s) * rng.choice([-1.0, 1.0], s)
            x_true = psi.T @ coeffs
            y = b @ x_true
            result = iht_reconstruct(b, y, ReconConfig(sparsity=s, max_iter=400, tol=1e-12))
            rel = np.linalg.norm(result.x - x_true) / np.linalg.norm(x_true)
            if rel < 1e-6:
                successes += 1
        assert successes >= 95

    def test_final_residual_not_above_first_projected(self):
        rng = np.random.default_rng(12)
        b = rng.standard_normal((10, 25)) / np.sqrt(10)
        psi = sparsifying_basis(25)
        coeffs = np.zeros(25)
        coeffs[[3, 11]] = [2.0, -1.5]
        y = b @ (psi.T @ coeffs)
        result = iht_reconstruct(b, y, ReconConfig(sparsity=2, max_iter=200, tol=1e-12))
        assert result.residual_history[-1] <= result.residual_history[0] + 1e-12


def oracle_coordinate_descent_l1(b, y, lam, max_sweeps=200_000, tol=1e-13):
    """Independent lasso oracle: coordinate descent in the DCT coefficient
    domain (x = Psi^T z turns the problem into standard lasso in z); sweeps
    until a full pass moves no coordinate by more than ``tol``."""
    psi = sparsifying_basis(b.shape[1])
    a = b @ psi.T
    n = a.shape[1]
    z = np.zeros(n)
    col_sq = np.sum(a * a, axis=0)
    r = y - a @ z
    for _ in range(max_sweeps):
        biggest = 0.0
        for j in range(n):
            if col_sq[j] == 0.0:
                continue
            zj_old = z[j]
            rho_j = a[:, j] @ r + col_sq[j] * zj_old
            zj_new = np.sign(rho_j) * max(abs(rho_j) - lam, 0.0) / col_sq[j]
            if zj_new != zj_old:
                r += a[:, j] * (zj_old - zj_new)
                z[j] = zj_new
                biggest = max(biggest, abs(zj_new - zj_old))
        if biggest < tol:
            break
    return psi.T @ z


def l1_objective(b, y, lam, x):
    psi = sparsifying_basis(b.shape[1])
    return 0.5 * np.sum((b @ x - y) ** 2) + lam * np.sum(np.abs(psi @ x))


class TestIrls:
    def test_unregularized_square_system(self):
        rng = np.random.default_rng(13)
        b = rng.standard_normal((9, 9)) + 3 * np.eye(9)
        x_true = rng.standard_normal(9)
        result = irls_reconstruct(b, b @ x_true, ReconConfig(lam=0.0))
        np.testing.assert_allclose(result.x, x_true, atol=1e-8)

    def test_zero_measurements(self):
        b = make_gaussian(6, 3, seed=14)
        result = irls_reconstruct(b, np.zeros(6), ReconConfig(lam=0.1))
        np.testing.assert_allclose(result.x, np.zeros(9), atol=1e-8)

    def test_matches_coordinate_descent_oracle(self):
        # tiny instances: objective values agree within 1e-4
        for seed in range(5):
            rng = np.random.default_rng(20 + seed)
            b = rng.standard_normal((6, 8))
            y = rng.standard_normal(6)
            lam = 0.05
            ours = irls_reconstruct(b, y, ReconConfig(lam=lam, max_iter=600, tol=1e-12))
            oracle_x = oracle_coordinate_descent_l1(b, y, lam)
            ours_obj = l1_objective(b, y, lam, ours.x)
            oracle_obj = l1_objective(b, y, lam, oracle_x)
            assert abs(ours_obj - oracle_obj) < 1e-4

    def test_objective_monotone_non_increasing(self):
        rng = np.random.default_rng(15)
        b = rng.standard_normal((8, 16))
        y = rng.standard_normal(8)
        result = irls_reconstruct(b, y, ReconConfig(lam=0.05, max_iter=100, tol=1e-14))
        hist = result.objective_history
        for before, after in zip(hist, hist[1:]):
            assert after <= before + 1e-10
