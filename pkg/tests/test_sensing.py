"""Sensing-matrix constructions, block partitioning, and the three-path
acquisition equivalence."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from blockcs import sensing
from blockcs.errors import DimensionError, ParseError
from blockcs.image import GrayImage
from blockcs.sensing import (
    MeasurementSet,
    SensingMatrix,
    acquire_block,
    acquire_image,
    acquire_image_conv,
    block_partition,
    blocks_to_image,
    expand_block_diagonal,
    load_matrix,
    load_measurements,
    make_bernoulli,
    make_chebyshev,
    make_gaussian,
    rows_for_rate,
    save_matrix,
    save_measurements,
)


class TestRowsForRate:
    def test_one_percent_of_32_block(self):
        assert rows_for_rate(0.01, 32) == 10

    def test_quarter_rate(self):
        assert rows_for_rate(0.25, 32) == 256

    def test_full_sampling(self):
        assert rows_for_rate(1.0, 4) == 16

    def test_clamped_to_one(self):
        assert rows_for_rate(0.001, 4) == 1

    def test_invalid_rate(self):
        with pytest.raises(ValueError):
            rows_for_rate(0.0, 32)
        with pytest.raises(ValueError):
            rows_for_rate(-0.1, 32)

    def test_monotone_in_rate(self):
        rates = np.linspace(0.01, 1.0, 50)
        rows = [rows_for_rate(t, 16) for t in rates]
        assert all(a <= b for a, b in zip(rows, rows[1:]))


class TestConstructors:
    def test_bernoulli_values(self):
        m = make_bernoulli(8, 4, seed=0)
        allowed = {1.0 / np.sqrt(8), -1.0 / np.sqrt(8)}
        assert set(np.round(np.unique(m.entries), 12)) == set(np.round(sorted(allowed), 12))

    def test_gaussian_mean_within_3_sigma(self):
        m = make_gaussian(100, 10, seed=1)  # 10^4 entries, each N(0, 1/100)
        n = m.entries.size
        sigma_mean = (1.0 / np.sqrt(100)) / np.sqrt(n)
        assert abs(m.entries.mean()) < 3 * sigma_mean

    def test_gaussian_column_energy_near_one(self):
        m = make_gaussian(400, 32, seed=2)
        energies = np.sum(m.entries**2, axis=0)
        assert abs(energies.mean() - 1.0) < 0.05

    def test_chebyshev_binary_entries(self):
        m = make_chebyshev(6, 4, seed=3)
        allowed = np.array([-1.0, 1.0]) / np.sqrt(6)
        assert np.all(np.isin(np.round(m.entries, 12), np.round(allowed, 12)))

    def test_chebyshev_iterates_stay_in_unit_interval(self):
        # raw map check: cos of anything is in [-1, 1]
        x = 0.3
        for _ in range(100):
            x = np.cos(4 * np.arccos(x))
            assert -1.0 <= x <= 1.0

    def test_deterministic_given_seed(self):
        for maker in (make_gaussian, make_bernoulli, make_chebyshev):
            a = maker(5, 4, seed=9)
            b = maker(5, 4, seed=9)
            np.testing.assert_array_equal(a.entries, b.entries)

    def test_invariant_rows_bounds(self):
        with pytest.raises(DimensionError):
            SensingMatrix(np.zeros((17, 16)), 4, "gaussian")


class TestBlockPartition:
    def test_exact_tiling(self):
        img = np.arange(64 * 64, dtype=float).reshape(64, 64) / (64 * 64)
        blocks, r, c = block_partition(img, 32)
        assert blocks.shape == (4, 1024)
        assert (r, c) == (2, 2)

    def test_padding_rule(self):
        img = np.ones((33, 33))
        blocks, r, c = block_partition(img, 32)
        assert (r, c) == (2, 2)
        assert blocks.shape == (4, 1024)
        # bottom-right block is mostly padding
        assert blocks[3].sum() == 1.0

    def test_raster_scan_order(self):
        img = np.arange(16, dtype=float).reshape(4, 4)
        blocks, r, c = block_partition(img, 2)
        np.testing.assert_array_equal(blocks[0], [0, 1, 4, 5])  # top-left block
        np.testing.assert_array_equal(blocks[1], [2, 3, 6, 7])  # row-major grid order

    def test_round_trip_exact(self):
        rng = np.random.default_rng(0)
        img = GrayImage.from_array(rng.random((45, 70)))
        blocks, r, c = block_partition(img, 16)
        rebuilt = blocks_to_image(blocks, r, c, 16)
        restored = GrayImage(rebuilt, img.height, img.width).cropped()
        np.testing.assert_array_equal(restored.pixels, img.pixels)


class TestAcquisitionPaths:
    def test_identity_rows_select_pixels(self):
        entries = np.eye(16)[:5]
        m = SensingMatrix(entries, 4, "gaussian")
        x = np.arange(16.0)
        np.testing.assert_array_equal(acquire_block(m, x), x[:5])

    def test_zero_block(self):
        m = make_gaussian(5, 4, seed=0)
        np.testing.assert_array_equal(acquire_block(m, np.zeros(16)), np.zeros(5))

    def test_matmul_oracle(self):
        rng = np.random.default_rng(4)
        entries = rng.standard_normal((4, 16))
        m = SensingMatrix(entries, 4, "gaussian")
        x = rng.standard_normal(16)
        expected = np.array([sum(entries[i, j] * x[j] for j in range(16)) for i in range(4)])
        np.testing.assert_allclose(acquire_block(m, x), expected, atol=1e-12)

    def test_length_mismatch(self):
        m = make_gaussian(4, 4, seed=0)
        with pytest.raises(DimensionError):
            acquire_block(m, np.zeros(15))

    def test_block_diagonal_single_block(self):
        m = make_gaussian(3, 2, seed=0)
        np.testing.assert_array_equal(expand_block_diagonal(m, 1), m.entries)

    def test_block_diagonal_shape(self):
        m = make_gaussian(10, 32, seed=0)
        full = expand_block_diagonal(m, 4)
        assert full.shape == (40, 4096)

    def test_block_diagonal_equals_per_block(self):
        rng = np.random.default_rng(5)
        m = make_gaussian(6, 4, seed=6)
        img = rng.random((8, 12))
        blocks, r, c = block_partition(img, 4)
        full = expand_block_diagonal(m, r * c)
        stacked = full @ blocks.reshape(-1)
        per_block = np.concatenate([acquire_block(m, b) for b in blocks])
        np.testing.assert_allclose(stacked, per_block, atol=1e-12)

    def test_conv_path_equals_matrix_path(self):
        rng = np.random.default_rng(6)
        m = make_gaussian(7, 8, seed=7)
        img = rng.random((24, 16))
        a = acquire_image(m, img)
        b = acquire_image_conv(m, img)
        np.testing.assert_allclose(a.vectors, b.vectors, atol=1e-12)
        assert (a.grid_rows, a.grid_cols) == (b.grid_rows, b.grid_cols) == (3, 2)

    def test_conv_path_measurement_grid_shape(self):
        m = make_gaussian(rows_for_rate(0.1, 32), 32, seed=8)
        assert m.rows == 102
        img = np.zeros((96, 96))
        mset = acquire_image_conv(m, img)
        assert mset.as_grid().shape == (102, 3, 3)

    def test_constant_image_zero_mean_filters(self):
        rng = np.random.default_rng(9)
        entries = rng.standard_normal((5, 16))
        entries -= entries.mean(axis=1, keepdims=True)  # zero-mean rows
        m = SensingMatrix(entries, 4, "gaussian")
        mset = acquire_image_conv(m, np.full((8, 8), 0.7))
        assert np.max(np.abs(mset.vectors)) < 1e-12

    @pytest.mark.parametrize("case", range(20))
    def test_three_path_equivalence_random_cases(self, case):
        rng = np.random.default_rng(100 + case)
        a = int(rng.choice([2, 4, 8, 16]))
        rate = float(rng.uniform(0.05, 1.0))
        m = make_gaussian(rows_for_rate(rate, a), a, seed=case)
        h = int(rng.integers(1, 4)) * a + int(rng.integers(0, a))  # may need padding
        w = int(rng.integers(1, 4)) * a + int(rng.integers(0, a))
        img = rng.random((h, w))
        blocks, r, c = block_partition(img, a)
        per_block = np.stack([acquire_block(m, b) for b in blocks])
        full = expand_block_diagonal(m, r * c) @ blocks.reshape(-1)
        conv = acquire_image_conv(m, img)
        np.testing.assert_allclose(per_block, conv.vectors, atol=1e-10)
        np.testing.assert_allclose(full, conv.vectors.reshape(-1), atol=1e-10)


@settings(max_examples=20, deadline=None)
@given(
    a=st.sampled_from([2, 4, 8]),
    h=st.integers(2, 30),
    w=st.integers(2, 30),
    seed=st.integers(0, 1000),
)
def test_partition_round_trip_property(a, h, w, seed):
    rng = np.random.default_rng(seed)
    img = GrayImage.from_array(rng.random((h, w)))
    blocks, r, c = block_partition(img, a)
    rebuilt = GrayImage(blocks_to_image(blocks, r, c, a), h, w).cropped()
    np.testing.assert_array_equal(rebuilt.pixels, img.pixels)


class TestSerialization:
    def test_matrix_round_trip_bit_identical(self, tmp_path):
        m = make_gaussian(7, 6, seed=11)
        path = str(tmp_path / "m.bcsm")
        save_matrix(m, path)
        loaded = load_matrix(path)
        np.testing.assert_array_equal(loaded.entries, m.entries)
        assert loaded.kind == m.kind and loaded.block_size == m.block_size
        save_matrix(loaded, str(tmp_path / "m2.bcsm"))
        assert (tmp_path / "m.bcsm").read_bytes() == (tmp_path / "m2.bcsm").read_bytes()

    def test_matrix_bad_magic(self, tmp_path):
        path = tmp_path / "bad.bcsm"
        path.write_bytes(b"NOPE" + b"\x00" * 32)
        with pytest.raises(ParseError):
            load_matrix(str(path))

    def test_measurements_round_trip_bit_identical(self, tmp_path):
        rng = np.random.default_rng(12)
        mset = MeasurementSet(rng.standard_normal((6, 5)), 2, 3, 4)
        path = str(tmp_path / "y.bcsy")
        save_measurements(mset, path)
        loaded = load_measurements(path)
        np.testing.assert_array_equal(loaded.vectors, mset.vectors)
        assert (loaded.grid_rows, loaded.grid_cols) == (2, 3)
        assert loaded.block_size == 4
        save_measurements(loaded, str(tmp_path / "y2.bcsy"))
        assert (tmp_path / "y.bcsy").read_bytes() == (tmp_path / "y2.bcsy").read_bytes()

    def test_measurements_truncated_payload(self, tmp_path):
        rng = np.random.default_rng(13)
        mset = MeasurementSet(rng.standard_normal((4, 3)), 2, 2, 2)
        path = tmp_path / "y.bcsy"
        save_measurements(mset, str(path))
        path.write_bytes(path.read_bytes()[:-8])
        with pytest.raises(ParseError):
            load_measurements(str(path))
