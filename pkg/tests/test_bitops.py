import numpy as np

from patsamp import bitops


def _random_masks(rng, n_rows, n_bits):
    out = []
    for _ in range(n_rows):
        mask = 0
        for i in range(n_bits):
            mask |= int(rng.integers(0, 2)) << i
        out.append(mask)
    return out


class TestPacking:
    def test_roundtrip(self):
        rng = np.random.default_rng(0)
        masks = _random_masks(rng, 50, 37)
        mat = bitops.masks_to_matrix(masks, 37)
        assert mat.shape == (50, 5)
        for row, mask in zip(mat, masks):
            assert bitops.bytes_to_mask(row) == mask

    def test_unpack_columns(self):
        mat = bitops.masks_to_matrix([0b1011], 4)
        assert bitops.unpack_columns(mat, 4).tolist() == [[1, 1, 0, 1]]


class TestRowOps:
    def test_popcount_rows(self):
        rng = np.random.default_rng(1)
        masks = _random_masks(rng, 40, 61)
        mat = bitops.masks_to_matrix(masks, 61)
        expected = [m.bit_count() for m in masks]
        assert bitops.popcount_rows(mat).tolist() == expected

    def test_popcount_rows_with_mask(self):
        rng = np.random.default_rng(2)
        masks = _random_masks(rng, 30, 48)
        keep = _random_masks(rng, 1, 48)[0]
        mat = bitops.masks_to_matrix(masks, 48)
        krow = bitops.mask_to_bytes(keep, 48)
        expected = [(m & keep).bit_count() for m in masks]
        assert bitops.popcount_rows(mat, krow).tolist() == expected

    def test_parity_rows(self):
        rng = np.random.default_rng(3)
        masks = _random_masks(rng, 100, 23)
        coeff = _random_masks(rng, 1, 23)[0]
        mat = bitops.masks_to_matrix(masks, 23)
        crow = bitops.mask_to_bytes(coeff, 23)
        expected = [(m & coeff).bit_count() & 1 for m in masks]
        assert bitops.parity_rows(mat, crow).tolist() == expected

    def test_weighted_column_sum_matches_dense(self):
        rng = np.random.default_rng(4)
        n_bits = 77
        masks = _random_masks(rng, 200, n_bits)
        weights = rng.normal(size=n_bits)
        mat = bitops.masks_to_matrix(masks, n_bits)
        dense = bitops.unpack_columns(mat, n_bits).astype(float)
        expected = dense @ weights
        got = bitops.weighted_column_sum(mat, weights, chunk=64)
        np.testing.assert_allclose(got, expected, atol=1e-12)

    def test_weighted_column_sum_chunking_consistent(self):
        rng = np.random.default_rng(5)
        masks = _random_masks(rng, 131, 16)
        weights = rng.normal(size=16)
        mat = bitops.masks_to_matrix(masks, 16)
        a = bitops.weighted_column_sum(mat, weights, chunk=7)
        b = bitops.weighted_column_sum(mat, weights, chunk=10_000)
        np.testing.assert_array_equal(a, b)
