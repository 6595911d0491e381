"""Packed-bitset helpers shared by the enumerator, sampler, and evaluation code.

Bit matrices are (rows, n_bytes) uint8 arrays, little-endian within each byte:
bit j of byte b encodes column 8*b + j.  The same layout is produced by
``int.to_bytes(..., "little")``, so Python-int bitmasks and packed rows
interconvert cheaply.
"""

from __future__ import annotations

import numpy as np

_POPCOUNT8 = np.array([bin(v).count("1") for v in range(256)], dtype=np.uint8)
# unpack table: _UNPACK8[v, j] = bit j of byte value v
_UNPACK8 = np.unpackbits(
    np.arange(256, dtype=np.uint8).reshape(-1, 1), axis=1, bitorder="little"
)


def n_bytes_for(n_bits: int) -> int:
    return (n_bits + 7) // 8


def mask_to_bytes(mask: int, n_bits: int) -> np.ndarray:
    """Python-int bitmask -> uint8 row of width n_bytes_for(n_bits)."""
    return np.frombuffer(
        mask.to_bytes(n_bytes_for(n_bits), "little"), dtype=np.uint8
    ).copy()


def bytes_to_mask(row: np.ndarray) -> int:
    return int.from_bytes(row.tobytes(), "little")


def masks_to_matrix(masks, n_bits: int) -> np.ndarray:
    """List of int bitmasks -> (len(masks), n_bytes) uint8 matrix."""
    nb = n_bytes_for(n_bits)
    out = np.empty((len(masks), nb), dtype=np.uint8)
    for r, mask in enumerate(masks):
        out[r] = np.frombuffer(mask.to_bytes(nb, "little"), dtype=np.uint8)
    return out


def popcount_rows(bits: np.ndarray, and_mask: np.ndarray | None = None) -> np.ndarray:
    """Per-row popcount, optionally of (row AND and_mask)."""
    if and_mask is not None:
        bits = bits & and_mask
    return _POPCOUNT8[bits].sum(axis=1, dtype=np.int64)


def parity_rows(bits: np.ndarray, coeff_row: np.ndarray) -> np.ndarray:
    """Per-row parity of popcount(row AND coeff_row); uint8 in {0, 1}."""
    return (_POPCOUNT8[bits & coeff_row].sum(axis=1, dtype=np.int64) & 1).astype(
        np.uint8
    )


def byte_weight_table(weights: np.ndarray) -> np.ndarray:
    """(n_bytes, 256) table: table[b, v] = sum of weights[8b+j] over bits j set in v."""
    weights = np.asarray(weights, dtype=np.float64)
    nb = n_bytes_for(len(weights))
    padded = np.zeros(nb * 8, dtype=np.float64)
    padded[: len(weights)] = weights
    return padded.reshape(nb, 8) @ _UNPACK8.T.astype(np.float64)


def weighted_column_sum(
    bits: np.ndarray, weights: np.ndarray, chunk: int = 65536
) -> np.ndarray:
    """Per-row sum of weights over set columns.

    Equivalent to unpacking the bit matrix and multiplying by `weights`, but
    runs off a per-byte lookup table so the dense matrix never materializes.
    """
    table = byte_weight_table(weights)
    nb = bits.shape[1]
    cols = np.arange(nb)
    out = np.empty(bits.shape[0], dtype=np.float64)
    for start in range(0, bits.shape[0], chunk):
        blk = bits[start : start + chunk]
        out[start : start + chunk] = table[cols, blk].sum(axis=1)
    return out


def unpack_columns(bits: np.ndarray, n_bits: int) -> np.ndarray:
    """(rows, n_bytes) uint8 -> (rows, n_bits) 0/1 uint8."""
    return np.unpackbits(bits, axis=1, bitorder="little")[:, :n_bits]
