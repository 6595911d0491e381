"""Materialized frequent-pattern index.

One full enumeration per (db, theta) is cheap at this scale (~10^5 patterns,
well under a second), after which every downstream consumer works off packed
bit matrices: XOR-cell extraction becomes vectorized parity filtering, batch
weight evaluation a couple of table-driven masked sums, and quality-measure
vectors for percentile indexes come out in milliseconds.  Rows are stored in
the enumerator's canonical order, so filtering the store by an XOR system
yields byte-identical cells to a constrained depth-first search.
"""

from __future__ import annotations

import numpy as np

from . import bitops
from .data import Itemset, TransactionDB
from .enumerator import Cell, XorSystem, enumerate_frequent
from .measures import chi2_2x2


class PatternStore:
    def __init__(self, db: TransactionDB, theta: int, cell: Cell):
        if cell.truncated or cell.covers is None:
            raise ValueError("store needs a complete enumeration with covers")
        self.db = db
        self.theta = theta
        self.patterns: list[Itemset] = cell.patterns
        m, n = db.n_items, db.n_transactions
        item_masks = [sum(1 << (i - 1) for i in p) for p in cell.patterns]
        self.item_bits = bitops.masks_to_matrix(item_masks, m)
        self.cover_bits = bitops.masks_to_matrix(cell.covers, n)
        self.supports = np.asarray(cell.supports, dtype=np.int64)
        self.lengths = np.asarray([len(p) for p in cell.patterns], dtype=np.int64)
        self._measure_cache: dict[str, np.ndarray] = {}

    @classmethod
    def build(cls, db: TransactionDB, theta: int) -> "PatternStore":
        return cls(db, theta, enumerate_frequent(db, theta, keep_covers=True))

    def __len__(self) -> int:
        return len(self.patterns)

    # -- cells ---------------------------------------------------------------

    def xor_select(self, xors: XorSystem) -> np.ndarray:
        """Indices (in canonical order) of patterns satisfying the system."""
        idx = np.arange(len(self.patterns))
        if xors.inconsistent:
            return idx[:0]
        for mask, parity in xors.reduced:
            if len(idx) == 0:
                break
            coeff = bitops.mask_to_bytes(mask, self.db.n_items)
            par = bitops.parity_rows(self.item_bits[idx], coeff)
            idx = idx[par == parity]
        return idx

    def cell_at(
        self, xors: XorSystem, weights: np.ndarray, cap: int | None = None
    ) -> Cell:
        """Cell for `xors` with per-pattern weights taken from `weights`."""
        idx = self.xor_select(xors)
        truncated = cap is not None and len(idx) > cap
        if truncated:
            idx = idx[:cap]
        return Cell(
            [self.patterns[i] for i in idx],
            weights[idx].astype(np.float64, copy=True),
            self.supports[idx].copy(),
            truncated=truncated,
        )

    # -- quality measures ------------------------------------------------------

    def measure_values(self, kind: str) -> np.ndarray:
        """Vector of measure values over all patterns, cached per kind."""
        cached = self._measure_cache.get(kind)
        if cached is not None:
            return cached
        n = self.db.n_transactions
        if kind == "freq":
            vals = self.supports / n
        elif kind == "surp":
            singleton = np.array(
                [c.bit_count() / n for c in self.db.item_covers], dtype=np.float64
            )
            # log-domain product of singleton frequencies over each pattern;
            # items of frequency zero never occur in frequent patterns
            logs = np.log(np.maximum(singleton, 1e-300))
            prod = np.exp(bitops.weighted_column_sum(self.item_bits, logs))
            vals = np.maximum(self.supports / n - prod, 0.0)
        elif kind == "chi2":
            if self.db.labels is None:
                raise ValueError("chi2 requires labels")
            pos_row = bitops.mask_to_bytes(self.db.pos_cover, n)
            occ_pos = bitops.popcount_rows(self.cover_bits, pos_row)
            occ_neg = self.supports - occ_pos
            n_pos = self.db.pos_cover.bit_count()
            n_neg = n - n_pos
            vals = np.array(
                [
                    chi2_2x2(int(op), int(on), n_pos, n_neg)
                    for op, on in zip(occ_pos, occ_neg)
                ]
            )
        else:
            raise ValueError(f"unknown measure kind {kind!r}")
        self._measure_cache[kind] = vals
        return vals
