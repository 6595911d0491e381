"""Target quality measures: frequency, surprisingness, chi-square discriminativity.

These play the role of the hidden interest of an emulated user and of the
scoring axis for percentile-rank evaluation.  A measure instance is bound to
one database and memoizes per-itemset values, since ranking queries repeatedly
touch the same patterns.
"""

from __future__ import annotations

import math
from typing import Iterable

from .data import (
    Itemset,
    MissingLabelsError,
    TransactionDB,
    class_supports,
    freq_rel,
    support,
)

MEASURE_KINDS = ("freq", "surp", "chi2")


def chi2_2x2(occ_pos: int, occ_neg: int, n_pos: int, n_neg: int) -> float:
    """Pearson chi-square of {occurs, not} x {-, +} with marginal expectations.

    Zero whenever a marginal is empty (no occurrences, full cover, or a
    single-class database): the class-conditional frequencies are then equal
    by convention and independence cannot be rejected.
    """
    a, b = occ_pos, occ_neg
    c, d = n_pos - occ_pos, n_neg - occ_neg
    n = n_pos + n_neg
    for marginal in (a + b, c + d, a + c, b + d):
        if marginal == 0:
            return 0.0
    return n * (a * d - b * c) ** 2 / ((a + b) * (c + d) * (a + c) * (b + d))


class QualityMeasure:
    """One of freq | surp | chi2, bound to a database."""

    def __init__(self, kind: str, db: TransactionDB):
        if kind not in MEASURE_KINDS:
            raise ValueError(f"unknown measure {kind!r}; expected one of {MEASURE_KINDS}")
        if kind == "chi2" and db.labels is None:
            raise MissingLabelsError("chi2 requires a labeled database")
        self.kind = kind
        self.db = db
        self._memo: dict[Itemset, float] = {}
        if kind == "surp":
            self._singleton_freq = [
                db.item_covers[i].bit_count() / db.n_transactions
                for i in range(db.n_items)
            ]
        if kind == "chi2":
            self._n_pos = db.pos_cover.bit_count()
            self._n_neg = db.neg_cover.bit_count()

    def __call__(self, p: Iterable[int]) -> float:
        key = tuple(sorted(p))
        cached = self._memo.get(key)
        if cached is None:
            cached = self._memo[key] = self._evaluate(key)
        return cached

    def _evaluate(self, p: Itemset) -> float:
        if self.kind == "freq":
            return freq_rel(self.db, p)
        if self.kind == "surp":
            fp = freq_rel(self.db, p)
            prod = math.prod(self._singleton_freq[i - 1] for i in p)
            return max(fp - prod, 0.0)
        occ_neg, occ_pos = class_supports(self.db, p)
        return chi2_2x2(occ_pos, occ_neg, self._n_pos, self._n_neg)

    def __repr__(self) -> str:
        return f"QualityMeasure({self.kind!r}, db={self.db.name!r})"


def evaluate(measure: QualityMeasure, db: TransactionDB, p: Iterable[int]) -> float:
    if measure.db is not db:
        raise ValueError("measure is bound to a different database")
    return measure(p)
