"""Emulated users and the item-multiplicative-weights interactive baseline.

An emulated user hides a quality measure and answers ranking queries with the
exact descending order under it.  The baseline keeps one positive weight per
item, samples patterns proportionally to the product of their items' weights
over the materialized frequent set, and updates weights multiplicatively from
binary liked/disliked feedback, where a pattern is liked when more than half
of its items belong to a designated interesting set.  Weight products are
tracked in the log domain, but overflow of the equivalent double-precision
computation is detected and reported rather than masked, since that failure
mode is characteristic of the method.
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass, field

import numpy as np

from . import bitops
from .data import Itemset, TransactionDB
from .measures import QualityMeasure
from .store import PatternStore

LOG_DOUBLE_MAX = math.log(sys.float_info.max)


class EmulatedUser:
    """Ranks queries by a hidden measure, ties broken lexicographically."""

    def __init__(self, measure: QualityMeasure):
        self.measure = measure

    def order_query(self, query: list[Itemset]) -> list[Itemset]:
        if not query:
            raise ValueError("cannot order an empty query")
        return sorted(query, key=lambda p: (-self.measure(p), tuple(sorted(p))))


def order_query(
    user: EmulatedUser, db: TransactionDB, query: list[Itemset]
) -> list[Itemset]:
    if user.measure.db is not db:
        raise ValueError("user's measure is bound to a different database")
    return user.order_query(query)


def liked_mask(store: PatternStore, interesting: set[int]) -> np.ndarray:
    """Boolean per-pattern vector: strictly more than half the items interesting.

    The empty pattern is never liked (zero of zero items is not a majority).
    """
    s_mask = 0
    for i in interesting:
        s_mask |= 1 << (i - 1)
    s_row = bitops.mask_to_bytes(s_mask, store.db.n_items)
    inter = bitops.popcount_rows(store.item_bits, s_row)
    return 2 * inter > store.lengths


def select_interesting_items(
    store: PatternStore, phi: str, target_fraction: float = 0.15
) -> list[int]:
    """Items from top-ranked patterns (by phi, descending) until the liked
    fraction of all frequent patterns reaches the target.

    Items are added one at a time, in ascending id within each pattern, and
    the stopping rule is re-checked after every single item.
    """
    values = store.measure_values(phi)
    order = np.argsort(-values, kind="stable")
    n = len(store)
    chosen: list[int] = []
    chosen_set: set[int] = set()
    for row in order:
        for item in store.patterns[row]:
            if item in chosen_set:
                continue
            chosen.append(item)
            chosen_set.add(item)
            frac = float(liked_mask(store, chosen_set).sum()) / n
            if frac >= target_fraction:
                return chosen
    return chosen  # every item added; fraction stays below target


@dataclass
class IPMResult:
    batches: list[list[Itemset]]
    liked: list[list[bool]]
    overflow: bool = False
    overflow_round: int | None = None
    log_item_weights: np.ndarray = field(default_factory=lambda: np.zeros(0))

    @property
    def completed_rounds(self) -> int:
        return len(self.batches)


def ipm_run(
    store: PatternStore,
    interesting: set[int] | list[int],
    rng: np.random.Generator,
    rounds: int = 30,
    batch: int = 10,
    b: float = 1.75,
) -> IPMResult:
    """Multiplicative-weights interactive sampling over the materialized set.

    Per round: draw `batch` exact samples proportional to the product of item
    weights, then for each sampled pattern in draw order multiply every
    constituent item's weight by b if the pattern is liked, divide by b
    otherwise.  A round whose weights or pattern products exceed the double-
    precision range ends the run with an overflow report.
    """
    if b <= 0:
        raise ValueError("learning parameter b must be positive")
    interesting = set(interesting)
    log_b = math.log(b)
    m = store.db.n_items
    log_w = np.zeros(m)  # per-item log weights; item i at index i-1
    liked_all = liked_mask(store, interesting)
    result = IPMResult([], [], log_item_weights=log_w)

    for rnd in range(rounds):
        if log_w.max() > LOG_DOUBLE_MAX:
            result.overflow, result.overflow_round = True, rnd
            break
        z = bitops.weighted_column_sum(store.item_bits, log_w)
        if z.max() > LOG_DOUBLE_MAX:
            result.overflow, result.overflow_round = True, rnd
            break
        probs = np.exp(z - z.max())
        probs /= probs.sum()
        idx = rng.choice(len(store), size=batch, p=probs)
        patterns = [store.patterns[int(i)] for i in idx]
        flags = [bool(liked_all[int(i)]) for i in idx]
        for pattern, is_liked in zip(patterns, flags):
            delta = log_b if is_liked else -log_b
            for item in pattern:
                log_w[item - 1] += delta
        result.batches.append(patterns)
        result.liked.append(flags)
    result.log_item_weights = log_w
    return result
