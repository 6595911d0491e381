import math

import numpy as np
import pytest

from conftest import db_as_sets, random_db
from oracles import total_variation
from patsamp.baselines import (
    EmulatedUser,
    ipm_run,
    liked_mask,
    order_query,
    select_interesting_items,
)
from patsamp.data import TransactionDB, support
from patsamp.measures import QualityMeasure
from patsamp.store import PatternStore


@pytest.fixture(scope="module")
def field_db():
    rng = np.random.default_rng(91)
    db = random_db(rng, n_items=9, n_trans=40, density=0.45, labeled=True)
    return db, PatternStore.build(db, 6)


class TestOrderQuery:
    def test_descending_by_frequency(self, field_db):
        db, store = field_db
        user = EmulatedUser(QualityMeasure("freq", db))
        by_sup = sorted(store.patterns, key=lambda p: support(db, p))
        lo, mid, hi = by_sup[0], by_sup[len(by_sup) // 2], by_sup[-1]
        if len({support(db, p) for p in (lo, mid, hi)}) == 3:
            assert user.order_query([mid, lo, hi]) == [hi, mid, lo]

    def test_tie_breaks_lexicographically(self, toy_db):
        user = EmulatedUser(QualityMeasure("freq", toy_db))
        # items 1 and 3 both have support 2 in the toy db
        assert support(toy_db, (1,)) == support(toy_db, (3,))
        assert user.order_query([(3,), (1,)]) == [(1,), (3,)]

    def test_single_pattern(self, toy_db):
        user = EmulatedUser(QualityMeasure("freq", toy_db))
        assert user.order_query([(2,)]) == [(2,)]

    def test_presentation_order_irrelevant(self, field_db):
        db, store = field_db
        user = EmulatedUser(QualityMeasure("surp", db))
        rng = np.random.default_rng(92)
        query = [store.patterns[int(i)] for i in rng.choice(len(store), 6,
                                                            replace=False)]
        a = user.order_query(query)
        b = user.order_query(list(reversed(query)))
        assert a == b

    def test_wrong_db_rejected(self, field_db, toy_db):
        db, _ = field_db
        user = EmulatedUser(QualityMeasure("freq", toy_db))
        with pytest.raises(ValueError):
            order_query(user, db, [(1,)])

    def test_empty_query_rejected(self, toy_db):
        user = EmulatedUser(QualityMeasure("freq", toy_db))
        with pytest.raises(ValueError):
            user.order_query([])


class TestLikedMask:
    def test_strict_majority(self, field_db):
        db, store = field_db
        flags = liked_mask(store, {1, 2})
        for p, flag in zip(store.patterns, flags):
            inside = len(set(p) & {1, 2})
            assert flag == (2 * inside > len(p))

    def test_empty_pattern_never_liked(self, field_db):
        db, store = field_db
        idx = store.patterns.index(())
        assert not liked_mask(store, set(range(1, 10)))[idx]


class TestSelectInterestingItems:
    def test_reaches_threshold_with_recount_oracle(self, field_db):
        db, store = field_db
        sets = db_as_sets(db)
        for phi in ("freq", "surp", "chi2"):
            items = select_interesting_items(store, phi)
            chosen = set(items)

            def liked_fraction(s):
                hit = sum(
                    1 for p in store.patterns if 2 * len(set(p) & s) > len(p)
                )
                return hit / len(store)

            assert liked_fraction(chosen) >= 0.15
            if len(items) > 1:
                assert liked_fraction(set(items[:-1])) < 0.15

    def test_single_dominant_item(self):
        # item 1 occurs in nearly every transaction: most frequent patterns
        # are subsets containing it, so one item suffices
        rows = [{1, 2} if i % 2 else {1, 3} for i in range(20)]
        db = TransactionDB.from_itemsets(rows, n_items=3)
        store = PatternStore.build(db, 5)
        items = select_interesting_items(store, "freq")
        assert items == [1]

    def test_deterministic(self, field_db):
        db, store = field_db
        assert select_interesting_items(store, "freq") == select_interesting_items(
            store, "freq"
        )


class TestIpmRun:
    def test_first_round_uniform(self, field_db):
        db, store = field_db
        rng = np.random.default_rng(93)
        result = ipm_run(store, {1, 2}, rng, rounds=1, batch=5000)
        counts = {}
        for p in result.batches[0]:
            counts[p] = counts.get(p, 0) + 1
        target = {p: 1 / len(store) for p in store.patterns}
        assert total_variation(counts, target, 5000) < 0.2

    def test_update_directions(self, field_db):
        db, store = field_db
        rng = np.random.default_rng(94)
        result = ipm_run(store, {1, 2}, rng, rounds=3, batch=10)
        log_b = math.log(1.75)
        expect = np.zeros(db.n_items)
        for group, flags in zip(result.batches, result.liked):
            for p, flag in zip(group, flags):
                assert flag == (2 * len(set(p) & {1, 2}) > len(p))
                for item in p:
                    expect[item - 1] += log_b if flag else -log_b
        np.testing.assert_allclose(result.log_item_weights, expect, atol=1e-12)

    def test_round_distribution_matches_normalization(self, field_db):
        db, store = field_db
        # run a couple of rounds to move the weights, then check the next round
        rng = np.random.default_rng(95)
        warm = ipm_run(store, {1, 2, 3}, rng, rounds=2, batch=10)
        lw = warm.log_item_weights
        z = np.array(
            [sum(lw[i - 1] for i in p) for p in store.patterns]
        )
        probs = np.exp(z - z.max())
        probs /= probs.sum()
        rng2 = np.random.default_rng(96)
        idx = rng2.choice(len(store), size=50_000, p=probs)
        counts = {}
        for i in idx:
            p = store.patterns[int(i)]
            counts[p] = counts.get(p, 0) + 1
        target = {p: float(pi) for p, pi in zip(store.patterns, probs)}
        assert total_variation(counts, target, 50_000) <= 0.02

    def test_overflow_detected_and_reported(self, field_db):
        db, store = field_db
        rng = np.random.default_rng(97)
        result = ipm_run(store, set(range(1, 10)), rng, rounds=50, batch=10,
                         b=1e60)
        assert result.overflow
        assert result.overflow_round is not None
        assert result.completed_rounds < 50

    def test_bad_learning_parameter(self, field_db):
        _, store = field_db
        with pytest.raises(ValueError):
            ipm_run(store, {1}, np.random.default_rng(0), b=0.0)
