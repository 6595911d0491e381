import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from patsamp.data import TransactionDB


@pytest.fixture
def toy_db() -> TransactionDB:
    """4 transactions over 4 items, hand-checkable."""
    return TransactionDB.from_itemsets(
        [{1, 2, 3}, {1, 2}, {2, 4}, {3, 4}], n_items=4, name="toy"
    )


@pytest.fixture
def labeled_db() -> TransactionDB:
    """Balanced 8-transaction db where item 5 occurs in exactly the '+' class."""
    rows = [
        {1, 2, 5},
        {1, 3, 5},
        {2, 3, 5},
        {1, 2, 3, 5},
        {1, 2},
        {2, 3},
        {1, 4},
        {3, 4},
    ]
    return TransactionDB.from_itemsets(
        rows, n_items=5, labels=[1, 1, 1, 1, 0, 0, 0, 0], name="labeled-toy"
    )


def random_db(rng: np.random.Generator, n_items: int, n_trans: int, density=0.4,
              labeled=False) -> TransactionDB:
    rows = []
    for _ in range(n_trans):
        row = {int(i) + 1 for i in np.flatnonzero(rng.random(n_items) < density)}
        rows.append(row)
    labels = rng.integers(0, 2, size=n_trans).tolist() if labeled else None
    return TransactionDB.from_itemsets(rows, n_items=n_items, labels=labels,
                                       name="random")


def db_as_sets(db: TransactionDB) -> list[set[int]]:
    return [
        {i + 1 for i in range(db.n_items) if mask >> i & 1}
        for mask in db.transaction_masks
    ]
