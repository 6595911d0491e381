"""Transaction databases and cover/support primitives.

Datasets are FIMI-style: one transaction per line, whitespace-separated
positive integer item ids.  Class labels, when present, come from a companion
file with one 0/1 per line (0 -> class '-', 1 -> class '+').  Transactions are
stored as Python-int bitmasks (bit i-1 <=> item i), so cover computation is a
single AND + popcount regardless of M.
"""

from __future__ import annotations

import os
from typing import Iterable, Sequence

Itemset = tuple[int, ...]


class DatasetFormatError(ValueError):
    """Malformed dataset or label file; message carries the offending line."""


class LabelConsistencyError(ValueError):
    """Label file length does not match the transaction count."""


class UnknownItemError(ValueError):
    """An itemset references an item id outside 1..M."""


class MissingLabelsError(RuntimeError):
    """A class-based operation was requested on an unlabeled database."""


class TransactionDB:
    """Immutable bit-vector transaction database over items 1..M."""

    def __init__(
        self,
        transaction_masks: Sequence[int],
        n_items: int,
        labels: Sequence[int] | None = None,
        name: str = "",
    ):
        if n_items < 1:
            raise ValueError("need at least one item")
        if len(transaction_masks) < 1:
            raise ValueError("need at least one transaction")
        if labels is not None and len(labels) != len(transaction_masks):
            raise LabelConsistencyError(
                f"{len(labels)} labels for {len(transaction_masks)} transactions"
            )
        self.name = name
        self.n_items = n_items
        self.transaction_masks = list(transaction_masks)
        self.labels = tuple(labels) if labels is not None else None
        full = (1 << n_items) - 1
        for t, mask in enumerate(self.transaction_masks):
            if mask & ~full:
                raise UnknownItemError(f"transaction {t} has items beyond M={n_items}")
        # vertical layout: cover bitmask of each singleton {i}
        self.item_covers = [0] * n_items
        for t, mask in enumerate(self.transaction_masks):
            tbit = 1 << t
            while mask:
                low = mask & -mask
                self.item_covers[low.bit_length() - 1] |= tbit
                mask ^= low
        self.all_cover = (1 << len(self.transaction_masks)) - 1
        if self.labels is not None:
            self.pos_cover = sum(1 << t for t, y in enumerate(self.labels) if y == 1)
            self.neg_cover = self.all_cover & ~self.pos_cover
        else:
            self.pos_cover = self.neg_cover = None

    @property
    def n_transactions(self) -> int:
        return len(self.transaction_masks)

    @classmethod
    def from_itemsets(
        cls,
        transactions: Iterable[Iterable[int]],
        n_items: int | None = None,
        labels: Sequence[int] | None = None,
        name: str = "",
    ) -> "TransactionDB":
        """Build from explicit item-id collections (mostly for tests)."""
        rows = [sorted(set(t)) for t in transactions]
        if n_items is None:
            n_items = max((row[-1] for row in rows if row), default=1)
        masks = [sum(1 << (i - 1) for i in row) for row in rows]
        return cls(masks, n_items, labels=labels, name=name)

    def __repr__(self) -> str:
        lbl = "labeled" if self.labels is not None else "unlabeled"
        return (
            f"TransactionDB({self.name!r}, M={self.n_items}, "
            f"N={self.n_transactions}, {lbl})"
        )


def load_dataset(
    path: str | os.PathLike,
    label_path: str | os.PathLike | None = None,
    name: str | None = None,
) -> TransactionDB:
    """Load a FIMI .dat file (and optional companion 0/1 label file)."""
    masks: list[int] = []
    max_item = 0
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            tokens = line.split()
            if not tokens:
                continue
            mask = 0
            for tok in tokens:
                try:
                    item = int(tok)
                except ValueError:
                    raise DatasetFormatError(
                        f"{path}:{lineno}: non-integer token {tok!r}"
                    ) from None
                if item < 1:
                    raise DatasetFormatError(
                        f"{path}:{lineno}: item ids must be positive, got {item}"
                    )
                max_item = max(max_item, item)
                mask |= 1 << (item - 1)
            masks.append(mask)
    if not masks:
        raise DatasetFormatError(f"{path}: no transactions")

    labels = None
    if label_path is not None:
        labels = []
        with open(label_path) as fh:
            for lineno, line in enumerate(fh, start=1):
                tok = line.strip()
                if not tok:
                    continue
                if tok not in ("0", "1"):
                    raise DatasetFormatError(
                        f"{label_path}:{lineno}: expected 0 or 1, got {tok!r}"
                    )
                labels.append(int(tok))
        if len(labels) != len(masks):
            raise LabelConsistencyError(
                f"{len(labels)} labels for {len(masks)} transactions"
            )

    if name is None:
        name = os.path.splitext(os.path.basename(os.fspath(path)))[0]
    return TransactionDB(masks, max_item, labels=labels, name=name)


def load_item_names(path: str | os.PathLike) -> dict[int, str]:
    """Vocabulary file: one "id<TAB>name" per line; display only."""
    names: dict[int, str] = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                idstr, label = line.rstrip("\n").split("\t", 1)
                names[int(idstr)] = label
            except ValueError:
                raise DatasetFormatError(
                    f"{path}:{lineno}: expected 'id<TAB>name'"
                ) from None
    return names


def itemset_mask(db: TransactionDB, p: Iterable[int]) -> int:
    """Item-id collection -> item bitmask, validating ids against 1..M."""
    mask = 0
    for i in p:
        if not 1 <= i <= db.n_items:
            raise UnknownItemError(f"item {i} outside 1..{db.n_items}")
        mask |= 1 << (i - 1)
    return mask


def cover(db: TransactionDB, p: Iterable[int]) -> int:
    """Bitmask of transactions containing every item of p (all-ones for p = ())."""
    result = db.all_cover
    for i in p:
        if not 1 <= i <= db.n_items:
            raise UnknownItemError(f"item {i} outside 1..{db.n_items}")
        result &= db.item_covers[i - 1]
        if not result:
            break
    return result


def support(db: TransactionDB, p: Iterable[int]) -> int:
    return cover(db, p).bit_count()


def freq_rel(db: TransactionDB, p: Iterable[int]) -> float:
    return support(db, p) / db.n_transactions


def class_supports(db: TransactionDB, p: Iterable[int]) -> tuple[int, int]:
    """(support among class '-', support among class '+'); labels required."""
    if db.labels is None:
        raise MissingLabelsError("database has no class labels")
    cov = cover(db, p)
    return (cov & db.neg_cover).bit_count(), (cov & db.pos_cover).bit_count()
