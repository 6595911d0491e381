"""Deterministic synthetic stand-in datasets.

The benchmark corpus used for the reported experiments (one-hot encodings of
ten small UCI classification tables) is not redistributable here, so tests and
demos run on generated stand-ins with the same shapes: items partitioned into
attribute groups with exactly one item per group per transaction, skewed
within-group marginals, a latent two-profile mixture for co-occurrence
structure, and label-dependent groups for class signal.  The support threshold
is calibrated per dataset so the frequent-pattern count lands near 140,000,
matching the published setup.  Real data files, when available, drop into the
same directory layout and take precedence.
"""

from __future__ import annotations

import json
import os
from pathlib import Path

import numpy as np

from .data import TransactionDB
from .enumerator import enumerate_frequent

# (n_items, n_transactions) of the ten benchmark datasets
SHAPES: dict[str, tuple[int, int]] = {
    "anneal": (93, 812),
    "australian": (125, 653),
    "german": (112, 1000),
    "heart": (95, 296),
    "hepatitis": (68, 137),
    "lymph": (68, 148),
    "primary": (31, 336),
    "soybean": (50, 630),
    "vote": (48, 435),
    "zoo": (36, 101),
}

COUNT_TARGET = 140_000
COUNT_WINDOW = (118_000, 172_000)


def _partition_items(n_items: int, rng: np.random.Generator) -> list[list[int]]:
    """Split items 1..M into one-hot attribute groups of size 2..5."""
    groups: list[list[int]] = []
    next_item = 1
    while next_item <= n_items:
        size = int(rng.choice([2, 2, 3, 3, 3, 4, 4, 5]))
        size = min(size, n_items - next_item + 1)
        if n_items - next_item + 1 - size == 1:  # avoid a trailing singleton
            size += 1
        groups.append(list(range(next_item, next_item + size)))
        next_item += size
    return groups


def generate_standin(
    name: str, n_items: int, n_trans: int, seed: int
) -> TransactionDB:
    rng = np.random.default_rng(seed)
    groups = _partition_items(n_items, rng)
    g = len(groups)

    base = [rng.dirichlet(0.55 * np.ones(len(grp))) for grp in groups]
    alt = [rng.dirichlet(0.55 * np.ones(len(grp))) for grp in groups]
    pos = [rng.dirichlet(0.55 * np.ones(len(grp))) for grp in groups]
    profile_groups = set(rng.choice(g, size=max(1, int(0.4 * g)), replace=False))
    label_groups = set(rng.choice(g, size=max(1, int(0.2 * g)), replace=False))

    rows, labels = [], []
    for _ in range(n_trans):
        z = rng.random() < 0.5
        y = int(rng.random() < (0.70 if z else 0.30))
        row = set()
        for gi, grp in enumerate(groups):
            if gi in label_groups and y == 1:
                probs = pos[gi]
            elif gi in profile_groups and z:
                probs = alt[gi]
            else:
                probs = base[gi]
            row.add(int(rng.choice(grp, p=probs)))
        rows.append(row)
        labels.append(y)

    # every item must occur at least once so that M equals max observed id
    item_of_group = {i: gi for gi, grp in enumerate(groups) for i in grp}
    present = set().union(*rows)
    for item in range(1, n_items + 1):
        if item not in present:
            t = int(rng.integers(0, n_trans))
            gi = item_of_group[item]
            rows[t] -= set(groups[gi])
            rows[t].add(item)
    return TransactionDB.from_itemsets(rows, n_items=n_items, labels=labels, name=name)


def count_frequent(db: TransactionDB, theta: int, cap: int | None = None) -> int:
    """Frequent-pattern count; values above `cap` are reported as cap."""
    return len(enumerate_frequent(db, theta, cap=cap))


def calibrate_theta(
    db: TransactionDB,
    window: tuple[int, int] = COUNT_WINDOW,
    cap: int = 400_000,
) -> tuple[int, int]:
    """Smallest-|count - target| theta whose count falls in `window`.

    Bisection over theta; counts are monotone non-increasing in theta.
    """
    lo_count, hi_count = window
    lo, hi = 1, db.n_transactions
    seen: dict[int, int] = {}
    while lo <= hi:
        mid = (lo + hi) // 2
        cell = enumerate_frequent(db, mid, cap=cap)
        c = cap if cell.truncated else len(cell)
        seen[mid] = c
        if lo_count <= c <= hi_count:
            return mid, c
        if c > hi_count:
            lo = mid + 1
        else:
            hi = mid - 1
    theta = min(seen, key=lambda t: abs(seen[t] - COUNT_TARGET))
    return theta, seen[theta]


def write_dataset(db: TransactionDB, out_dir: str | os.PathLike) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / f"{db.name}.dat", "w") as fh:
        for mask in db.transaction_masks:
            items = []
            while mask:
                low = mask & -mask
                items.append(str(low.bit_length()))
                mask ^= low
            fh.write(" ".join(items) + "\n")
    if db.labels is not None:
        with open(out / f"{db.name}.labels", "w") as fh:
            fh.writelines(f"{y}\n" for y in db.labels)


def build_standin_corpus(
    out_dir: str | os.PathLike, seed: int = 20240501, names=None
) -> dict:
    """Generate, calibrate, and write the full stand-in corpus + manifest."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    manifest = {}
    for idx, (name, (m, n)) in enumerate(sorted(SHAPES.items())):
        if names is not None and name not in names:
            continue
        db = generate_standin(name, m, n, seed + idx)
        theta, count = calibrate_theta(db)
        write_dataset(db, out)
        manifest[name] = {
            "n_items": m,
            "n_transactions": n,
            "theta": theta,
            "frequent_patterns": count,
            "seed": seed + idx,
        }
    path = out / "manifest.json"
    existing = json.loads(path.read_text()) if path.exists() else {}
    existing.update(manifest)
    path.write_text(json.dumps(existing, indent=2, sort_keys=True) + "\n")
    return manifest
