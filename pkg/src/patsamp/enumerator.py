"""Frequent-itemset enumeration, optionally restricted to one random-XOR cell.

The search is depth-first over item inclusion/exclusion decisions ordered by
descending item support, with cover-intersection support pruning.  Without
parity constraints it degenerates to classic set-enumeration (one node per
frequent itemset).  With constraints it branches on item values, keeps the
GF(2) system reduced under the partial assignment, propagates implied unit
equations, and backtracks on contradiction, so the XORs prune the tree instead
of filtering its leaves.

Cells list patterns in a canonical order: preorder of the set-enumeration tree
over the internal (support-descending) item order.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from .data import Itemset, TransactionDB

WeightFn = Callable[[Itemset], float]


@dataclass(frozen=True)
class XorConstraint:
    """One parity equation: popcount(p & coeff_mask) mod 2 == parity."""

    coeff_mask: int
    parity: int

    def holds_for_mask(self, item_mask: int) -> bool:
        return (item_mask & self.coeff_mask).bit_count() & 1 == self.parity

    def involved_items(self) -> Itemset:
        mask, out = self.coeff_mask, []
        while mask:
            low = mask & -mask
            out.append(low.bit_length())
            mask ^= low
        return tuple(out)


def _gauss_reduce(rows: list[tuple[int, int]]) -> tuple[list[tuple[int, int]], bool]:
    """Row-echelon form over GF(2) on (mask, parity) rows; flags 0 = 1."""
    reduced: list[tuple[int, int]] = []  # each with a unique leading (highest) bit
    inconsistent = False
    for mask, parity in rows:
        for rmask, rparity in reduced:
            if mask & (1 << (rmask.bit_length() - 1)):
                mask ^= rmask
                parity ^= rparity
        if mask == 0:
            if parity == 1:
                inconsistent = True
            continue
        reduced.append((mask, parity))
        reduced.sort(key=lambda r: -r[0].bit_length())
    return reduced, inconsistent


class XorSystem:
    """m parity constraints over items, kept alongside a Gauss-reduced form."""

    def __init__(self, constraints: Sequence[XorConstraint]):
        self.constraints = tuple(constraints)
        self.reduced, self.inconsistent = _gauss_reduce(
            [(c.coeff_mask, c.parity) for c in self.constraints]
        )

    @property
    def m(self) -> int:
        return len(self.constraints)

    @property
    def rank(self) -> int:
        return len(self.reduced)

    def satisfies(self, p: Iterable[int]) -> bool:
        mask = 0
        for i in p:
            mask |= 1 << (i - 1)
        return self.satisfies_mask(mask)

    def satisfies_mask(self, item_mask: int) -> bool:
        return all(c.holds_for_mask(item_mask) for c in self.constraints)

    def __repr__(self) -> str:
        return f"XorSystem(m={self.m}, rank={self.rank}, inconsistent={self.inconsistent})"


def xor_satisfies(xors: XorSystem | None, p: Iterable[int]) -> bool:
    return xors is None or xors.satisfies(p)


def draw_random_xors(m: int, n_items: int, rng: np.random.Generator) -> XorSystem:
    """m constraints with every coefficient and parity bit a fair coin flip."""
    if m < 0:
        raise ValueError("m must be non-negative")
    bits = rng.integers(0, 2, size=(m, n_items + 1), dtype=np.uint8)
    constraints = []
    for row in bits:
        coeff = 0
        for i in range(n_items):
            coeff |= int(row[i]) << i
        constraints.append(XorConstraint(coeff, int(row[n_items])))
    return XorSystem(constraints)


@dataclass
class Cell:
    """Result of one (possibly constrained) enumeration."""

    patterns: list[Itemset]
    weights: np.ndarray
    supports: np.ndarray
    truncated: bool = False
    nodes: int = 0  # search nodes visited; diagnostic only
    covers: list[int] | None = None  # per-pattern transaction bitmasks, on request

    def __len__(self) -> int:
        return len(self.patterns)

    @property
    def total_weight(self) -> float:
        return float(self.weights.sum())


class _CapReached(Exception):
    pass


class _Search:
    """One enumeration run; see module docstring for the strategy."""

    def __init__(self, db: TransactionDB, theta: int, eqs, cap, propagate: bool):
        order = sorted(
            range(db.n_items),
            key=lambda i: (-db.item_covers[i].bit_count(), i),
        )
        self.pos_item = [i + 1 for i in order]  # position -> item id
        self.covers = [db.item_covers[i] for i in order]
        self.sups = [c.bit_count() for c in self.covers]
        self.n = db.n_items
        self.theta = theta
        self.cap = cap
        self.propagate = propagate
        self.eqs0 = eqs  # positional (mask, parity) rows
        self.out_masks: list[int] = []
        self.out_covers: list[int] = []
        self.out_sups: list[int] = []
        self.nodes = 0
        self.truncated = False
        # positions whose items cannot be in any frequent pattern
        self.dead_mask = 0
        for pos in range(self.n):
            if self.sups[pos] < theta:
                self.dead_mask |= 1 << pos

    def _emit(self, mask: int, cov: int, sup: int):
        self.out_masks.append(mask)
        self.out_covers.append(cov)
        self.out_sups.append(sup)
        if self.cap is not None and len(self.out_masks) > self.cap:
            self.truncated = True
            raise _CapReached

    def run(self, root_cover: int, root_sup: int):
        eqs = self.eqs0
        # infrequent items are excluded everywhere: substitute x = 0
        if eqs:
            subst = []
            for mask, parity in eqs:
                mask &= ~self.dead_mask
                if mask == 0:
                    if parity:
                        return  # empty cell
                    continue
                subst.append((mask, parity))
            eqs = subst
        try:
            if not eqs and self.propagate:
                cands = [
                    (pos, self.covers[pos], self.sups[pos])
                    for pos in range(self.n)
                    if self.sups[pos] >= self.theta
                ]
                self._emit(0, root_cover, root_sup)
                self.nodes += 1
                if cands:
                    self._subset_dfs(0, cands)
            else:
                self._binary_dfs(0, root_cover, 0, self.dead_mask, eqs)
                self._sort_output()
        except _CapReached:
            del self.out_masks[self.cap :]
            del self.out_covers[self.cap :]
            del self.out_sups[self.cap :]

    # -- unconstrained fast path ------------------------------------------

    def _subset_dfs(self, prefix_mask: int, cands):
        theta = self.theta
        for idx, (pos, cov, sup) in enumerate(cands):
            self.nodes += 1
            mask = prefix_mask | (1 << pos)
            self._emit(mask, cov, sup)
            children = []
            for pos2, cov2, _ in cands[idx + 1 :]:
                nc = cov & cov2
                s = nc.bit_count()
                self.nodes += 1
                if s >= theta:
                    children.append((pos2, nc, s))
            if children:
                self._subset_dfs(mask, children)

    # -- constrained binary path ------------------------------------------

    def _assign(self, pos, val, cover, included, decided, eqs):
        """Apply x_pos = val plus implied forced values; None on contradiction."""
        queue = [(pos, val)]
        while queue:
            p, v = queue.pop()
            bit = 1 << p
            if decided & bit:
                if bool(included & bit) != bool(v):
                    return None
                continue
            decided |= bit
            if v:
                included |= bit
                cover &= self.covers[p]
                if cover.bit_count() < self.theta:
                    return None
            new_eqs = []
            for mask, parity in eqs:
                if mask & bit:
                    mask &= ~bit
                    parity ^= v
                    if mask == 0:
                        if parity:
                            return None
                        continue
                    if mask & (mask - 1) == 0:  # unit: forces one more item
                        queue.append((mask.bit_length() - 1, parity))
                        continue
                new_eqs.append((mask, parity))
            eqs = new_eqs
        return cover, included, decided, eqs

    def _binary_dfs(self, pos, cover, included, decided, eqs):
        while pos < self.n and decided >> pos & 1:
            pos += 1
        if self.propagate and not eqs:
            # remaining items are unconstrained: finish with set enumeration
            sup = cover.bit_count()
            self._emit(included, cover, sup)
            self.nodes += 1
            cands = []
            for p2 in range(pos, self.n):
                if decided >> p2 & 1:
                    continue
                nc = cover & self.covers[p2]
                s = nc.bit_count()
                self.nodes += 1
                if s >= self.theta:
                    cands.append((p2, nc, s))
            if cands:
                self._subset_dfs(included, cands)
            return
        if pos == self.n:
            self.nodes += 1
            if self.propagate or self._posthoc_ok(included):
                self._emit(included, cover, cover.bit_count())
            return
        for val in (1, 0):
            self.nodes += 1
            if self.propagate:
                res = self._assign(pos, val, cover, included, decided, eqs)
                if res is not None:
                    self._binary_dfs(pos + 1, *res)
            else:
                bit = 1 << pos
                if val:
                    nc = cover & self.covers[pos]
                    if nc.bit_count() >= self.theta:
                        self._binary_dfs(
                            pos + 1, nc, included | bit, decided | bit, eqs
                        )
                else:
                    self._binary_dfs(pos + 1, cover, included, decided | bit, eqs)

    def _posthoc_ok(self, included: int) -> bool:
        return all(
            (included & mask).bit_count() & 1 == parity for mask, parity in self.eqs0
        )

    def _sort_output(self):
        def key(mask: int):
            positions = []
            while mask:
                low = mask & -mask
                positions.append(low.bit_length() - 1)
                mask ^= low
            return positions

        orderidx = sorted(range(len(self.out_masks)), key=lambda r: key(self.out_masks[r]))
        self.out_masks = [self.out_masks[r] for r in orderidx]
        self.out_covers = [self.out_covers[r] for r in orderidx]
        self.out_sups = [self.out_sups[r] for r in orderidx]

    def pattern_of_mask(self, mask: int) -> Itemset:
        items = []
        while mask:
            low = mask & -mask
            items.append(self.pos_item[low.bit_length() - 1])
            mask ^= low
        return tuple(sorted(items))


def enumerate_frequent(
    db: TransactionDB,
    theta: int,
    xors: XorSystem | None = None,
    weight_fn: WeightFn | None = None,
    cap: int | None = None,
    propagate: bool = True,
    keep_covers: bool = False,
) -> Cell:
    """All itemsets with support >= theta satisfying every XOR of `xors`.

    `cap` bounds the result size: if more than `cap` qualifying patterns
    exist, enumeration stops early and the cell is marked truncated.
    """
    if theta < 1:
        raise ValueError("theta must be >= 1")
    if cap is not None and cap < 1:
        raise ValueError("cap must be >= 1 when given")

    empty = Cell([], np.empty(0), np.empty(0, dtype=np.int64))
    if theta > db.n_transactions:
        return empty
    if xors is not None and xors.inconsistent:
        return empty

    # positional equation rows from the reduced system
    eqs = []
    if xors is not None:
        order = sorted(
            range(db.n_items), key=lambda i: (-db.item_covers[i].bit_count(), i)
        )
        item_to_pos = {i + 1: pos for pos, i in enumerate(order)}
        for mask, parity in xors.reduced:
            pmask = 0
            while mask:
                low = mask & -mask
                pmask |= 1 << item_to_pos[low.bit_length()]
                mask ^= low
            eqs.append((pmask, parity))

    search = _Search(db, theta, eqs, cap, propagate)
    search.run(db.all_cover, db.n_transactions)

    patterns = [search.pattern_of_mask(m) for m in search.out_masks]
    supports = np.asarray(search.out_sups, dtype=np.int64)
    if weight_fn is None:
        weights = np.ones(len(patterns))
    else:
        weights = np.asarray([weight_fn(p) for p in patterns], dtype=np.float64)
    return Cell(
        patterns,
        weights,
        supports,
        truncated=search.truncated,
        nodes=search.nodes,
        covers=search.out_covers if keep_covers else None,
    )
