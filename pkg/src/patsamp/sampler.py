"""Weighted sampling of frequent patterns via random-XOR cell partitioning.

A batch works as follows: estimate the number m of parity constraints from the
total weight of the space and a pivot derived from the error tolerance, then
per sample draw m fresh uniform XORs, enumerate the induced cell, accept it if
its weight lands in the pivot band, and pick from the cell either a perfect
weighted sample ("random" strategy) or its top-m patterns by weight ("topK").
Rejected draws retry with one constraint fewer (cell too light) or one more
(too heavy), a bounded number of times.

Exact mode bypasses the cells and draws directly from the normalized weight
vector over all frequent patterns; it is the ground-truth oracle the hashed
pipeline is validated against, and also how the total weight is computed when
a materialized PatternStore is available.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .data import Itemset, TransactionDB
from .enumerator import Cell, XorSystem, draw_random_xors, enumerate_frequent
from .store import PatternStore


class SamplerExhaustedError(RuntimeError):
    """No acceptable cell found within the retry budget."""


class WeightContractError(ValueError):
    """A weight fell outside [A, 1]."""


def pivot_for(kappa: float) -> int:
    return math.ceil(4.03 * (1.0 + 1.0 / kappa) ** 2)


def xor_count_for_weight(w_total: float, kappa: float) -> int:
    """max(0, ceil(log2(W / pivot)))."""
    pv = pivot_for(kappa)
    if w_total <= pv:
        return 0
    return max(0, math.ceil(math.log2(w_total / pv)))


@dataclass(frozen=True)
class SamplerConfig:
    kappa: float = 0.9
    range_a: float = 0.5
    strategy: str = "top1"  # "random" or "top<m>"
    mode: str = "hashed"  # "hashed" or "exact"
    max_retries: int = 10

    def __post_init__(self):
        if not 0.0 < self.kappa < 1.0:
            raise ValueError("kappa must lie in (0, 1)")
        if not 0.0 < self.range_a < 1.0:
            raise ValueError("range_a must lie in (0, 1)")
        if self.mode not in ("hashed", "exact"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.max_retries < 1:
            raise ValueError("max_retries must be positive")
        self.top_m  # validates strategy

    @property
    def top_m(self) -> int | None:
        """m of a top-m strategy, or None for the random strategy."""
        if self.strategy == "random":
            return None
        match = re.fullmatch(r"top(\d+)", self.strategy)
        if not match or int(match.group(1)) < 1:
            raise ValueError(f"unknown strategy {self.strategy!r}")
        return int(match.group(1))


@dataclass
class CellDraw:
    xor_count: int
    cell: Cell
    accepted: bool
    reason: str  # "ok" | "below-band" | "above-band"


def perfect_sample_from_cell(cell: Cell, rng: np.random.Generator) -> Itemset:
    """Categorical draw proportional to the cell's weights."""
    if cell.truncated:
        raise WeightContractError("cannot sample perfectly from a truncated cell")
    if len(cell) == 0:
        raise ValueError("cannot sample from an empty cell")
    probs = cell.weights / cell.weights.sum()
    return cell.patterns[int(rng.choice(len(cell), p=probs))]


class PatternSampler:
    """Owns one rng and one weight function; not safe for concurrent use."""

    def __init__(
        self,
        db: TransactionDB,
        theta: int,
        weight,
        config: SamplerConfig,
        rng: np.random.Generator,
        store: PatternStore | None = None,
    ):
        self.db = db
        self.theta = theta
        self.config = config
        self.rng = rng
        self.store = store
        self._pivot = pivot_for(config.kappa)
        self._band = (
            self._pivot / (1.0 + config.kappa),
            self._pivot * (1.0 + config.kappa),
        )
        # a cell with this many patterns is certainly above the band
        self._cap = math.floor(self._band[1] / config.range_a) + 1

        if callable(getattr(weight, "batch_weights", None)):
            self._model = weight
            self._weight_fn = None
        elif callable(weight):
            self._model = None
            self._weight_fn = weight
        else:
            raise TypeError("weight must be a LogisticModel or a callable")

        self._weights_vec: np.ndarray | None = None
        if store is not None:
            if store.db is not db or store.theta != theta:
                raise ValueError("store was built for a different (db, theta)")
            if self._model is not None:
                vec = self._model.batch_weights(store)
            else:
                vec = np.array([self._weight_fn(p) for p in store.patterns])
            self._check_bounds(vec)
            self._weights_vec = vec

    # -- weight plumbing ----------------------------------------------------

    def _check_bounds(self, values: np.ndarray) -> None:
        a = self.config.range_a
        if values.size and (values.min() < a or values.max() > 1.0):
            raise WeightContractError(
                f"weights outside [{a}, 1]: range "
                f"[{values.min():.6g}, {values.max():.6g}]"
            )

    def _checked_weight_fn(self) -> Callable[[Itemset], float]:
        a = self.config.range_a
        if self._model is not None:
            fn = lambda p: self._model.q_of_pattern(self.db, p)
        else:
            fn = self._weight_fn

        def checked(p: Itemset) -> float:
            w = float(fn(p))
            if not a <= w <= 1.0:
                raise WeightContractError(f"weight {w!r} for {p} outside [{a}, 1]")
            return w

        return checked

    def _full_cell(self) -> Cell:
        if self.store is not None:
            return Cell(
                self.store.patterns,
                self._weights_vec,
                self.store.supports,
            )
        cell = enumerate_frequent(
            self.db, self.theta, weight_fn=self._checked_weight_fn()
        )
        return cell

    # -- spec operations ------------------------------------------------------

    def w_total(self) -> float:
        """Total weight of the frequent set: exact with a store or in exact
        mode, otherwise a median-of-5 cell-probe estimate."""
        if self._weights_vec is not None:
            return float(self._weights_vec.sum())
        if self.config.mode == "exact":
            return self._full_cell().total_weight
        estimates = [self._probe_w_total() for _ in range(5)]
        return float(np.median(estimates))

    def _probe_w_total(self) -> float:
        probe_cap = max(64, math.ceil(4 * self._pivot / self.config.range_a))
        m = 0
        while m <= self.db.n_items + 2:
            xors = draw_random_xors(m, self.db.n_items, self.rng)
            cell = enumerate_frequent(
                self.db,
                self.theta,
                xors=xors,
                weight_fn=self._checked_weight_fn(),
                cap=probe_cap,
            )
            if not cell.truncated:
                return cell.total_weight * 2.0**m
            m += 1
        raise SamplerExhaustedError("weight probing failed to isolate a cell")

    def estimate_xor_count(self) -> int:
        return xor_count_for_weight(self.w_total(), self.config.kappa)

    def draw_cell(self, m: int) -> CellDraw:
        if m < 0:
            raise ValueError("m must be non-negative")
        xors = draw_random_xors(m, self.db.n_items, self.rng)
        if self.store is not None:
            cell = self.store.cell_at(xors, self._weights_vec, cap=self._cap)
        else:
            cell = enumerate_frequent(
                self.db,
                self.theta,
                xors=xors,
                weight_fn=self._checked_weight_fn(),
                cap=self._cap,
            )
        lo, hi = self._band
        if cell.truncated or cell.total_weight > hi:
            return CellDraw(m, cell, False, "above-band")
        if cell.total_weight < lo:
            return CellDraw(m, cell, False, "below-band")
        return CellDraw(m, cell, True, "ok")

    def _accepted_cell(self, m_start: int) -> Cell:
        m = m_start
        for _ in range(self.config.max_retries):
            draw = self.draw_cell(m)
            if draw.accepted:
                return draw.cell
            if m == 0 and draw.reason == "below-band" and len(draw.cell):
                # the zero-constraint cell is the whole frequent set; sampling
                # from it is exact, so a light space is usable as-is
                return draw.cell
            m = m + 1 if draw.reason == "above-band" else max(0, m - 1)
        raise SamplerExhaustedError(
            f"no acceptable cell in {self.config.max_retries} draws (last m={m})"
        )

    def _pick_from_cell(self, cell: Cell) -> list[Itemset]:
        assert len(cell.supports) == len(cell.patterns)
        assert (cell.supports >= self.theta).all(), "sampled cell holds an infrequent pattern"
        top_m = self.config.top_m
        if top_m is None:
            return [perfect_sample_from_cell(cell, self.rng)]
        order = np.argsort(-cell.weights, kind="stable")[:top_m]
        return [cell.patterns[i] for i in order]

    def draw_once(self, m: int | None = None) -> list[Itemset]:
        """One cell draw worth of samples: 1 pattern (random strategy) or up
        to m (top-m).  Exact mode returns a single direct draw."""
        if self.config.mode == "exact":
            cell = self._full_cell()
            if len(cell) == 0:
                raise ValueError("no frequent patterns at this threshold")
            return [perfect_sample_from_cell(cell, self.rng)]
        if m is None:
            m = self.estimate_xor_count()
        return self._pick_from_cell(self._accepted_cell(m))

    def sample_batch(self, n: int) -> list[Itemset]:
        if n < 0:
            raise ValueError("n must be non-negative")
        if self.store is not None and len(self.store) == 0:
            raise ValueError("no frequent patterns at this threshold")
        if self.store is None and self.config.mode == "hashed":
            probe = enumerate_frequent(self.db, self.theta, cap=1)
            if len(probe) == 0:
                raise ValueError("no frequent patterns at this threshold")
        if self.config.mode == "exact":
            cell = self._full_cell()
            if len(cell) == 0:
                raise ValueError("no frequent patterns at this threshold")
            probs = cell.weights / cell.weights.sum()
            idx = self.rng.choice(len(cell), size=n, p=probs)
            return [cell.patterns[int(i)] for i in idx]
        m = self.estimate_xor_count()
        out: list[Itemset] = []
        while len(out) < n:
            out.extend(self._pick_from_cell(self._accepted_cell(m)))
        return out[:n]


# module-level forms of the operations, for callers without a sampler object


def sample_batch(db, theta, weight, n, config, rng, store=None) -> list[Itemset]:
    return PatternSampler(db, theta, weight, config, rng, store).sample_batch(n)


def estimate_xor_count(db, theta, weight, config, rng, store=None) -> int:
    return PatternSampler(db, theta, weight, config, rng, store).estimate_xor_count()


def draw_cell(db, theta, weight, m, config, rng, store=None) -> CellDraw:
    return PatternSampler(db, theta, weight, config, rng, store).draw_cell(m)
