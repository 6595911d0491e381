"""Interactive session driver: sample a query, take an ordered ranking, retrain.

Each round, the top patterns of the previous ranking are retained, the
remaining slots are filled with fresh samples drawn proportionally to the
current model, the user (or an emulator) returns a total order over the query,
the order is decomposed into preference pairs, and the weights are retrained
by coordinate descent warm-started from the previous round.  A session owns a
single rng shared by sampling and training, so identical seeds plus identical
scripted feedback reproduce identical query sequences and weights.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from .data import Itemset, TransactionDB
from .learner import (
    SCHEMA_KINDS,
    FeatureSchema,
    LogisticModel,
    pairs_from_feedback,
)
from .learner import scd_train
from .sampler import PatternSampler, SamplerConfig
from .store import PatternStore


class ConfigurationError(ValueError):
    """Invalid session parameters for the given database."""


class FeedbackError(ValueError):
    """Feedback that is not a permutation of the pending query, or missing."""


@dataclass(frozen=True)
class SessionParams:
    theta: int
    k: int = 5
    retention: int = 1  # patterns carried over from the previous ranking
    range_a: float = 0.5
    strategy: str = "top1"
    schema_kind: str = "ILFT"
    lam: float = 0.001
    scd_updates: int = 1000
    kappa: float = 0.9
    mode: str = "hashed"
    seed: int = 0

    def __post_init__(self):
        if self.k < 1:
            raise ConfigurationError("query size k must be at least 1")
        if not 0 <= self.retention < self.k:
            raise ConfigurationError("retention must satisfy 0 <= l < k")
        if self.schema_kind not in SCHEMA_KINDS:
            raise ConfigurationError(f"unknown feature schema {self.schema_kind!r}")
        if self.theta < 1:
            raise ConfigurationError("theta must be at least 1")

    def sampler_config(self) -> SamplerConfig:
        return SamplerConfig(
            kappa=self.kappa,
            range_a=self.range_a,
            strategy=self.strategy,
            mode=self.mode,
        )


@dataclass
class IterationRecord:
    iteration: int
    query: list[Itemset]
    ranking: list[Itemset]
    weights: np.ndarray
    duplicates_flagged: bool


MAX_REDRAWS = 100


class Session:
    """One user's Mine-Interact-Learn-Repeat state."""

    def __init__(
        self,
        db: TransactionDB,
        params: SessionParams,
        store: PatternStore | None = None,
    ):
        self.db = db
        self.params = params
        if store is not None and (store.db is not db or store.theta != params.theta):
            raise ConfigurationError("store does not match (db, theta)")
        self.store = store
        n_frequent = self._frequent_count()
        if n_frequent < params.k:
            raise ConfigurationError(
                f"only {n_frequent} frequent patterns at theta={params.theta}, "
                f"need at least k={params.k}"
            )
        self.schema = FeatureSchema(
            params.schema_kind, db.n_items, db.n_transactions
        )
        self.model = LogisticModel.zeros(self.schema, params.range_a)
        self.rng = np.random.default_rng(params.seed)
        self.feedback: list[list[Itemset]] = []  # accumulated rankings U
        self._pairs = np.zeros((0, self.schema.dimension))
        self.prev_ranking: list[Itemset] = []
        self.pending_query: list[Itemset] | None = None
        self.pending_flagged = False
        self.iteration = 0
        self.history: list[IterationRecord] = []

    def _frequent_count(self) -> int:
        if self.store is not None:
            return len(self.store)
        from .enumerator import enumerate_frequent

        probe = enumerate_frequent(self.db, self.params.theta, cap=self.params.k)
        return self.params.k if probe.truncated else len(probe)

    # -- the loop -------------------------------------------------------------

    def next_query(self) -> list[Itemset]:
        if self.pending_query is not None:
            raise FeedbackError("previous query still awaits feedback")
        p = self.params
        retained = self.prev_ranking[: min(p.retention, len(self.prev_ranking))]
        sampler = PatternSampler(
            self.db, p.theta, self.model, p.sampler_config(), self.rng, self.store
        )
        m = sampler.estimate_xor_count() if p.mode == "hashed" else None
        chosen: list[Itemset] = list(retained)
        seen = set(retained)
        redraws = 0
        flagged = False
        while len(chosen) < p.k:
            for pattern in sampler.draw_once(m):
                if len(chosen) == p.k:
                    break
                if pattern in seen and redraws < MAX_REDRAWS:
                    redraws += 1
                    continue
                if pattern in seen:
                    flagged = True
                chosen.append(pattern)
                seen.add(pattern)
        self.pending_query = chosen
        self.pending_flagged = flagged
        return list(chosen)

    def submit_feedback(self, ranking: list[Itemset]) -> IterationRecord:
        if self.pending_query is None:
            raise FeedbackError("no pending query")
        ranking = [tuple(sorted(p)) for p in ranking]
        if Counter(ranking) != Counter(self.pending_query):
            raise FeedbackError("ranking is not a permutation of the pending query")
        p = self.params
        self.feedback.append(list(ranking))
        new_pairs = pairs_from_feedback([ranking], self.schema, self.db)
        if new_pairs.shape[0]:
            self._pairs = np.vstack([self._pairs, new_pairs])
        weights = scd_train(
            self._pairs,
            p.lam,
            p.scd_updates,
            self.rng,
            warm_start=self.model.weights,
        )
        self.model = LogisticModel(self.schema, weights, p.range_a)
        self.iteration += 1
        record = IterationRecord(
            iteration=self.iteration,
            query=self.pending_query,
            ranking=list(ranking),
            weights=weights.copy(),
            duplicates_flagged=self.pending_flagged,
        )
        self.history.append(record)
        self.prev_ranking = list(ranking)
        self.pending_query = None
        self.pending_flagged = False
        return record

    @property
    def pair_count(self) -> int:
        return int(self._pairs.shape[0])


def init_session(
    db: TransactionDB, params: SessionParams, store: PatternStore | None = None
) -> Session:
    return Session(db, params, store)


def next_query(session: Session) -> list[Itemset]:
    return session.next_query()


def submit_feedback(session: Session, ranking: list[Itemset]) -> IterationRecord:
    return session.submit_feedback(ranking)
