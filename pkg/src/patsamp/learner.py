"""Pattern features, the logistic interestingness function, and its training.

A pattern p maps to a feature vector: per-item indicator block, optionally
normalized length and frequency, optionally a per-transaction cover-indicator
block.  The interestingness function is A + (1 - A) * sigmoid(w . x): bounded
in (A, 1], so it can serve directly as a sampling weight function with tilt at
most 1/A.  Ordered feedback turns into positively-labeled difference vectors;
weights are fit by stochastic coordinate descent on L1-regularized logistic
loss, which is convex (fitting the bounded function directly would not be).
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import bitops
from .data import Itemset, TransactionDB, cover, support

SCHEMA_KINDS = ("I", "ILF", "ILFT")


@dataclass(frozen=True)
class FeatureSchema:
    kind: str
    n_items: int
    n_transactions: int

    def __post_init__(self):
        if self.kind not in SCHEMA_KINDS:
            raise ValueError(f"unknown schema kind {self.kind!r}")

    @property
    def dimension(self) -> int:
        if self.kind == "I":
            return self.n_items
        if self.kind == "ILF":
            return self.n_items + 2
        return self.n_items + 2 + self.n_transactions

    def feature_names(self, item_names: dict[int, str] | None = None) -> list[str]:
        names = [
            (item_names or {}).get(i, f"item:{i}")
            for i in range(1, self.n_items + 1)
        ]
        if self.kind != "I":
            names += ["length", "frequency"]
        if self.kind == "ILFT":
            names += [f"transaction:{t}" for t in range(self.n_transactions)]
        return names


def featurize(schema: FeatureSchema, db: TransactionDB, p: Itemset) -> np.ndarray:
    if schema.n_items != db.n_items or schema.n_transactions != db.n_transactions:
        raise ValueError("schema does not match database shape")
    x = np.zeros(schema.dimension)
    for i in p:
        x[i - 1] = 1.0
    if schema.kind == "I":
        return x
    m, n = db.n_items, db.n_transactions
    x[m] = len(p) / m
    x[m + 1] = support(db, p) / n
    if schema.kind == "ILFT":
        cov = cover(db, p)
        base = m + 2
        while cov:
            low = cov & -cov
            x[base + low.bit_length() - 1] = 1.0
            cov ^= low
    return x


def featurize_many(schema, db, patterns: Sequence[Itemset]) -> np.ndarray:
    return np.array([featurize(schema, db, p) for p in patterns])


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


@dataclass
class LogisticModel:
    """Weights plus the range parameter A; q(x) = A + (1-A) * sigmoid(w . x)."""

    schema: FeatureSchema
    weights: np.ndarray
    range_a: float

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=np.float64)
        if not 0.0 < self.range_a < 1.0:
            raise ValueError("range parameter must lie in (0, 1)")
        if self.weights.shape != (self.schema.dimension,):
            raise ValueError(
                f"weight vector has dimension {self.weights.shape}, "
                f"schema needs {self.schema.dimension}"
            )

    @classmethod
    def zeros(cls, schema: FeatureSchema, range_a: float) -> "LogisticModel":
        return cls(schema, np.zeros(schema.dimension), range_a)

    def score(self, features: np.ndarray) -> float:
        if features.shape != self.weights.shape:
            raise ValueError("feature dimension mismatch")
        return float(self.weights @ features)

    def q(self, features: np.ndarray) -> float:
        z = self.score(features)
        if z >= 0:
            s = 1.0 / (1.0 + math.exp(-z))
        else:
            ez = math.exp(z)
            s = ez / (1.0 + ez)
        return self.range_a + (1.0 - self.range_a) * s

    def q_of_pattern(self, db: TransactionDB, p: Itemset) -> float:
        return self.q(featurize(self.schema, db, p))

    def batch_scores(self, store) -> np.ndarray:
        """w . x over every pattern of a PatternStore, without dense features."""
        m, n = self.schema.n_items, self.schema.n_transactions
        w = self.weights
        z = bitops.weighted_column_sum(store.item_bits, w[:m])
        if self.schema.kind != "I":
            z += (store.lengths / m) * w[m]
            z += (store.supports / n) * w[m + 1]
        if self.schema.kind == "ILFT":
            z += bitops.weighted_column_sum(store.cover_bits, w[m + 2 :])
        return z

    def batch_weights(self, store) -> np.ndarray:
        return self.range_a + (1.0 - self.range_a) * _sigmoid(self.batch_scores(store))

    # -- serialization ------------------------------------------------------

    def to_doc(self) -> dict:
        return {
            "format": "pattern-model/1",
            "schema": self.schema.kind,
            "n_items": self.schema.n_items,
            "n_transactions": self.schema.n_transactions,
            "dimension": self.schema.dimension,
            "range_a": self.range_a,
            "weights": self.weights.tolist(),
        }

    @classmethod
    def from_doc(cls, doc: dict) -> "LogisticModel":
        schema = FeatureSchema(doc["schema"], doc["n_items"], doc["n_transactions"])
        if doc.get("dimension") not in (None, schema.dimension):
            raise ValueError("document dimension does not match its schema")
        return cls(schema, np.array(doc["weights"], dtype=np.float64), doc["range_a"])

    def save(self, path: str | os.PathLike) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_doc(), fh)

    @classmethod
    def load(cls, path: str | os.PathLike) -> "LogisticModel":
        with open(path) as fh:
            return cls.from_doc(json.load(fh))


def q_logistic(model: LogisticModel, features: np.ndarray) -> float:
    return model.q(features)


def pairs_from_feedback(
    rankings: Sequence[Sequence[Itemset]], schema: FeatureSchema, db: TransactionDB
) -> np.ndarray:
    """All higher-minus-lower difference vectors from the given rankings."""
    rows = []
    for ranking in rankings:
        feats = [featurize(schema, db, p) for p in ranking]
        for i in range(len(feats)):
            for j in range(i + 1, len(feats)):
                rows.append(feats[i] - feats[j])
    if not rows:
        return np.zeros((0, schema.dimension))
    return np.array(rows)


def loss_and_gradient(
    weights: np.ndarray, pairs: np.ndarray, lam: float
) -> tuple[float, np.ndarray]:
    """Regularized loss value and the gradient of its smooth part.

    Smooth part: mean over pairs of log(1 + exp(-w . d)); every difference
    vector carries an implicit positive label.
    """
    if pairs.shape[0] == 0:
        return lam * float(np.abs(weights).sum()), np.zeros_like(weights)
    margins = pairs @ weights
    loss = float(np.logaddexp(0.0, -margins).mean()) + lam * float(
        np.abs(weights).sum()
    )
    grad = -(pairs.T @ _sigmoid(-margins)) / pairs.shape[0]
    return loss, grad


def _soft_threshold(t: float, tau: float) -> float:
    if t > tau:
        return t - tau
    if t < -tau:
        return t + tau
    return 0.0


def scd_train(
    pairs: np.ndarray,
    lam: float,
    iterations: int,
    rng: np.random.Generator,
    warm_start: np.ndarray | None = None,
    dimension: int | None = None,
) -> np.ndarray:
    """Stochastic coordinate descent on L1-regularized pairwise logistic loss.

    Each update draws a coordinate uniformly at random, steps by the inverse
    per-coordinate curvature bound (quarter of the mean squared feature), and
    soft-thresholds; every update is non-increasing in the regularized loss.
    """
    if iterations < 0 or lam < 0:
        raise ValueError("iterations and lambda must be non-negative")
    if pairs.shape[0] == 0:
        if warm_start is not None:
            return np.array(warm_start, dtype=np.float64, copy=True)
        if dimension is None:
            raise ValueError("need warm_start or dimension when no pairs exist")
        return np.zeros(dimension)

    n, d = pairs.shape
    if warm_start is not None:
        w = np.array(warm_start, dtype=np.float64, copy=True)
        if w.shape != (d,):
            raise ValueError("warm start dimension mismatch")
    else:
        w = np.zeros(d)

    beta = (pairs * pairs).mean(axis=0) / 4.0
    margins = pairs @ w
    coords = rng.integers(0, d, size=iterations)
    for j in coords:
        if beta[j] == 0.0:
            # coordinate untouched by any pair: only the penalty remains
            w[j] = 0.0
            continue
        col = pairs[:, j]
        g = -float(col @ _sigmoid(-margins)) / n
        new_wj = _soft_threshold(w[j] - g / beta[j], lam / beta[j])
        if new_wj != w[j]:
            margins += (new_wj - w[j]) * col
            w[j] = new_wj
    if not np.isfinite(margins).all():
        raise FloatingPointError("non-finite margins during coordinate descent")
    return w
