"""Percentile-rank regret, joint-entropy diversity, and the experiment runner.

Query quality is scored non-parametrically: the percentile rank of a value is
the fraction of all frequent patterns whose measure is less than or equal to
it, so the best achievable pattern scores exactly 1.  Diversity is the joint
entropy of per-transaction coverage signatures, normalized by the query size.
Per-round regret is 1 minus each metric, accumulated over rounds; experiments
repeat over seeds with an emulated user and stream rows into a flat CSV.
"""

from __future__ import annotations

import csv
import io
import math
import os
from collections import Counter
from dataclasses import dataclass, field, replace

import numpy as np

from .baselines import EmulatedUser, IPMResult
from .data import Itemset, TransactionDB, cover
from .loop import Session, SessionParams
from .measures import QualityMeasure
from .store import PatternStore


class PercentileIndex:
    """Sorted measure values over all frequent patterns at one (db, theta)."""

    def __init__(self, values: np.ndarray):
        if len(values) == 0:
            raise ValueError("cannot index an empty pattern set")
        self.sorted_values = np.sort(np.asarray(values, dtype=np.float64))

    @classmethod
    def from_store(cls, store: PatternStore, phi: str) -> "PercentileIndex":
        return cls(store.measure_values(phi))

    def __len__(self) -> int:
        return len(self.sorted_values)

    def rank(self, value: float) -> float:
        """Fraction of patterns with measure <= value (weak inequality)."""
        pos = np.searchsorted(self.sorted_values, value, side="right")
        return float(pos) / len(self.sorted_values)


def joint_entropy(db: TransactionDB, patterns: list[Itemset]) -> float:
    """Entropy (bits) of the k-bit coverage-signature distribution; <= k."""
    if not patterns:
        raise ValueError("need at least one pattern")
    n = db.n_transactions
    signatures = [0] * n
    for i, p in enumerate(patterns):
        cov = cover(db, p)
        bit = 1 << i
        while cov:
            low = cov & -cov
            signatures[low.bit_length() - 1] |= bit
            cov ^= low
    h = 0.0
    for count in Counter(signatures).values():
        q = count / n
        h -= q * math.log2(q)
    return h


@dataclass
class IterationMetrics:
    iteration: int
    avg_pct: float
    max_pct: float
    hj_norm: float


@dataclass
class RegretReport:
    dataset: str
    phi: str
    seed: int
    params: SessionParams
    iterations: list[IterationMetrics] = field(default_factory=list)
    failed: bool = False
    error: str = ""

    @property
    def cum_avg_regret(self) -> float:
        return sum(1.0 - it.avg_pct for it in self.iterations)

    @property
    def cum_max_regret(self) -> float:
        return sum(1.0 - it.max_pct for it in self.iterations)

    @property
    def cum_hj_regret(self) -> float:
        return sum(1.0 - it.hj_norm for it in self.iterations)


def score_query(
    db: TransactionDB,
    ranked_query: list[Itemset],
    measure: QualityMeasure,
    index: PercentileIndex,
    iteration: int,
) -> IterationMetrics:
    values = [measure(p) for p in ranked_query]
    ranks = [index.rank(v) for v in values]
    return IterationMetrics(
        iteration=iteration,
        avg_pct=float(np.mean(ranks)),
        max_pct=index.rank(max(values)),
        hj_norm=joint_entropy(db, ranked_query) / len(ranked_query),
    )


def run_session_with_user(
    db: TransactionDB,
    params: SessionParams,
    user: EmulatedUser,
    index: PercentileIndex,
    iterations: int,
    store: PatternStore | None,
    dataset: str,
    phi: str,
    seed: int,
) -> RegretReport:
    report = RegretReport(dataset=dataset, phi=phi, seed=seed, params=params)
    try:
        session = Session(db, replace(params, seed=seed), store=store)
        for t in range(1, iterations + 1):
            query = session.next_query()
            ranking = user.order_query(query)
            report.iterations.append(
                score_query(db, ranking, user.measure, index, t)
            )
            session.submit_feedback(ranking)
    except Exception as exc:  # a failed seed is reported, never dropped
        report.failed = True
        report.error = f"{type(exc).__name__}: {exc}"
    return report


def run_experiment(
    db: TransactionDB,
    phi: str,
    params: SessionParams,
    iterations: int = 30,
    seeds: int = 10,
    store: PatternStore | None = None,
    dataset: str | None = None,
) -> list[RegretReport]:
    """Fresh session per seed; metrics on each round's ordered query."""
    if store is None:
        store = PatternStore.build(db, params.theta)
    index = PercentileIndex.from_store(store, phi)
    user = EmulatedUser(QualityMeasure(phi, db))
    name = dataset if dataset is not None else db.name
    return [
        run_session_with_user(
            db, params, user, index, iterations, store, name, phi,
            seed=params.seed + i,
        )
        for i in range(seeds)
    ]


def ipm_regret_report(
    db: TransactionDB,
    store: PatternStore,
    result: IPMResult,
    phi: str,
    index: PercentileIndex,
    tail: int = 5,
    dataset: str | None = None,
    seed: int = 0,
) -> RegretReport:
    """Regret of a multiplicative-weights run: the tail patterns of each
    sample group play the role of the round's query."""
    measure = QualityMeasure(phi, db)
    params = SessionParams(theta=store.theta, k=tail, retention=0)
    report = RegretReport(
        dataset=dataset or db.name, phi=phi, seed=seed, params=params
    )
    if result.overflow:
        report.failed = True
        report.error = f"double overflow at round {result.overflow_round}"
    for t, group in enumerate(result.batches, start=1):
        tail_patterns = group[-tail:]
        report.iterations.append(
            score_query(db, tail_patterns, measure, index, t)
        )
    return report


# -- CSV output ----------------------------------------------------------------

CSV_COLUMNS = [
    "dataset", "phi", "k", "l", "A", "strategy", "features", "seed", "iter",
    "avg_pct", "max_pct", "hj_norm",
    "cum_avg_regret", "cum_max_regret", "cum_hj_regret",
]


def report_rows(report: RegretReport):
    p = report.params
    cum_avg = cum_max = cum_hj = 0.0
    for it in report.iterations:
        cum_avg += 1.0 - it.avg_pct
        cum_max += 1.0 - it.max_pct
        cum_hj += 1.0 - it.hj_norm
        yield {
            "dataset": report.dataset,
            "phi": report.phi,
            "k": p.k,
            "l": p.retention,
            "A": repr(p.range_a),
            "strategy": p.strategy,
            "features": p.schema_kind,
            "seed": report.seed,
            "iter": it.iteration,
            "avg_pct": repr(it.avg_pct),
            "max_pct": repr(it.max_pct),
            "hj_norm": repr(it.hj_norm),
            "cum_avg_regret": repr(cum_avg),
            "cum_max_regret": repr(cum_max),
            "cum_hj_regret": repr(cum_hj),
        }


def write_csv(reports: list[RegretReport], path: str | os.PathLike) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(render_csv(reports))


def render_csv(reports: list[RegretReport]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for report in reports:
        for row in report_rows(report):
            writer.writerow(row)
    return buf.getvalue()


def mean_regrets(reports: list[RegretReport]) -> dict[str, float]:
    """Seed-averaged cumulative regrets; failed reports are excluded but counted."""
    ok = [r for r in reports if not r.failed]
    if not ok:
        return {"avg": math.nan, "max": math.nan, "hj": math.nan, "failures": len(reports)}
    return {
        "avg": float(np.mean([r.cum_avg_regret for r in ok])),
        "max": float(np.mean([r.cum_max_regret for r in ok])),
        "hj": float(np.mean([r.cum_hj_regret for r in ok])),
        "failures": len(reports) - len(ok),
    }


# -- parameter-study sweep -------------------------------------------------------


def parameter_sweep_presets(theta: int, base_seed: int = 0) -> list[tuple[str, SessionParams]]:
    """One-factor-at-a-time grid around the defaults (k=5, ILFT, A=0.5, l=1,
    top1): query size, feature schema, range, retention, and cell strategy."""
    base = SessionParams(theta=theta, k=5, retention=1, range_a=0.5,
                         strategy="top1", schema_kind="ILFT", seed=base_seed)
    presets: list[tuple[str, SessionParams]] = []
    for k in (5, 10):
        presets.append((f"k={k}", replace(base, k=k)))
    for kind in ("I", "ILF", "ILFT"):
        presets.append((f"features={kind}", replace(base, schema_kind=kind)))
    for a in (0.5, 0.1):
        presets.append((f"A={a}", replace(base, range_a=a)))
    for l in (0, 1, 2, 3):
        presets.append((f"l={l}", replace(base, retention=l)))
    for strategy in ("random", "top1", "top2", "top3"):
        presets.append((f"strategy={strategy}", replace(base, strategy=strategy)))
    return presets
