"""Independent brute-force reference implementations used as test oracles.

Everything here works on plain Python sets and loops, deliberately sharing no
code with the package under test.
"""

from __future__ import annotations

import itertools
import math


def naive_cover(transactions: list[set[int]], p) -> list[bool]:
    ps = set(p)
    return [ps <= t for t in transactions]


def naive_support(transactions: list[set[int]], p) -> int:
    return sum(naive_cover(transactions, p))


def naive_frequent(transactions: list[set[int]], items: list[int], theta: int):
    """All itemsets over `items` with support >= theta, by exhaustion."""
    out = []
    for r in range(len(items) + 1):
        for combo in itertools.combinations(sorted(items), r):
            if naive_support(transactions, combo) >= theta:
                out.append(tuple(combo))
    return out


def naive_xor_ok(p, constraints) -> bool:
    """constraints: list of (coefficient item-id set, parity bit)."""
    ps = set(p)
    for coeffs, parity in constraints:
        if len(ps & set(coeffs)) % 2 != parity:
            return False
    return True


def naive_surp(transactions: list[set[int]], p) -> float:
    n = len(transactions)
    fp = naive_support(transactions, p) / n
    prod = 1.0
    for i in p:
        prod *= naive_support(transactions, [i]) / n
    return max(fp - prod, 0.0)


def naive_chi2(transactions: list[set[int]], labels: list[int], p) -> float:
    """Pearson chi-square of the 2x2 table {occurs, not} x {-, +}."""
    a = b = c = d = 0  # a: occ&+, b: occ&-, c: not&+, d: not&-
    ps = set(p)
    for t, y in zip(transactions, labels):
        if ps <= t:
            if y == 1:
                a += 1
            else:
                b += 1
        else:
            if y == 1:
                c += 1
            else:
                d += 1
    n = a + b + c + d
    for marginal in (a + b, c + d, a + c, b + d):
        if marginal == 0:
            return 0.0
    num = n * (a * d - b * c) ** 2
    den = (a + b) * (c + d) * (a + c) * (b + d)
    return num / den


def naive_joint_entropy(transactions: list[set[int]], patterns) -> float:
    """Entropy (bits) of the per-transaction coverage-signature distribution."""
    n = len(transactions)
    counts: dict[tuple, int] = {}
    for t in transactions:
        sig = tuple(set(p) <= t for p in patterns)
        counts[sig] = counts.get(sig, 0) + 1
    h = 0.0
    for c in counts.values():
        q = c / n
        h -= q * math.log2(q)
    return h


def total_variation(counts: dict, target: dict[object, float], n_draws: int) -> float:
    keys = set(counts) | set(target)
    return 0.5 * sum(abs(counts.get(k, 0) / n_draws - target.get(k, 0.0)) for k in keys)
