"""Exact reference solvers for tiny instances (n <= 12).

Used by the test-suite to check approximation guarantees.  Everything here
is exhaustive enumeration: set partitions into at most k blocks, with each
block's exact 1-center and interpretability score tabulated once per subset
bitmask.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataset import Dataset
from .errors import InfeasibleError
from .kcenter import Clustering, make_clustering
from .metric import DistanceMetric

MAX_N = 12


@dataclass(frozen=True)
class OracleResult:
    opt_objective: float
    witness: Clustering
    feasible_count: int


def _guard(d: Dataset, k: int):
    if d.n > MAX_N:
        raise ValueError(f"brute force is limited to n <= {MAX_N}, got n = {d.n}")
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")


class _SubsetTable:
    """Per-bitmask 1-center, radius and interpretability score."""

    def __init__(self, d: Dataset, m: DistanceMetric):
        n = d.n
        D = m.matrix(d)
        masks = np.arange(1 << n)
        bits = ((masks[:, None] >> np.arange(n)[None, :]) & 1).astype(bool)
        # cost[mask, c] = largest distance from c to a member, +inf if c is outside mask
        cost = np.empty((1 << n, n))
        for c in range(n):
            cost[:, c] = np.where(bits, D[c][None, :], -np.inf).max(axis=1)
        cost[~bits] = np.inf
        cost[0] = 0.0
        self.center = np.argmin(cost, axis=1)
        self.radius = cost[masks, self.center]
        self.radius[0] = 0.0
        onehot = np.zeros((n, d.num_values), dtype=np.int64)
        onehot[np.arange(n), d.foi_codes] = 1
        counts = bits.astype(np.int64) @ onehot
        size = bits.sum(axis=1)
        size[0] = 1
        self.score = counts.max(axis=1) / size
        self.n = n


def _partitions(full: int, k: int):
    """Yield every partition of the bitmask ``full`` into at most k blocks."""
    if full == 0:
        yield ()
        return
    if k == 0:
        return
    low = full & -full
    rest = full ^ low
    if k == 1:
        yield (full,)
        return
    sub = rest
    while True:
        block = low | sub
        for tail in _partitions(rest & ~sub, k - 1):
            yield (block,) + tail
        if sub == 0:
            break
        sub = (sub - 1) & rest


def _members(mask: int, n: int) -> list[int]:
    return [i for i in range(n) if mask >> i & 1]


def _search(d: Dataset, m: DistanceMetric, k: int, beta: float | None) -> OracleResult | None:
    _guard(d, k)
    n = d.n
    if k >= n:
        parts = [(i, [i]) for i in range(n)]
        return OracleResult(0.0, make_clustering(d, m, parts, k), 1)
    table = _SubsetTable(d, m)
    best, best_obj, feasible = None, np.inf, 0
    for part in _partitions((1 << n) - 1, k):
        if beta is not None and min(table.score[b] for b in part) < beta:
            continue
        feasible += 1
        obj = max(table.radius[b] for b in part)
        if obj < best_obj:
            best, best_obj = part, obj
    if best is None:
        return None
    parts = [(int(table.center[b]), _members(b, n)) for b in best]
    witness = make_clustering(d, m, parts, k)
    return OracleResult(float(witness.objective), witness, feasible)


def brute_force_kcenter_opt(d: Dataset, m: DistanceMetric, k: int) -> OracleResult:
    """Minimum k-center objective over all partitions into <= k clusters."""
    return _search(d, m, k, None)


def brute_force_interpretable_opt(d: Dataset, m: DistanceMetric, k: int, beta: float) -> OracleResult:
    """Minimum k-center objective over partitions whose interpretability
    score is at least ``beta``; raises InfeasibleError if there is none."""
    if not 0.0 <= beta <= 1.0:
        raise ValueError(f"beta must lie in [0, 1], got {beta}")
    res = _search(d, m, k, beta)
    if res is None:
        bmax = brute_force_beta_max(d, k)
        raise InfeasibleError(f"no clustering with k <= {k} reaches beta = {beta} (beta_max = {bmax:.6g})", beta_max=bmax)
    return res


def brute_force_beta_max(d: Dataset, k: int) -> float:
    """Largest interpretability score over all partitions into <= k clusters.

    The score depends only on how many nodes of each value land in each
    cluster, so the search distributes value counts instead of node ids,
    breaking the symmetry between clusters with identical histories.
    """
    _guard(d, k)
    if d.num_values <= k or d.n <= k:
        return 1.0
    counts = [d.count_of(c) for c in range(d.num_values)]
    best = 0.0

    def rec(v, hist):
        nonlocal best
        if v == len(counts):
            scores = [max(h) / sum(h) for h in hist if sum(h)]
            best = max(best, min(scores))
            return
        for split in _ordered_spreads(counts[v], hist):
            rec(v + 1, [h + (x,) for h, x in zip(hist, split)])

    rec(0, [()] * k)
    return float(best)


def _ordered_spreads(total, hist):
    """Ways to split ``total`` nodes over clusters with histories ``hist``.

    Clusters with identical histories are interchangeable and stay
    contiguous, so a cluster never gets more than an identical predecessor.
    """
    k = len(hist)

    def gen(i, remaining, prev):
        if i == k:
            if remaining == 0:
                yield ()
            return
        hi = remaining
        if i > 0 and hist[i] == hist[i - 1]:
            hi = min(hi, prev)
        lo = remaining if i == k - 1 else 0
        for x in range(hi, lo - 1, -1):
            for tail in gen(i + 1, remaining - x, x):
                yield (x,) + tail

    return gen(0, total, None)
