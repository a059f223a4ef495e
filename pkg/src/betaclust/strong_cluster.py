"""Strongly interpretable (FoI-pure) k-center clustering.

Every way of sharing k clusters among the FoI values (each value at least
one) is tried; for a given share, each value's nodes are clustered on their
own with greedy k-center and the pieces are united.  The union with the
smallest objective wins.  Because greedy k-center is a 2-approximation for
every subproblem, the winner is within a factor 2 of the best pure
clustering.
"""

from __future__ import annotations

import logging
from itertools import combinations
from math import comb

import numpy as np

from .dataset import Dataset
from .errors import InfeasibleError
from .kcenter import Clustering, find_center, greedy_kcenter, make_clustering
from .metric import DistanceMetric

log = logging.getLogger(__name__)


def composition_count(num_values: int, k: int) -> int:
    return comb(k - 1, num_values - 1) if 1 <= num_values <= k else 0


def enumerate_compositions(num_values: int, k: int) -> list[tuple[int, ...]]:
    """All tuples of ``num_values`` positive parts summing to ``k``, in
    ascending lexicographic order."""
    if num_values < 1:
        raise ValueError("need at least one FoI value")
    if num_values > k:
        raise InfeasibleError(f"cannot give each of {num_values} FoI values its own cluster with k = {k}")
    out = []
    for cuts in combinations(range(1, k), num_values - 1):
        bounds = (0,) + cuts + (k,)
        out.append(tuple(b - a for a, b in zip(bounds, bounds[1:])))
    return out


class _Subproblems:
    """Cached greedy k-center runs on each FoI value's nodes."""

    def __init__(self, d: Dataset, m: DistanceMetric, seed, restarts: int, recenter: bool):
        self.d, self.m = d, m
        self.seed, self.restarts, self.recenter = seed, restarts, recenter
        self.groups = [np.flatnonzero(d.foi_codes == c) for c in range(d.num_values)]
        self._cache: dict[tuple[int, int], Clustering] = {}

    def solve(self, code: int, s: int) -> Clustering:
        key = (code, s)
        hit = self._cache.get(key)
        if hit is None:
            ids = self.groups[code]
            hit = greedy_kcenter(self.d, self.m, ids, s, deterministic=True)
            for r in range(self.restarts - 1):
                seed = None if self.seed is None else self.seed + r
                alt = greedy_kcenter(self.d, self.m, ids, s, seed=seed)
                if alt.objective < hit.objective:
                    hit = alt
            if self.recenter:
                parts = [(find_center(self.d, self.m, cl.members), cl.members) for cl in hit.clusters]
                hit = make_clustering(self.d, self.m, parts, s)
            self._cache[key] = hit
        return hit


def strong_interpretability(
    d: Dataset,
    m: DistanceMetric,
    k: int,
    seed: int | None = 0,
    restarts: int = 1,
    recenter: bool = False,
) -> Clustering:
    """Best FoI-pure clustering with exactly k clusters over all value shares.

    Subproblems use the deterministic first center; with ``restarts`` > 1
    each subproblem also tries ``restarts - 1`` seeded random starts and keeps
    its best.  ``recenter`` moves every sub-cluster's center to its exact
    1-center before shares are compared, which never raises a radius.
    Shares asking more clusters of a value than it has nodes are
    skipped.  Ties go to the share that comes first in enumeration order.
    """
    F = d.num_values
    if F > k:
        raise InfeasibleError(f"|F| = {F} exceeds k = {k}; no FoI-pure clustering exists", beta_max=None)
    if restarts < 1:
        raise ValueError("restarts must be >= 1")
    sub = _Subproblems(d, m, seed, restarts, recenter)
    sizes = [len(g) for g in sub.groups]
    best, best_obj, feasible = None, np.inf, 0
    for parts in enumerate_compositions(F, k):
        if any(s > n for s, n in zip(parts, sizes)):
            continue
        feasible += 1
        obj = max(sub.solve(c, s).objective for c, s in enumerate(parts))
        if obj < best_obj:
            best, best_obj = parts, obj
    if best is None:
        raise InfeasibleError(f"every value share is infeasible for k = {k} with value sizes {sizes}")
    log.debug("strong_interpretability: %d feasible shares, best %s -> %.6g", feasible, best, best_obj)
    clusters = tuple(cl for c, s in enumerate(best) for cl in sub.solve(c, s).clusters)
    return Clustering(clusters, k, float(best_obj))
