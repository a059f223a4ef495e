"""Greedy farthest-first k-center, nearest-center assignment and the
k-center objective (largest distance from a node to its cluster center)."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable, Iterable

import numpy as np

from .dataset import Dataset
from .errors import InfeasibleError
from .metric import DistanceMetric

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class Cluster:
    center: int
    members: frozenset

    def __len__(self):
        return len(self.members)


@dataclass(frozen=True)
class Clustering:
    """A partition of node ids into non-empty clusters, each with a center.

    ``objective`` is the k-center objective, computed once at construction
    by :func:`make_clustering`.
    """

    clusters: tuple
    k_requested: int
    objective: float

    def __len__(self):
        return len(self.clusters)

    @property
    def centers(self) -> list[int]:
        return [c.center for c in self.clusters]

    @property
    def members(self) -> list[frozenset]:
        return [c.members for c in self.clusters]

    @property
    def sizes(self) -> list[int]:
        return [len(c.members) for c in self.clusters]

    def node_ids(self) -> frozenset:
        return frozenset().union(*self.members)

    def labels(self, n: int) -> np.ndarray:
        """Cluster index per node id; -1 for nodes outside the clustering."""
        out = np.full(n, -1, dtype=np.int64)
        for j, c in enumerate(self.clusters):
            out[list(c.members)] = j
        return out

    def key(self) -> frozenset:
        """Order-independent identity of the partition (ignores centers)."""
        return frozenset(self.members)

    def check(self, ids: Iterable[int] | None = None) -> None:
        """Raise AssertionError if any structural invariant is broken."""
        seen: set[int] = set()
        total = 0
        assert 1 <= len(self.clusters) <= self.k_requested, (
            f"{len(self.clusters)} clusters for k={self.k_requested}"
        )
        for j, c in enumerate(self.clusters):
            assert c.members, f"cluster {j} is empty"
            assert c.center in c.members, f"center {c.center} not in cluster {j}"
            seen |= c.members
            total += len(c.members)
        assert total == len(seen), "clusters overlap"
        if ids is not None:
            assert seen == set(ids), "clusters do not cover the clustered node set"


def make_clustering(d: Dataset, m: DistanceMetric, parts, k: int) -> Clustering:
    """Build a Clustering from ``(center, members)`` pairs, computing its objective."""
    clusters = tuple(Cluster(int(c), frozenset(int(v) for v in mem)) for c, mem in parts)
    return Clustering(clusters, k, _objective(d, m, clusters))


def _objective(d, m, clusters) -> float:
    worst = 0.0
    for c in clusters:
        if len(c.members) > 1:
            worst = max(worst, float(m.to_many(d, c.center, sorted(c.members)).max()))
    return worst


def kcenter_objective(d: Dataset, m: DistanceMetric, c: Clustering) -> float:
    return _objective(d, m, c.clusters)


def find_center(d: Dataset, m: DistanceMetric, S) -> int:
    """Exact 1-center of ``S``: the member minimizing its largest distance to
    the other members.  Ties go to the lowest id."""
    ids = sorted(S)
    if not ids:
        raise ValueError("find_center needs a non-empty node set")
    if len(ids) == 1:
        return ids[0]
    ecc = m.block(d, ids, ids).max(axis=1)
    return ids[int(np.argmin(ecc))]


def _sorted_ids(ids, d: Dataset) -> np.ndarray:
    if ids is None:
        return np.arange(d.n)
    arr = np.array(sorted(set(int(i) for i in ids)), dtype=np.int64)
    if arr.size and (arr[0] < 0 or arr[-1] >= d.n):
        raise IndexError(f"node ids must lie in [0, {d.n})")
    return arr


def greedy_kcenter(
    d: Dataset,
    m: DistanceMetric,
    ids=None,
    k: int = 1,
    seed: int | None = 0,
    deterministic: bool = False,
) -> Clustering:
    """Farthest-first traversal over ``ids`` (all nodes when None).

    The first center is drawn uniformly from ``ids`` with ``seed``, or is the
    lowest id when ``deterministic`` is set.  Each further center is the node
    farthest from its nearest chosen center (ties to the lowest id).  Nodes go
    to their nearest center, ties to the earlier-chosen one.
    """
    pool = _sorted_ids(ids, d)
    if pool.size == 0:
        raise ValueError("greedy_kcenter needs a non-empty node set")
    if not 1 <= k <= pool.size:
        raise ValueError(f"k must lie in [1, {pool.size}], got {k}")
    if deterministic:
        first = 0
    else:
        first = int(np.random.default_rng(seed).integers(pool.size))

    chosen = [first]
    near = m.to_many(d, int(pool[first]), pool).astype(float)
    label = np.zeros(pool.size, dtype=np.int64)
    taken = np.zeros(pool.size, dtype=bool)
    taken[first] = True
    for j in range(1, k):
        gap = np.where(taken, -np.inf, near)
        nxt = int(np.argmax(gap))
        chosen.append(nxt)
        taken[nxt] = True
        dist = m.to_many(d, int(pool[nxt]), pool)
        closer = dist < near
        near = np.where(closer, dist, near)
        label[closer] = j
    # a center always owns itself, even when a duplicate point was chosen earlier
    for j, pos in enumerate(chosen):
        label[pos] = j
        near[pos] = 0.0

    parts = [(int(pool[pos]), pool[label == j]) for j, pos in enumerate(chosen)]
    clusters = tuple(Cluster(c, frozenset(mem.tolist())) for c, mem in parts)
    return Clustering(clusters, k, float(near.max()))


def assign_to_centers(d: Dataset, m: DistanceMetric, centers, ids=None, k: int | None = None) -> Clustering:
    """Assign every node of ``ids`` to its nearest center (ties to the
    lower-indexed center in ``centers``)."""
    centers = [int(c) for c in centers]
    if not centers:
        raise ValueError("assign_to_centers needs at least one center")
    if len(set(centers)) != len(centers):
        raise ValueError("duplicate centers")
    pool = _sorted_ids(ids, d)
    missing = set(centers) - set(pool.tolist())
    if missing:
        raise ValueError(f"centers {sorted(missing)} are not among the clustered ids")
    dist = m.block(d, centers, pool)
    label = np.argmin(dist, axis=0)
    pos = {v: i for i, v in enumerate(pool.tolist())}
    for j, c in enumerate(centers):
        label[pos[c]] = j
    parts = [(c, pool[label == j]) for j, c in enumerate(centers)]
    return make_clustering(d, m, parts, k or len(centers))


def _clustering_of(result) -> Clustering:
    return result if isinstance(result, Clustering) else result.clustering


def best_of_k(
    d: Dataset,
    m: DistanceMetric,
    k: int,
    runner: Callable[[int], object],
    feasible: Callable[[object], bool] | None = None,
):
    """Run ``runner(k')`` for every k' in 1..k and keep the lowest-objective
    result that meets the runner's contract.

    ``runner`` returns a :class:`Clustering` or anything with a ``clustering``
    attribute.  Results exposing ``converged`` are feasible only when it is
    true, unless ``feasible`` overrides that.  k' values for which the runner
    raises :class:`InfeasibleError` are skipped.  If no candidate is feasible
    the k' = k result is returned.  Ties go to the smaller k'.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if feasible is None:
        feasible = lambda r: bool(getattr(r, "converged", True))  # noqa: E731
    best = None
    best_obj = np.inf
    last = None
    for kk in range(1, k + 1):
        try:
            res = runner(kk)
        except InfeasibleError as exc:
            log.debug("best_of_k: k'=%d skipped (%s)", kk, exc)
            continue
        last = res
        obj = _clustering_of(res).objective
        if feasible(res) and obj < best_obj:
            best, best_obj = res, obj
    if best is None:
        if last is None:
            raise InfeasibleError(f"runner was infeasible for every k' <= {k}")
        return last
    return best
