"""Interpretability scores of clusters and clusterings.

For a cluster C, ``I_f(C)`` is the fraction of its nodes with FoI value f and
``I_F(C)`` the largest such fraction; the value attaining it is the cluster's
majority.  A clustering scores the minimum ``I_F`` over its clusters.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataset import Dataset
from .kcenter import Clustering


@dataclass(frozen=True)
class ClusterScore:
    index: int
    score: float
    majority: object
    majority_count: int
    size: int


@dataclass(frozen=True)
class InterpretabilityReport:
    per_cluster: tuple
    clustering_score: float

    def majorities(self) -> list:
        return [c.majority for c in self.per_cluster]


def value_counts(d: Dataset, ids) -> np.ndarray:
    """FoI value counts, indexed by value code, over the node ids ``ids``."""
    idx = np.fromiter(ids, dtype=np.int64) if not isinstance(ids, np.ndarray) else ids
    return np.bincount(d.foi_codes[idx], minlength=d.num_values)


def majority_code(d: Dataset, counts: np.ndarray) -> int:
    """Argmax of ``counts``; ties go to the globally more frequent value,
    then to value order."""
    top = counts.max()
    tied = np.flatnonzero(counts == top)
    if len(tied) == 1:
        return int(tied[0])
    return int(tied[np.argmin(d.freq_rank[tied])])


def cluster_score(d: Dataset, ids) -> tuple[float, int, int]:
    """``(I_F, majority code, majority count)`` of a non-empty node set."""
    counts = value_counts(d, ids)
    size = int(counts.sum())
    if size == 0:
        raise ValueError("interpretability of an empty cluster is undefined")
    code = majority_code(d, counts)
    return counts[code] / size, code, int(counts[code])


def score_If(d: Dataset, cluster, f) -> float:
    ids = list(cluster)
    if not ids:
        raise ValueError("interpretability of an empty cluster is undefined")
    code = d.value_code(f)
    return int(np.count_nonzero(d.foi_codes[ids] == code)) / len(ids)


def score_IF(d: Dataset, cluster) -> tuple[float, object]:
    score, code, _ = cluster_score(d, list(cluster))
    return score, d.foi_values[code]


def score_clustering(d: Dataset, c: Clustering) -> InterpretabilityReport:
    per = []
    for j, cl in enumerate(c.clusters):
        score, code, count = cluster_score(d, list(cl.members))
        per.append(ClusterScore(j, score, d.foi_values[code], count, len(cl.members)))
    return InterpretabilityReport(tuple(per), min(p.score for p in per))


def beta_max_estimate(d: Dataset, k: int) -> float:
    """Greedy estimate of the best attainable clustering interpretability.

    With at most k FoI values, one pure cluster per value gives 1.0.
    Otherwise the k most frequent values each seed a cluster with all of
    their nodes.  The remaining nodes, taken value by value in descending
    count order, each join the cluster whose score after insertion is
    highest, preferring the larger cluster on ties and then the lower
    cluster index.  The result is a feasible clustering, so the estimate
    never exceeds the true optimum.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if d.num_values <= k:
        return 1.0
    order = d.codes_by_frequency()
    seeds, rest = order[:k], order[k:]
    counts = np.zeros((k, d.num_values), dtype=np.int64)
    for j, code in enumerate(seeds):
        counts[j, code] = d.count_of(code)
    sizes = counts.sum(axis=1)
    for code in rest:
        for _ in range(d.count_of(code)):
            after = counts.copy()
            after[:, code] += 1
            scores = after.max(axis=1) / (sizes + 1)
            # lexsort: last key is primary
            j = int(np.lexsort((np.arange(k), -sizes, -scores))[0])
            counts[j, code] += 1
            sizes[j] += 1
    return float((counts.max(axis=1) / sizes).min())
