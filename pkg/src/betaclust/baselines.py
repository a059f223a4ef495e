"""Reference clusterings to compare the interpretable algorithms against.

``partition_by_value`` groups nodes by FoI value (P_F).  ``kcenter_on_foi``
runs greedy k-center in the FoI-only metric and is then scored in the main
metric (KC_F).
"""

from __future__ import annotations

import numpy as np

from .dataset import Dataset
from .kcenter import Clustering, find_center, greedy_kcenter, make_clustering
from .metric import EUCLIDEAN_FOI, DistanceMetric


def _shares(sizes: list[int], k: int) -> list[int]:
    # one cluster per group, then extras go to the group with the largest mean cluster size
    shares = [1] * len(sizes)
    for _ in range(k - len(sizes)):
        open_ = [i for i, n in enumerate(sizes) if shares[i] < n]
        if not open_:
            break
        j = max(open_, key=lambda i: (sizes[i] / shares[i], -i))
        shares[j] += 1
    return shares


def partition_by_value(d: Dataset, m: DistanceMetric, k: int) -> Clustering:
    """One cluster per FoI value when k = |F|.

    For k > |F| the largest value groups are split with deterministic greedy
    k-center inside the group, so every cluster stays pure.  For k < |F| the
    k - 1 most frequent values keep their own cluster and all other values
    share the last one.  Centers are exact 1-centers in ``m``.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    groups = [np.flatnonzero(d.foi_codes == c) for c in range(d.num_values)]
    parts = []
    if k >= d.num_values:
        for ids, s in zip(groups, _shares([len(g) for g in groups], k)):
            sub = greedy_kcenter(d, m, ids, s, deterministic=True)
            parts += [(find_center(d, m, cl.members), cl.members) for cl in sub.clusters]
    else:
        order = d.codes_by_frequency()
        for code in order[: k - 1]:
            parts.append(groups[code])
        parts.append(np.concatenate([groups[c] for c in order[k - 1 :]]))
        parts = [(find_center(d, m, ids.tolist()), ids.tolist()) for ids in parts]
    return make_clustering(d, m, parts, k)


def kcenter_on_foi(d: Dataset, m: DistanceMetric, k: int, seed: int | None = 0, deterministic: bool = False) -> Clustering:
    """Greedy k-center using only the features of interest, re-centered and
    scored in ``m``."""
    foi_only = greedy_kcenter(d, DistanceMetric(EUCLIDEAN_FOI), None, k, seed=seed, deterministic=deterministic)
    parts = [(find_center(d, m, cl.members), cl.members) for cl in foi_only.clusters]
    return make_clustering(d, m, parts, k)
