"""Cluster explanations: an OR over the frequent FoI values of each cluster.

Items are FoI assignments only.  With a single feature of interest an item
is just its value label; with several, an item reads ``feature=value`` and
a term is the conjunction of the items it contains.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations

from .dataset import Dataset
from .kcenter import Clustering

NO_PATTERN = "no dominant pattern"
DEFAULT_MIN_SUPPORT = 0.2


@dataclass(frozen=True)
class Term:
    values: tuple
    support: float


@dataclass(frozen=True)
class Explanation:
    cluster: int
    terms: tuple
    min_support: float = DEFAULT_MIN_SUPPORT

    def render(self) -> str:
        if not self.terms:
            return f"cluster {self.cluster}: {NO_PATTERN}"
        parts = [f"{' AND '.join(t.values)} ({_pct(t.support)}%)" for t in self.terms]
        return f"cluster {self.cluster}: " + " OR ".join(parts)

    def to_dict(self) -> dict:
        return {
            "cluster": self.cluster,
            "terms": [{"values": list(t.values), "support": t.support} for t in self.terms],
        }


def _pct(x: float) -> str:
    return f"{100 * x:.1f}".rstrip("0").rstrip(".")


def _min_count(min_support, size: int) -> int:
    return math.ceil(Fraction(min_support).limit_denominator(10**9) * size)


def _item_label(d: Dataset, feature: int, code: int) -> str:
    label = d.item_labels[feature][code]
    if len(d.schema.foi_index) == 1:
        return label
    return f"{d.schema.foi_names[feature]}={label}"


def _transactions(d: Dataset, cluster) -> list[tuple]:
    return [tuple(enumerate(d.item_codes[v].tolist())) for v in sorted(cluster)]


def _check_support(min_support):
    if not 0 < min_support <= 1:
        raise ValueError(f"min_support must lie in (0, 1], got {min_support}")


def _count_frequent(d: Dataset, cluster, min_support) -> tuple[list, int]:
    """Frequent itemsets as ``((feature, code), ...)`` tuples with counts.

    Each node contributes one item per feature of interest, so counting all
    non-empty subsets of each transaction enumerates the itemsets exactly.
    """
    _check_support(min_support)
    tx = _transactions(d, cluster)
    if not tx:
        raise ValueError("cannot explain an empty cluster")
    need = _min_count(min_support, len(tx))
    counts: Counter = Counter()
    for t in tx:
        for r in range(1, len(t) + 1):
            counts.update(combinations(t, r))
    frequent = [(items, c) for items, c in counts.items() if c >= need]
    frequent.sort(key=lambda ic: (-ic[1], ic[0]))
    return frequent, len(tx)


def _labels(d: Dataset, items) -> tuple:
    return tuple(_item_label(d, f, code) for f, code in items)


def frequent_itemsets(d: Dataset, cluster, min_support: float = DEFAULT_MIN_SUPPORT) -> list[tuple[tuple, float]]:
    """Every itemset of FoI assignments with support at least ``min_support``
    in ``cluster``; the node count threshold is ``ceil(min_support * |C|)``.

    Returned as ``(item labels, support)`` by descending support, then value
    order.
    """
    frequent, size = _count_frequent(d, cluster, min_support)
    return [(_labels(d, items), c / size) for items, c in frequent]


def _maximal(itemsets: list) -> list:
    sets = [frozenset(items) for items, _ in itemsets]
    return [ic for ic, s in zip(itemsets, sets) if not any(s < other for other in sets)]


def explain_cluster(d: Dataset, index: int, cluster, min_support: float = DEFAULT_MIN_SUPPORT) -> Explanation:
    frequent, size = _count_frequent(d, cluster, min_support)
    terms = tuple(Term(_labels(d, items), c / size) for items, c in _maximal(frequent))
    return Explanation(index, terms, min_support)


def cluster_explanation(d: Dataset, c: Clustering, min_support: float = DEFAULT_MIN_SUPPORT) -> list[Explanation]:
    """One explanation per cluster, built from its maximal frequent itemsets."""
    return [explain_cluster(d, j, cl.members, min_support) for j, cl in enumerate(c.clusters)]


def total_terms(explanations) -> int:
    return sum(len(e.terms) for e in explanations)
