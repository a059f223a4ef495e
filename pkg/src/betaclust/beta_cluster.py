"""Post-processing a k-center clustering until every cluster is at least
``beta`` homogeneous in its FoI value.

The loop repeatedly takes the least interpretable cluster and either pulls
in more nodes of its majority value from the nearest cluster holding some
(:func:`boost_majority`) or, when it already holds all of them, ejects its
farthest minority nodes (:func:`reduce_minority`).  When progress stalls,
:func:`boost_interpretability` promotes a frequent value that is not yet the
majority anywhere.
"""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .dataset import Dataset
from .interpretability import beta_max_estimate, cluster_score, majority_code, value_counts
from .kcenter import Clustering, find_center, greedy_kcenter, make_clustering
from .metric import DistanceMetric

log = logging.getLogger(__name__)

__all__ = [
    "BetaRunConfig",
    "BetaRunResult",
    "beta_interpretable_clustering",
    "boost_interpretability",
    "boost_majority",
    "find_center",
    "identify_farthest",
    "reduce_minority",
    "refine_assignment",
    "removal_count",
    "split_targets",
]


def as_fraction(x) -> Fraction:
    """Exact rational for a user-supplied ratio such as 0.8 (-> 4/5)."""
    return Fraction(x).limit_denominator(10**9)


@dataclass(frozen=True)
class BetaRunConfig:
    beta: float
    max_iterations: int | None = None  # default 50 * k
    stall_threshold: int | None = None  # default 2 * k
    seed: int | None = 0
    refine: bool = True

    def __post_init__(self):
        if not 0.0 <= self.beta <= 1.0:
            raise ValueError(f"beta must lie in [0, 1], got {self.beta}")
        if self.max_iterations is not None and self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if self.stall_threshold is not None and self.stall_threshold < 1:
            raise ValueError("stall_threshold must be >= 1")

    def resolved(self, k: int) -> tuple[int, int]:
        return (self.max_iterations or 50 * k, self.stall_threshold or 2 * k)


@dataclass
class BetaRunResult:
    clustering: Clustering
    achieved_beta: float
    converged: bool
    iterations: int
    beta: float
    trace: list = field(default_factory=list)  # (interpretability, objective) per iteration


class _State:
    """Mutable working copy of a clustering: member sets plus centers."""

    def __init__(self, d: Dataset, m: DistanceMetric, c: Clustering):
        self.d, self.m = d, m
        self.k = c.k_requested
        self.members = [set(x.members) for x in c.clusters]
        self.centers = [x.center for x in c.clusters]

    def recenter(self, *js):
        for j in js:
            if self.members[j]:
                self.centers[j] = find_center(self.d, self.m, self.members[j])

    def key(self) -> frozenset:
        return frozenset(frozenset(s) for s in self.members)

    def score(self, j) -> tuple[float, int, int]:
        return cluster_score(self.d, sorted(self.members[j]))

    def counts(self, j) -> np.ndarray:
        return value_counts(self.d, sorted(self.members[j]))

    def of_code(self, j, code) -> list[int]:
        codes = self.d.foi_codes
        return sorted(v for v in self.members[j] if codes[v] == code)

    def linkage(self, a, b) -> float:
        """Single-linkage (closest pair) distance between two node sets."""
        return float(self.m.block(self.d, sorted(a), sorted(b)).min())

    def least_interpretable(self) -> int:
        """Cluster with minimum score; ties to the larger cluster, then lower index."""
        best, key = 0, None
        for j in range(len(self.members)):
            s = self.score(j)[0]
            cand = (s, -len(self.members[j]), j)
            if key is None or cand < key:
                best, key = j, cand
        return best

    def repair(self):
        """Re-seed every emptied cluster with the node farthest from all
        remaining centers."""
        for j, mem in enumerate(self.members):
            if mem:
                continue
            live = [self.centers[i] for i, s in enumerate(self.members) if s]
            pool = sorted(v for s in self.members if len(s) > 1 for v in s)
            if not pool:
                raise RuntimeError("cannot re-seed an empty cluster: every cluster is a singleton")
            gap = self.m.block(self.d, live, pool).min(axis=0)
            v = pool[int(np.argmax(gap))]
            owner = next(i for i, s in enumerate(self.members) if v in s)
            self.members[owner].discard(v)
            self.members[j] = {v}
            self.centers[j] = v
            self.recenter(owner)

    def to_clustering(self) -> Clustering:
        parts = list(zip(self.centers, self.members))
        return make_clustering(self.d, self.m, parts, self.k)


def removal_count(size: int, majority: int, beta) -> int:
    """Number of minority nodes to eject so that ``majority / (size - gamma)``
    reaches ``beta``: ``ceil(size - majority / beta)``, computed exactly."""
    b = as_fraction(beta)
    if b <= 0:
        return 0
    return math.ceil(Fraction(size) - Fraction(majority) / b)


def split_targets(n_rest: int, size1: int, size2: int) -> tuple[int, int]:
    """Split ``n_rest`` nodes in proportion ``size1 : size2`` using
    largest-remainder rounding; an even remainder goes to the first part."""
    theta = size1 + size2
    q1 = Fraction(size1 * n_rest, theta)
    q2 = Fraction(size2 * n_rest, theta)
    f1, f2 = math.floor(q1), math.floor(q2)
    left = n_rest - f1 - f2
    if left:
        if q1 - f1 >= q2 - f2:
            f1 += 1
            left -= 1
        f2 += left
    return f1, f2


def identify_farthest(d: Dataset, m: DistanceMetric, C, gamma: int, u: int, S) -> list[int]:
    """The ``min(gamma, |C \\ S|)`` nodes of ``C \\ S`` farthest from ``u``,
    farthest first, ties to the lower id."""
    if gamma <= 0:
        return []
    rest = sorted(set(C) - set(S))
    if not rest:
        return []
    dist = m.to_many(d, u, rest)
    order = np.lexsort((np.asarray(rest), -dist))
    return [rest[i] for i in order[:gamma]]


def _second_code(d: Dataset, counts: np.ndarray, first: int) -> int | None:
    others = counts.copy()
    others[first] = 0
    if others.max() == 0:
        return None
    return majority_code(d, others)


def _merge_split(st: _State, a: int, b: int, first: int | None = None):
    """Merge clusters a and b, then split the union around its two most
    frequent values (or around ``first`` and the next most frequent one).
    The ``first`` value's nodes end up in cluster a."""
    d, m = st.d, st.m
    merged = sorted(st.members[a] | st.members[b])
    counts = value_counts(d, merged)
    top1 = majority_code(d, counts) if first is None else first
    top2 = _second_code(d, counts, top1)
    if top2 is None or counts[top1] == 0:
        _bisect(st, a, b, merged)
        return
    codes = d.foi_codes
    c1 = [v for v in merged if codes[v] == top1]
    c2 = [v for v in merged if codes[v] == top2]
    rest = [v for v in merged if codes[v] != top1 and codes[v] != top2]
    n1, _ = split_targets(len(rest), len(c1), len(c2))
    r1, r2 = [], []
    if rest:
        u1, u2 = find_center(d, m, c1), find_center(d, m, c2)
        lean = m.to_many(d, u1, rest) - m.to_many(d, u2, rest)
        order = np.lexsort((np.asarray(rest), lean))
        r1 = [rest[i] for i in order[:n1]]
        r2 = [rest[i] for i in order[n1:]]
    st.members[a] = set(c1) | set(r1)
    st.members[b] = set(c2) | set(r2)
    st.recenter(a, b)


def _bisect(st: _State, a: int, b: int, merged: list[int]):
    """Split a single-valued union by its farthest pair."""
    D = st.m.block(st.d, merged, merged)
    p, q = np.unravel_index(int(np.argmax(D)), D.shape)
    if D[p, q] == 0:
        side = np.zeros(len(merged), dtype=bool)
        side[-1] = True
    else:
        side = D[q] < D[p]
    st.members[a] = {v for v, s in zip(merged, side) if not s}
    st.members[b] = {v for v, s in zip(merged, side) if s}
    st.recenter(a, b)


def _boost_majority(st: _State, t: int, code: int, force: bool = False) -> int:
    """Merge cluster t with the cluster whose ``code`` nodes lie closest to
    t's ``code`` nodes, then re-split.  Returns the partner index."""
    source = st.of_code(t, code) or sorted(st.members[t])
    best, best_dist = None, np.inf
    for j in range(len(st.members)):
        if j == t:
            continue
        theirs = st.of_code(j, code)
        if not theirs:
            continue
        dist = st.linkage(source, theirs)
        if dist < best_dist:
            best, best_dist = j, dist
    if best is None:
        raise ValueError("boost_majority: no other cluster holds a node of the majority value")
    _merge_split(st, t, best, first=code if force else None)
    return best


def _reduce_minority(st: _State, t: int, code: int, beta) -> tuple[bool, bool]:
    """Eject t's farthest minority nodes.  Returns (any moved, all placed)."""
    d, m = st.d, st.m
    S = st.of_code(t, code)
    C = st.members[t]
    gamma = removal_count(len(C), len(S), beta)
    if gamma <= 0:
        return False, True
    u = find_center(d, m, S)
    X = identify_farthest(d, m, C, gamma, u, S)
    b = as_fraction(beta)
    others = [j for j in range(len(st.members)) if j != t]
    codes = d.foi_codes
    counts = {j: st.counts(j) for j in others}
    touched, placed_all = set(), True
    for v in X:
        if not others:
            placed_all = False
            break
        dist = m.to_many(d, v, [st.centers[j] for j in others])
        order = [others[i] for i in np.lexsort((np.asarray(others), dist))]
        target = None
        for j in order:
            cnt = counts[j]
            # I_F(C' + v) >= I_F(C') iff v's value is tied for C''s top count
            if cnt[codes[v]] == cnt.max():
                target = j
                break
        if target is None:
            for j in order:
                cnt = counts[j]
                size = int(cnt.sum())
                new_max = max(int(cnt.max()), int(cnt[codes[v]]) + 1)
                if Fraction(new_max, size + 1) >= b:
                    target = j
                    break
        if target is None:
            placed_all = False
            continue
        C.discard(v)
        st.members[target].add(v)
        counts[target][codes[v]] += 1
        touched.add(target)
    moved = bool(touched)
    if moved:
        st.recenter(t, *sorted(touched))
    return moved, placed_all


def _boost_interpretability(st: _State, k: int) -> bool:
    """Make a frequent value that is nobody's majority the majority of the
    least interpretable cluster.  Returns False when inapplicable."""
    d = st.d
    if len(st.members) < 2:
        return False
    top = d.codes_by_frequency()[:k]
    majors = {st.score(j)[1] for j in range(len(st.members))}
    missing = [f for f in top if f not in majors]
    if not missing:
        return False
    f = missing[0]
    t = st.least_interpretable()
    donors = [j for j in range(len(st.members)) if j != t and st.of_code(j, f)]
    donor = None
    if donors:
        target_nodes = sorted(st.members[t])
        donor = min(donors, key=lambda j: (st.linkage(st.of_code(j, f), target_nodes), j))
        moving = set(st.of_code(donor, f))
        st.members[donor] -= moving
        st.members[t] |= moving
        if st.members[donor]:
            st.recenter(donor)
        st.repair()
        st.recenter(t)
    holders = [j for j in range(len(st.members)) if j != t and st.of_code(j, f)]
    if holders:
        _boost_majority(st, t, f, force=True)
    else:
        partner = donor
        if partner is None:
            dist = st.m.to_many(d, st.centers[t], st.centers)
            dist[t] = np.inf
            partner = int(np.argmin(dist))
        _merge_split(st, t, partner, first=f)
    return True


def _meets(cnt: np.ndarray, beta: float) -> bool:
    size = cnt.sum()
    return size > 0 and cnt.max() / size >= beta


def _reassign_round(st: _State, beta: float):
    """Move nodes to a strictly nearer center whenever both clusters stay at
    or above ``beta``; farthest nodes first."""
    d, codes = st.d, st.d.foi_codes
    counts = [st.counts(j) for j in range(len(st.members))]
    label = {v: j for j, s in enumerate(st.members) for v in s}
    nodes = sorted(label)
    D = st.m.block(d, st.centers, nodes)
    own = D[[label[v] for v in nodes], np.arange(len(nodes))]
    for idx in np.argsort(-own, kind="stable"):
        v, j = nodes[idx], label[nodes[idx]]
        if v == st.centers[j] or len(st.members[j]) < 2:
            continue
        for i in np.argsort(D[:, idx], kind="stable"):
            i = int(i)
            if D[i, idx] >= D[j, idx]:
                break
            src, dst = counts[j].copy(), counts[i].copy()
            src[codes[v]] -= 1
            dst[codes[v]] += 1
            if _meets(src, beta) and _meets(dst, beta):
                counts[j], counts[i] = src, dst
                st.members[j].discard(v)
                st.members[i].add(v)
                label[v] = i
                break
    st.recenter(*range(len(st.members)))


def _move_worst(st: _State, beta: float, objective: float) -> float | None:
    """Move the node that sets the objective to a nearer cluster if that
    lowers the objective without breaking ``beta``.  Returns the new
    objective, or None if no such move exists."""
    d, m, codes = st.d, st.m, st.d.foi_codes
    worst = None
    for j, mem in enumerate(st.members):
        ids = sorted(mem)
        dist = m.to_many(d, st.centers[j], ids)
        i = int(np.argmax(dist))
        if worst is None or dist[i] > worst[0]:
            worst = (dist[i], ids[i], j)
    _, v, j = worst
    if len(st.members[j]) < 2:
        return None
    to_centers = m.to_many(d, v, st.centers)
    for i in np.argsort(to_centers, kind="stable"):
        i = int(i)
        if i == j or to_centers[i] >= objective:
            continue
        src, dst = st.counts(j), st.counts(i)
        src[codes[v]] -= 1
        dst[codes[v]] += 1
        if not (_meets(src, beta) and _meets(dst, beta)):
            continue
        saved = (set(st.members[j]), set(st.members[i]), st.centers[j], st.centers[i])
        st.members[j].discard(v)
        st.members[i].add(v)
        st.recenter(i, j)
        new = st.to_clustering().objective
        if new < objective:
            return new
        st.members[j], st.members[i], st.centers[j], st.centers[i] = saved
    return None


def _refine(st: _State, beta: float, max_rounds: int = 50):
    objective = st.to_clustering().objective
    for _ in range(max_rounds):
        improved = False
        saved = ([set(x) for x in st.members], list(st.centers))
        _reassign_round(st, beta)
        new = st.to_clustering().objective
        if new < objective:
            objective, improved = new, True
        else:
            st.members, st.centers = saved
        while (new := _move_worst(st, beta, objective)) is not None:
            objective, improved = new, True
        if not improved:
            break


def refine_assignment(d: Dataset, m: DistanceMetric, c: Clustering, beta: float) -> Clustering:
    """Lower the k-center objective of ``c`` by moving nodes to nearer
    centers, never letting any cluster's interpretability drop below ``beta``.

    Alternates a nearest-center reassignment round (kept only if it lowers
    the objective) with moves of the single node that sets the objective.
    Clusters whose score is already below ``beta`` block every move touching
    them, so the score of the clustering never decreases.
    """
    st = _State(d, m, c)
    _refine(st, beta)
    return st.to_clustering()


def boost_majority(d: Dataset, m: DistanceMetric, c: Clustering, target: int, majority) -> Clustering:
    """Raise the share of ``majority`` in cluster ``target`` by merging it
    with the nearest cluster holding ``majority`` nodes and re-splitting the
    union around its two most frequent values.

    The partner is the cluster minimizing the closest-pair distance between
    its ``majority`` nodes and those of the target.  The first value's nodes
    stay at index ``target``.  The remaining nodes are shared in proportion to
    the two seed groups, each going to the side whose 1-center it leans
    towards.  A union with a single value is bisected by its farthest pair.
    """
    st = _State(d, m, c)
    _boost_majority(st, target, d.value_code(majority))
    return st.to_clustering()


def reduce_minority(d: Dataset, m: DistanceMetric, c: Clustering, target: int, S, beta: float) -> Clustering:
    """Eject the ``ceil(|C| - |S|/beta)`` minority nodes of cluster ``target``
    farthest from the 1-center of its majority nodes ``S``.

    Each ejected node goes to the nearest other cluster (by center distance)
    whose score does not drop; failing that, to the nearest one that stays at
    or above ``beta``; failing that, it stays put.
    """
    S = set(S)
    if not S:
        raise ValueError("reduce_minority needs a non-empty majority set")
    codes = {int(d.foi_codes[v]) for v in S}
    if len(codes) != 1:
        raise ValueError("majority set S mixes FoI values")
    if not S <= set(c.clusters[target].members):
        raise ValueError("majority set S is not inside the target cluster")
    st = _State(d, m, c)
    _reduce_minority(st, target, codes.pop(), beta)
    return st.to_clustering()


def boost_interpretability(d: Dataset, m: DistanceMetric, c: Clustering, k: int | None = None) -> Clustering:
    """Escape a local maximum: pick the most frequent of the top-k values that
    is no cluster's majority, move its nodes from the closest cluster into the
    least interpretable one, then boost that value there.  Returns ``c``
    unchanged when every top-k value already is some cluster's majority."""
    st = _State(d, m, c)
    if not _boost_interpretability(st, k or c.k_requested):
        return c
    return st.to_clustering()


def _summary(st: _State) -> tuple[float, float]:
    score = min(st.score(j)[0] for j in range(len(st.members)))
    obj = st.to_clustering().objective
    return score, obj


def beta_interpretable_clustering(
    d: Dataset,
    m: DistanceMetric,
    k: int,
    cfg: BetaRunConfig | None = None,
    initial: Clustering | None = None,
    **kwargs,
) -> BetaRunResult:
    """Start from greedy k-center and post-process until the clustering's
    interpretability reaches ``cfg.beta``.

    With ``cfg.refine`` (the default) a clustering that needed post-processing
    is polished by :func:`refine_assignment`, which keeps it
    ``beta``-interpretable.  A greedy start that already meets ``beta`` is
    returned unchanged.

    Stops on success, after ``max_iterations``, when neither the main step
    nor the stall escape changes anything, or when a configuration recurs a
    third time (the run is deterministic, so it would cycle).  A run that does
    not converge returns the most interpretable clustering it visited.
    """
    if cfg is None:
        cfg = BetaRunConfig(**kwargs)
    elif kwargs:
        raise TypeError("pass either cfg or keyword arguments, not both")
    if not 1 <= k <= d.n:
        raise ValueError(f"k must lie in [1, {d.n}], got {k}")
    max_iter, stall_limit = cfg.resolved(k)
    beta = cfg.beta
    estimate = beta_max_estimate(d, k)
    if beta > estimate:
        warnings.warn(
            f"beta = {beta} exceeds the estimated attainable interpretability {estimate:.4g} for k = {k}",
            stacklevel=2,
        )

    start = initial if initial is not None else greedy_kcenter(d, m, None, k, seed=cfg.seed)
    st = _State(d, m, start)
    score, obj = _summary(st)
    trace = [(score, obj)]
    best = (score, -obj, start)
    seen: dict[frozenset, int] = {st.key(): 1}
    fired: set[frozenset] = set()
    stall = 0
    iterations = 0

    while score < beta and iterations < max_iter:
        iterations += 1
        before = st.key()
        t = st.least_interpretable()
        _, code, inside = st.score(t)
        if d.count_of(code) > inside:
            _boost_majority(st, t, code)
        else:
            _reduce_minority(st, t, code, beta)
        changed = st.key() != before

        new_score, obj = _summary(st)
        stall = 0 if new_score > best[0] else stall + 1
        if not changed or stall >= stall_limit:
            key = st.key()
            escaped = False
            if key not in fired:
                fired.add(key)
                escaped = _boost_interpretability(st, k) and st.key() != key
                stall = 0
                if escaped:
                    new_score, obj = _summary(st)
            if not changed and not escaped:
                score = new_score
                trace.append((score, obj))
                log.debug("beta-IC stuck after %d iterations at %.4f", iterations, score)
                break
        score = new_score
        trace.append((score, obj))
        if (score, -obj) > best[:2]:
            best = (score, -obj, st.to_clustering())
        key = st.key()
        seen[key] = seen.get(key, 0) + 1
        if seen[key] >= 3:
            log.debug("beta-IC cycling after %d iterations", iterations)
            break

    if score >= beta:
        # an initial clustering that already meets beta is returned as is
        if cfg.refine and iterations > 0:
            _refine(st, beta)
        final = st.to_clustering()
    else:
        final = best[2]
    achieved = float(min(cluster_score(d, sorted(c.members))[0] for c in final.clusters))
    return BetaRunResult(
        clustering=final,
        achieved_beta=achieved,
        converged=bool(achieved >= beta),
        iterations=iterations,
        beta=beta,
        trace=trace,
    )
