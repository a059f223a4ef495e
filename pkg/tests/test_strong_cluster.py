from math import comb

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from betaclust.dataset import synthesize
from betaclust.errors import InfeasibleError
from betaclust.interpretability import score_clustering
from betaclust.kcenter import greedy_kcenter
from betaclust.metric import DistanceMetric
from betaclust.oracle import brute_force_interpretable_opt, brute_force_kcenter_opt
from betaclust.strong_cluster import composition_count, enumerate_compositions, strong_interpretability

from conftest import LINE, line_data, point_metric, random_data


def test_compositions_examples():
    four = enumerate_compositions(4, 5)
    assert sorted(four) == sorted([(2, 1, 1, 1), (1, 2, 1, 1), (1, 1, 2, 1), (1, 1, 1, 2)])
    assert enumerate_compositions(3, 3) == [(1, 1, 1)]
    assert sorted(enumerate_compositions(2, 3)) == [(1, 2), (2, 1)]
    with pytest.raises(InfeasibleError):
        enumerate_compositions(4, 3)


@given(st.integers(1, 6), st.integers(1, 12))
def test_composition_properties(nv, k):
    if nv > k:
        return
    comps = enumerate_compositions(nv, k)
    assert len(comps) == comb(k - 1, nv - 1) == composition_count(nv, k)
    assert len(set(comps)) == len(comps)
    assert comps == sorted(comps)
    assert all(len(c) == nv and sum(c) == k and min(c) >= 1 for c in comps)


def test_line_example(line4):
    c = strong_interpretability(line4, LINE, 2)
    assert sorted(map(sorted, c.members)) == [[0, 2], [1, 3]]
    assert c.objective == 10.0
    assert score_clustering(line4, c).clustering_score == 1.0
    assert brute_force_interpretable_opt(line4, LINE, 2, 1.0).opt_objective == 10.0


def test_single_value_matches_greedy():
    d = synthesize(60, 2, 1, seed=5)
    m = DistanceMetric()
    assert strong_interpretability(d, m, 4) == greedy_kcenter(d, m, None, 4, deterministic=True)


def test_one_node_per_value():
    d = line_data([0, 4, 9], ["A", "B", "C"])
    c = strong_interpretability(d, LINE, 3)
    assert c.objective == 0.0 and c.sizes == [1, 1, 1]


def test_errors_and_skipped_shares():
    d = line_data([0, 1, 2, 3], ["A", "B", "B", "B"])
    with pytest.raises(InfeasibleError):
        strong_interpretability(d, LINE, 1)
    # k = 4 forces the share (1, 3): A has a single node
    c = strong_interpretability(d, LINE, 4)
    assert c.objective == 0.0
    with pytest.raises(InfeasibleError):
        strong_interpretability(line_data([0, 1], ["A", "B"]), LINE, 3)


def test_recenter_and_restarts_never_hurt():
    d = synthesize(200, 2, 4, seed=2)
    m = DistanceMetric()
    base = strong_interpretability(d, m, 7)
    for kw in ({"recenter": True}, {"restarts": 4}, {"recenter": True, "restarts": 4}):
        c = strong_interpretability(d, m, 7, **kw)
        assert c.objective <= base.objective
        assert score_clustering(d, c).clustering_score == 1.0


@settings(max_examples=60)
@given(st.integers(2, 10), st.integers(2, 3), st.integers(2, 3), st.integers(0, 10**6))
def test_two_approximation_and_purity(n, nv, k, seed):
    if nv > k or k > n:
        return
    d = random_data(np.random.default_rng(seed), n, nv)
    m = point_metric()
    c = strong_interpretability(d, m, k)
    c.check(range(n))
    assert score_clustering(d, c).clustering_score == 1.0
    opt = brute_force_interpretable_opt(d, m, k, 1.0).opt_objective
    assert c.objective <= 2 * opt + 1e-12
    assert c.objective >= brute_force_kcenter_opt(d, m, k).opt_objective - 1e-12
