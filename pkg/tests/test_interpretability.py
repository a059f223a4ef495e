import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from betaclust.dataset import CATEGORICAL, Dataset, FeatureSchema
from betaclust.interpretability import (
    beta_max_estimate,
    cluster_score,
    score_clustering,
    score_If,
    score_IF,
)
from betaclust.kcenter import make_clustering
from betaclust.metric import DistanceMetric
from betaclust.oracle import brute_force_beta_max

from conftest import LINE, line_data


def labelled(labels):
    schema = FeatureSchema.build([("foi", CATEGORICAL)], "foi")
    return Dataset(schema, [(x,) for x in labels])


def test_score_If_examples():
    d = labelled(["A", "A", "A", "B", "C"])
    assert score_If(d, [0, 1, 2, 3], "A") == 0.75
    assert score_If(d, [0, 1, 2, 3], "C") == 0.0
    assert score_If(d, [0, 1], "A") == 1.0
    with pytest.raises(ValueError):
        score_If(d, [], "A")


def test_score_IF_examples():
    d = labelled(["A", "A", "A", "B"])
    assert score_IF(d, [0, 1, 2, 3]) == (0.75, "A")
    assert score_IF(d, [3]) == (1.0, "B")
    # B is globally more frequent, so it wins the 2-2 tie
    t = labelled(["A", "A", "B", "B", "B"])
    assert score_IF(t, [0, 1, 2, 3]) == (0.5, "B")
    # equal global counts: value order decides
    u = labelled(["B", "B", "A", "A"])
    assert score_IF(u, [0, 1, 2, 3]) == (0.5, "A")
    with pytest.raises(ValueError):
        score_IF(d, [])


def test_score_clustering_examples():
    d = line_data([0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14],
                  ["A"] * 9 + ["B"] + ["A"] * 3 + ["B"] * 2)
    pure = make_clustering(d, LINE, [(0, range(9)), (9, [9])], 2)
    assert score_clustering(d, pure).clustering_score == 1.0
    c = make_clustering(d, LINE, [(0, range(10)), (10, range(10, 15))], 2)
    rep = score_clustering(d, c)
    assert [p.score for p in rep.per_cluster] == [0.9, 0.6]
    assert rep.clustering_score == 0.6
    assert rep.majorities() == ["A", "A"]
    assert rep.per_cluster[1].majority_count == 3 and rep.per_cluster[1].size == 5


def test_beta_max_estimate_examples():
    four = labelled(list("AABBCCDD"))
    assert beta_max_estimate(four, 5) == 1.0
    d = labelled(["f1"] * 5 + ["f2"] * 3 + ["f3"] * 2)
    assert beta_max_estimate(d, 2) == 0.75
    assert brute_force_beta_max(d, 2) >= 0.75
    assert beta_max_estimate(labelled(["A"] * 6), 3) == 1.0
    with pytest.raises(ValueError):
        beta_max_estimate(d, 0)


@settings(max_examples=80)
@given(st.lists(st.integers(0, 4), min_size=1, max_size=10), st.integers(1, 4))
def test_estimate_below_oracle(codes, k):
    d = labelled([f"v{c}" for c in codes])
    est = beta_max_estimate(d, k)
    exact = brute_force_beta_max(d, k)
    assert est <= exact + 1e-12
    if d.num_values <= k:
        assert est == exact == 1.0


@given(st.lists(st.sampled_from("ABC"), min_size=2, max_size=30))
def test_removing_minority_never_lowers_score(labels):
    d = labelled(labels)
    ids = list(range(d.n))
    score, code, _ = cluster_score(d, ids)
    minority = [v for v in ids if d.foi_codes[v] != code]
    for v in minority:
        rest = [u for u in ids if u != v]
        assert cluster_score(d, rest)[0] >= score


@given(st.lists(st.sampled_from("ABCD"), min_size=2, max_size=30), st.integers(0, 1000))
def test_clustering_score_is_min(labels, seed):
    d = labelled(labels)
    rng = np.random.default_rng(seed)
    k = int(rng.integers(1, d.n + 1))
    lab = rng.integers(0, k, size=d.n)
    parts = [(int(np.flatnonzero(lab == j)[0]), np.flatnonzero(lab == j)) for j in range(k) if (lab == j).any()]
    c = make_clustering(d, DistanceMetric(), parts, k)
    rep = score_clustering(d, c)
    assert rep.clustering_score == min(p.score for p in rep.per_cluster)
    for p in rep.per_cluster:
        assert p.majority_count >= 1
        assert p.score == p.majority_count / p.size
