import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from betaclust.dataset import CATEGORICAL, NUMERIC, Dataset, FeatureSchema, synthesize
from betaclust.metric import EUCLIDEAN_FOI, PRECOMPUTED, DistanceMetric, distance, load_matrix_csv, validate_metric

from conftest import line_data


def test_distance_examples():
    d = line_data([0.0, 1.0, 0.0])
    m = DistanceMetric(weights=[1.0, 0.0])
    assert distance(m, d, 0, 1) == 1.0
    assert distance(m, d, 0, 2) == 0.0
    with pytest.raises(IndexError):
        distance(m, d, 0, 3)


def test_categorical_one_hot():
    feats = [(f"c{i}", CATEGORICAL) for i in range(4)]
    schema = FeatureSchema.build(feats, "c0")
    d = Dataset(schema, [("a", "a", "a", "a"), ("a", "b", "a", "b")])
    # hand computation: each disagreement flips two one-hot cells by 1/sqrt(2)
    assert distance(DistanceMetric(), d, 0, 1) == pytest.approx(math.sqrt(2))


def test_weights_scale_squared_contribution():
    schema = FeatureSchema.build([("x", NUMERIC), ("y", NUMERIC), ("foi", CATEGORICAL)], "foi")
    d = Dataset(schema, [(0, 0, "A"), (3, 4, "A")], normalize=False)
    assert distance(DistanceMetric(weights=[1, 1, 1]), d, 0, 1) == pytest.approx(5.0)
    assert distance(DistanceMetric(weights=[4, 0, 1]), d, 0, 1) == pytest.approx(6.0)
    with pytest.raises(ValueError):
        DistanceMetric(weights=[-1, 0, 0])


def test_validate_builtin_kinds_clean():
    d = synthesize(80, 3, 4, seed=2)
    for m in (DistanceMetric(), DistanceMetric(EUCLIDEAN_FOI)):
        rep = validate_metric(m, d)
        assert rep.ok and rep.exhaustive
    foi = validate_metric(DistanceMetric(EUCLIDEAN_FOI), d)
    assert foi.warnings  # pseudometric: distinct nodes at distance 0


def test_zero_weight_is_pseudometric():
    # same point, different FoI label: distance 0 is allowed once the label is ignored
    d = line_data([0.0, 0.0], ["A", "B"])
    m = DistanceMetric(weights=[1.0, 0.0])
    assert m.is_pseudometric and not DistanceMetric().is_pseudometric
    rep = validate_metric(m, d)
    assert rep.ok and [w.axiom for w in rep.warnings] == ["identity_of_indiscernibles"]
    rep = validate_metric(DistanceMetric(), line_data([0.0, 0.0], ["A", "A"]))
    assert rep.ok and not rep.warnings


def test_triangle_violation_witness():
    M = np.array([[0, 1, 10], [1, 0, 1], [10, 1, 0]], dtype=float)
    d = line_data([0, 1, 2])
    rep = validate_metric(DistanceMetric(PRECOMPUTED, matrix=M), d)
    assert not rep.ok
    tri = [v for v in rep.violations if v.axiom == "triangle"]
    assert tri and tri[0].witness == (0, 1, 2)
    assert tri[0].amount == pytest.approx(8.0)


def test_symmetry_violation():
    M = np.array([[0, 1, 2], [1, 0, 1], [3, 1, 0]], dtype=float)
    rep = validate_metric(DistanceMetric(PRECOMPUTED, matrix=M), line_data([0, 1, 2]))
    assert any(v.axiom == "symmetry" for v in rep.violations)


def test_sampled_mode():
    d = synthesize(250, 2, 4, seed=0)
    rep = validate_metric(DistanceMetric(), d, samples=2000)
    assert not rep.exhaustive and rep.checked_triples == 2000 and rep.ok


def test_matrix_csv(tmp_path):
    p = tmp_path / "m.csv"
    p.write_text("0,1\n1,0\n")
    assert load_matrix_csv(p).tolist() == [[0, 1], [1, 0]]


def test_large_dataset_skips_cache():
    d = synthesize(50, 2, 2, seed=0)
    m = DistanceMetric(cache_limit=10)
    assert m.matrix(d) is None
    full = DistanceMetric().matrix(d)
    assert np.allclose(m.block(d, range(50), range(50)), full)


@settings(max_examples=40)
@given(st.integers(2, 30), st.integers(1, 4), st.integers(0, 10_000))
def test_random_datasets_are_metric(n, dims, seed):
    rng = np.random.default_rng(seed)
    schema = FeatureSchema.build(
        [(f"x{j}", NUMERIC) for j in range(dims)] + [("c", CATEGORICAL)], "c"
    )
    rows = [tuple(rng.normal(size=dims).tolist()) + (str(rng.integers(3)),) for _ in range(n)]
    d = Dataset(schema, rows)
    assert validate_metric(DistanceMetric(), d).ok
