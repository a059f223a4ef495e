import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from betaclust.dataset import CATEGORICAL, NUMERIC, Dataset, FeatureSchema
from betaclust.metric import DistanceMetric

settings.register_profile("ci", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("ci")

# "PASS criterion N: ..." lines collected by test_acceptance.py
ACCEPTANCE: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)


def line_data(xs, labels=None):
    """Points on a line with raw coordinates and a categorical FoI."""
    if labels is None:
        labels = ["A"] * len(xs)
    schema = FeatureSchema.build([("x", NUMERIC), ("foi", CATEGORICAL)], "foi")
    return Dataset(schema, [(float(x), f) for x, f in zip(xs, labels)], normalize=False)


# distance on x only: the FoI column gets weight 0
LINE = DistanceMetric(weights=[1.0, 0.0])


def random_data(rng, n, num_values, dims=2):
    """Random points in the unit square; FoI labels drawn so every one of
    ``num_values`` values appears at least once."""
    labels = list(range(num_values)) + rng.integers(0, num_values, size=n - num_values).tolist()
    labels = rng.permutation(labels)
    pts = rng.random((n, dims))
    feats = [(f"x{j}", NUMERIC) for j in range(dims)] + [("foi", CATEGORICAL)]
    schema = FeatureSchema.build(feats, "foi")
    rows = [tuple(pts[i].tolist()) + (f"v{labels[i]}",) for i in range(n)]
    return Dataset(schema, rows, normalize=False)


def point_metric(dims=2):
    return DistanceMetric(weights=[1.0] * dims + [0.0])


@pytest.fixture
def line4():
    return line_data([0, 1, 10, 11], ["A", "B", "A", "B"])
