"""k-center clustering with a floor on cluster interpretability.

A cluster's interpretability is the share of its most common value of the
features of interest (FoI); a clustering scores its worst cluster.
"""

from .baselines import kcenter_on_foi, partition_by_value
from .beta_cluster import (
    BetaRunConfig,
    BetaRunResult,
    beta_interpretable_clustering,
    boost_interpretability,
    boost_majority,
    reduce_minority,
    refine_assignment,
    removal_count,
)
from .dataset import Dataset, Feature, FeatureSchema, load_csv, synthesize
from .errors import BetaClustError, DataError, InfeasibleError, SchemaError
from .explain import Explanation, cluster_explanation, frequent_itemsets
from .interpretability import beta_max_estimate, score_clustering, score_If, score_IF
from .kcenter import Cluster, Clustering, best_of_k, find_center, greedy_kcenter
from .metric import DistanceMetric, validate_metric
from .strong_cluster import enumerate_compositions, strong_interpretability

__version__ = "0.1.0"

__all__ = [
    "BetaClustError",
    "BetaRunConfig",
    "BetaRunResult",
    "Cluster",
    "Clustering",
    "DataError",
    "Dataset",
    "DistanceMetric",
    "Explanation",
    "Feature",
    "FeatureSchema",
    "InfeasibleError",
    "SchemaError",
    "best_of_k",
    "beta_interpretable_clustering",
    "beta_max_estimate",
    "boost_interpretability",
    "boost_majority",
    "cluster_explanation",
    "enumerate_compositions",
    "find_center",
    "frequent_itemsets",
    "greedy_kcenter",
    "kcenter_on_foi",
    "load_csv",
    "partition_by_value",
    "reduce_minority",
    "refine_assignment",
    "removal_count",
    "score_If",
    "score_IF",
    "score_clustering",
    "strong_interpretability",
    "synthesize",
    "validate_metric",
]
