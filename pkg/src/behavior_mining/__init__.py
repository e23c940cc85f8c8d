"""Behavior mining for learner modeling logs.

Activity sequences are parsed from event logs, stratified by length,
clustered by edit distance into behavior types, and related to learner
engagement groups and to the quality of the models learners build.
"""

__version__ = "0.1.0"

from .errors import BehaviorMiningError, InputError, NumericalFailure
from .ingest import ActivitySequence, RawEvent, build_sequences, model_inventory, parse_event_log
from .learners import elbow, kmeans_pp, learner_features, pca, project, standardize
from .quality import complexity, parse_model, variety
from .segmentation import filter_outliers, find_cutpoints, kde, segment
from .seqcluster import BehaviorType, agglomerate, cluster_sequences, cut, distance_matrix, levenshtein
from .stats import chi_square_independence, one_way_anova, t_test

__all__ = [
    "ActivitySequence", "BehaviorMiningError", "BehaviorType", "InputError", "NumericalFailure",
    "RawEvent", "agglomerate", "build_sequences", "chi_square_independence", "cluster_sequences",
    "complexity", "cut", "distance_matrix", "elbow", "filter_outliers", "find_cutpoints", "kde",
    "kmeans_pp", "learner_features", "levenshtein", "model_inventory", "one_way_anova",
    "parse_event_log", "parse_model", "pca", "project", "segment", "standardize", "t_test", "variety",
]
