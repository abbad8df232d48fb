"""Similarity-sensitive diversity and entropy of order q, and their exact maximum."""
from maxdiv.core import (
    INF,
    Distribution,
    SimilarityMatrix,
    SubsetMask,
    extend_by_zero,
    from_distance_matrix,
    from_reflexive_graph,
    from_taxonomy,
    graph_from_edges,
    restrict,
    restrict_distribution,
    support,
    validate_similarity,
)
from maxdiv.maximizer import (
    MaximizationReport,
    MaximizeOptions,
    check_q_maximizing,
    connected_components,
    maximize,
)
from maxdiv.means import diversity, diversity_profile, entropy, is_invariant, power_mean
from maxdiv.weighting import (
    is_positive_definite,
    is_scattered,
    is_ultrametric,
    magnitude,
    nonneg_weighting_exists,
    solve_weighting,
    weight_distribution,
)

__version__ = "0.1.0"
