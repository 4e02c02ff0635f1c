"""Non-exhaustive, overlapping co-clustering (NEO-CC).

Rows and columns of a real matrix are clustered at the same time; clusters
may overlap and some rows or columns may be left out as outliers.

    >>> import numpy as np
    >>> from neocc import DataMatrix, NeoParams, neo_cc
    >>> X = DataMatrix(np.kron(np.eye(2), np.ones((3, 2))))
    >>> res = neo_cc(X, NeoParams(k=2, l=2))
    >>> round(res.objective, 12)
    0.0
"""
from ._accel import backend
from .core import (
    AssignmentMatrix,
    DataMatrix,
    DuplicateAssignment,
    NeoParams,
    NormalizedColumn,
    ValidationError,
    build_assignment,
    normalized_column,
    phase_budgets,
    validate,
)
from .eval import (
    EmptyClustering,
    GroundTruth,
    PlantedConfig,
    f1_score,
    generate_planted,
    oracle_params,
    spy_permutation,
)
from .objective import (
    cocluster_means,
    objective,
    objective_m,
    objective_m_elementwise,
    objective_rcm,
    objective_rcm_elementwise,
    residue_rcm,
)
from .solver import (
    CoClusterResult,
    DistanceTable,
    InternalError,
    col_distances_m,
    col_distances_rcm,
    estimate_params,
    greedy_assign,
    lemma1_check,
    neo_cc,
    neo_kmeans_oneway,
    row_distances_m,
    row_distances_rcm,
    seed_clusters,
)

__version__ = "0.1.0"

__all__ = [
    "AssignmentMatrix", "DataMatrix", "DuplicateAssignment", "NeoParams", "NormalizedColumn",
    "ValidationError", "build_assignment", "normalized_column", "phase_budgets", "validate",
    "EmptyClustering", "GroundTruth", "PlantedConfig", "f1_score", "generate_planted",
    "oracle_params", "spy_permutation",
    "cocluster_means", "objective", "objective_m", "objective_m_elementwise", "objective_rcm",
    "objective_rcm_elementwise", "residue_rcm",
    "CoClusterResult", "DistanceTable", "InternalError", "col_distances_m", "col_distances_rcm",
    "estimate_params", "greedy_assign", "lemma1_check", "neo_cc", "neo_kmeans_oneway",
    "row_distances_m", "row_distances_rcm", "seed_clusters",
    "backend",
]
