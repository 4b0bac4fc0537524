"""Multi-view subspace clustering with an adaptive consensus neighbour graph.

Two variants share one pipeline: ``mscam`` learns a per-view metric
projection alongside the subspace representation, ``mscan`` measures
distances on the representations directly.  Clusters are read off the
connected components of a learned row-stochastic similarity graph.
"""

__version__ = "0.1.0"

from .admm import (AdmmConfig, AdmmIterate, AdmmState, ViewSolution,
                   init_state, solve_view, update_multipliers, update_p,
                   update_paux, update_w, update_z)
from .data import (MultiViewDataset, SyntheticSpec, corrupt,
                   generate_synthetic, load_dataset, save_dataset)
from .errors import MvscError, NumericError, ValidationError
from .graph import (LaplacianBundle, SimilarityGraph, build_laplacian,
                    connected_components, write_edge_list, write_matrix_csv,
                    zero_eigenvalue_multiplicity)
from .metrics import ContingencyTable, accuracy, contingency_table, nmi
from .neighbors import (DistanceTable, GammaEstimate, data_distance_table,
                        estimate_gamma, pairwise_distances, row_update,
                        update_similarity)
from .report import RunReport, dataset_fingerprint
from .solver import (ClusteringResult, SolverConfig, adapt_lambda,
                     extract_labels, fit, mscan_update_z, objective)

__all__ = [
    "__version__",
    "AdmmConfig", "AdmmIterate", "AdmmState", "ViewSolution",
    "init_state", "solve_view", "update_multipliers", "update_p",
    "update_paux", "update_w", "update_z",
    "MultiViewDataset", "SyntheticSpec", "corrupt", "generate_synthetic",
    "load_dataset", "save_dataset",
    "MvscError", "NumericError", "ValidationError",
    "LaplacianBundle", "SimilarityGraph", "build_laplacian",
    "connected_components", "write_edge_list", "write_matrix_csv",
    "zero_eigenvalue_multiplicity",
    "ContingencyTable", "accuracy", "contingency_table", "nmi",
    "DistanceTable", "GammaEstimate", "data_distance_table",
    "estimate_gamma", "pairwise_distances", "row_update",
    "update_similarity",
    "RunReport", "dataset_fingerprint",
    "ClusteringResult", "SolverConfig", "adapt_lambda", "extract_labels",
    "fit", "mscan_update_z", "objective",
]
