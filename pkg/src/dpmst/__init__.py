"""Weight-differentially-private minimum spanning trees and MST clustering."""

from ._backend import BACKEND
from ._version import __version__
from .bounds import (BoundInputs, compare_bounds, crossover_alpha, lambert_w0, laplace_bound,
                     laplace_sum_cdf, pamst_bound, pamst_trace_bound,
                     structure_preservation_prob, sufficient_alpha)
from .clustering import (ClusterPartition, WeightedTree, dbcvi, dbmstclu, dispersion,
                         perform_cut, separation, validity_index)
from .graph import (DisconnectedGraphError, DuplicateEdgeError, Graph, GraphError,
                    GraphFormatError, PointCloud, SelfLoopError, TreeTopology,
                    approximation_error, epsilon_graph, erdos_renyi, format_graph,
                    mst_kruskal, mst_prim, parse_graph, sketch_binary_dataset, tree_weight,
                    xor_incident_edges)
from .mechanisms import (BudgetLedger, PrivacyParams, compose, empirical_max_divergence,
                         exponential_choice, graph_laplace, sample_gaussian, sample_laplace)
from .pamst import PamstTrace, UtilityConfig, pamst, release_weighted_tree, step_utilities, w_star

__all__ = [
    "BACKEND", "__version__",
    "BoundInputs", "compare_bounds", "crossover_alpha", "lambert_w0", "laplace_bound",
    "laplace_sum_cdf", "pamst_bound", "pamst_trace_bound", "structure_preservation_prob",
    "sufficient_alpha",
    "ClusterPartition", "WeightedTree", "dbcvi", "dbmstclu", "dispersion", "perform_cut",
    "separation", "validity_index",
    "DisconnectedGraphError", "DuplicateEdgeError", "Graph", "GraphError", "GraphFormatError",
    "PointCloud", "SelfLoopError", "TreeTopology", "approximation_error", "epsilon_graph",
    "erdos_renyi", "format_graph", "mst_kruskal", "mst_prim", "parse_graph",
    "sketch_binary_dataset", "tree_weight", "xor_incident_edges",
    "BudgetLedger", "PrivacyParams", "compose", "empirical_max_divergence",
    "exponential_choice", "graph_laplace", "sample_gaussian", "sample_laplace",
    "PamstTrace", "UtilityConfig", "pamst", "release_weighted_tree", "step_utilities", "w_star",
]
