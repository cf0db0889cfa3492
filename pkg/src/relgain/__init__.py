"""Reliability estimation and edge selection for uncertain graphs.

An uncertain graph carries an independent existence probability on every
edge.  This package estimates the probability that a target stays reachable
from a source across the random edge outcomes, and picks k new edges that
raise that probability the most: candidate generation and pruning, greedy
path-batch selection, exact enumeration at desk scale, baselines, and
multi-source / multi-target variants, plus synthetic graph generators and a
command-line front end.
"""

from .baselines import (eigen_pair_ranking, eigen_scores, select_centrality,
                        select_eigen, select_hill_climbing,
                        select_individual_topk)
from .candidates import (CandidateEdge, CandidateSet, eliminate,
                         eliminate_multi, prune_by_paths)
from .errors import (CapExceededError, ConvergenceError, GraphFormatError,
                     RelgainError)
from .estimators import (DispersionStats, EstimatorConfig,
                         ReliabilityEstimate, converged_sample_size,
                         dispersion, estimate, reach_counts,
                         reliability_all_from, reliability_all_to,
                         reliability_exact, reliability_mc, reliability_rss)
from .generators import (GenSpec, erdos_renyi, generate, k_regular,
                         prob_from_count, scale_free, small_world)
from .graph import UncertainGraph, load_graph, save_graph
from .mrp import improve_mrp
from .multi import (MultiQuery, influence_spread, select_multi,
                    select_multi_avg, select_multi_max, select_multi_min)
from .paths import ReliablePath, augment, most_reliable_path, top_l_paths
from .selection import (SelectionResult, improve_single_pair, select_be,
                        select_exact, select_ip)

__version__ = "0.1.0"

__all__ = [
    "CandidateEdge",
    "CandidateSet",
    "CapExceededError",
    "ConvergenceError",
    "DispersionStats",
    "EstimatorConfig",
    "GenSpec",
    "GraphFormatError",
    "MultiQuery",
    "RelgainError",
    "ReliabilityEstimate",
    "ReliablePath",
    "SelectionResult",
    "UncertainGraph",
    "augment",
    "converged_sample_size",
    "dispersion",
    "eigen_pair_ranking",
    "eigen_scores",
    "eliminate",
    "eliminate_multi",
    "erdos_renyi",
    "estimate",
    "generate",
    "improve_mrp",
    "improve_single_pair",
    "influence_spread",
    "k_regular",
    "load_graph",
    "most_reliable_path",
    "prob_from_count",
    "prune_by_paths",
    "reach_counts",
    "reliability_all_from",
    "reliability_all_to",
    "reliability_exact",
    "reliability_mc",
    "reliability_rss",
    "save_graph",
    "scale_free",
    "select_be",
    "select_centrality",
    "select_eigen",
    "select_exact",
    "select_hill_climbing",
    "select_individual_topk",
    "select_ip",
    "select_multi",
    "select_multi_avg",
    "select_multi_max",
    "select_multi_min",
    "small_world",
    "top_l_paths",
]
