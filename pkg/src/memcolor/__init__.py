"""Memetic graph coloring with a permutation-invariant neural surrogate.

Solves the weighted vertex coloring problem and the k-coloring problem with
a large population of parallel tabu searches whose restart points (offspring
of partition crossovers) are picked by a learned predictor of the score each
restart will reach.
"""

from .coloring import Coloring, col_conflicts, is_legal, penalized_score, wvcp_score
from .graph import (
    DimacsError,
    ReductionReport,
    WeightedGraph,
    expand_coloring,
    load_instance,
    parse_dimacs,
    reduce_graph,
    write_dimacs,
)

__version__ = "0.1.0"

__all__ = [
    "Coloring",
    "DimacsError",
    "ReductionReport",
    "WeightedGraph",
    "col_conflicts",
    "expand_coloring",
    "is_legal",
    "load_instance",
    "parse_dimacs",
    "penalized_score",
    "reduce_graph",
    "write_dimacs",
    "wvcp_score",
    "__version__",
]
