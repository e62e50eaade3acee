"""Successor lane graphs as sets of maximal paths: decomposition, path
parametrizations, set matching, aggregation and evaluation metrics."""

__version__ = "0.1.0"

from .aggregate import AggregationConfig, EmptyGraphError, aggregate, filter_paths, proposals_to_graph
from .curves import (
    BezierCurve,
    Polyline,
    bernstein,
    bezier_eval,
    bezier_sample,
    fit_bezier,
    resample_polyline,
)
from .decompose import decompose, path_to_polyline
from .graph import LaneGraph, Node, split_nodes, successors, terminal_nodes, validate
from .matching import (
    GroundTruthPath,
    MatchWeights,
    PathProposal,
    brute_force_assignment,
    hungarian,
    match_cost,
    set_loss,
)
from .metrics import MetricConfig, MetricReport, evaluate
from .synthetic import SyntheticSpec, generate_synthetic
