"""Error-mitigation engines: ZNE, CDR and the task-graph executor."""

from .cdr import CdrConfig, cdr, generate_training_set, nearest_clifford_angle
from .extrapolation import FitResult, FitSpec, extrapolate
from .folding import FOLDING_MODES, fold
from .graphs import build_cdr_graph, build_zne_graph
from .taskgraph import INPUT, Task, TaskGraph, run_task_graph
from .variance import cdr_variance, propagate_variance, zne_exponential_relative_variance
from .zne import Experiment, MitigatedEstimate, ZneConfig, zne

__all__ = [
    "CdrConfig",
    "Experiment",
    "FOLDING_MODES",
    "FitResult",
    "FitSpec",
    "INPUT",
    "MitigatedEstimate",
    "Task",
    "TaskGraph",
    "ZneConfig",
    "build_cdr_graph",
    "build_zne_graph",
    "cdr",
    "cdr_variance",
    "extrapolate",
    "fold",
    "generate_training_set",
    "nearest_clifford_angle",
    "propagate_variance",
    "run_task_graph",
    "zne",
    "zne_exponential_relative_variance",
]
