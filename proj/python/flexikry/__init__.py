"""Flexible Krylov methods for group-sparse regularized inverse problems."""

from ._flexikry import (
    GroupStructure,
    IterationRecord,
    SolverTrace,
    TestProblem,
    TreeStrategy,
    __version__,
    anomaly,
    cli,
    compute_weights,
    dynamic_deblur,
    group_norm,
    haar_forward,
    haar_inverse,
    load_problem,
    relative_error,
    save_problem,
    singleton_groups,
    solve,
    temporal_groups,
    wavelet_deblur,
    wavelet_tree_groups,
)

__all__ = [
    "GroupStructure",
    "IterationRecord",
    "SolverTrace",
    "TestProblem",
    "TreeStrategy",
    "__version__",
    "anomaly",
    "cli",
    "compute_weights",
    "dynamic_deblur",
    "group_norm",
    "haar_forward",
    "haar_inverse",
    "load_problem",
    "relative_error",
    "save_problem",
    "singleton_groups",
    "solve",
    "temporal_groups",
    "wavelet_deblur",
    "wavelet_tree_groups",
]
