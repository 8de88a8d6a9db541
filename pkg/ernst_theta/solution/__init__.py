"""
Solution Package

Ernst potential, metric functions and grid evaluation.
"""

from ernst_theta.solution.ernst import (
    ErnstSolution,
    ErnstValue,
    admissible_characteristics,
    check_reality,
    d_xi,
    d_xibar,
    ernst_residual,
    evaluate,
    laplace,
)
from ernst_theta.solution.grid import evaluate_point, run_grid, solution_from_config, write_grid_csv
from ernst_theta.solution.metric import LineElement, MetricValues, line_element, metric_A, metric_k, metric_values

__all__ = [
    # Ernst potential
    "ErnstSolution",
    "ErnstValue",
    "admissible_characteristics",
    "check_reality",
    "d_xi",
    "d_xibar",
    "ernst_residual",
    "evaluate",
    "laplace",
    # Metric
    "LineElement",
    "MetricValues",
    "line_element",
    "metric_A",
    "metric_k",
    "metric_values",
    # Grid
    "evaluate_point",
    "run_grid",
    "solution_from_config",
    "write_grid_csv",
]
