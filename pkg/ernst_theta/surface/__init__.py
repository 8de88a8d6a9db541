"""
Surface Package

Hyperelliptic curves, cut-avoiding integration paths, periods and Abel maps.
"""

from ernst_theta.surface.curve import (
    Cut,
    ErnstCurve,
    GeneralCurve,
    HomologySpec,
    SurfacePoint,
    mu,
    new_ernst_curve,
    new_general_curve,
)
from ernst_theta.surface.paths import Path, PathPlanner
from ernst_theta.surface.periods import (
    AbelValue,
    PeriodData,
    RauchDerivatives,
    ThirdKind,
    abel,
    compute_periods,
    eval_normalized_diff,
    rauch_derivatives,
    third_kind,
)

__all__ = [
    # Curves
    "Cut",
    "ErnstCurve",
    "GeneralCurve",
    "HomologySpec",
    "SurfacePoint",
    "mu",
    "new_ernst_curve",
    "new_general_curve",
    # Paths
    "Path",
    "PathPlanner",
    # Periods
    "AbelValue",
    "PeriodData",
    "RauchDerivatives",
    "ThirdKind",
    "abel",
    "compute_periods",
    "eval_normalized_diff",
    "rauch_derivatives",
    "third_kind",
]
