"""
ernst-theta

Hyperelliptic Riemann-surface data, theta-functional solutions of the Ernst
equation with their metric functions, and a numerical identity suite.
"""

from ernst_theta.config import settings
from ernst_theta.exceptions import ErnstThetaError
from ernst_theta.kernels import KernelContext
from ernst_theta.solution import ErnstSolution, ErnstValue, evaluate, ernst_residual, metric_values
from ernst_theta.surface import GeneralCurve, ErnstCurve, SurfacePoint, compute_periods, new_ernst_curve, new_general_curve
from ernst_theta.theta import Characteristics, ThetaContext

__version__ = settings.app_version

__all__ = [
    "settings",
    "ErnstThetaError",
    "KernelContext",
    "ErnstSolution",
    "ErnstValue",
    "evaluate",
    "ernst_residual",
    "metric_values",
    "GeneralCurve",
    "ErnstCurve",
    "SurfacePoint",
    "compute_periods",
    "new_ernst_curve",
    "new_general_curve",
    "Characteristics",
    "ThetaContext",
]
