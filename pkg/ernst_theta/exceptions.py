"""
Error Hierarchy

Every failure raised by the library derives from ErnstThetaError and carries a
``details`` dict so the CLI and the check reports can serialise it uniformly.
"""

from typing import Any, Dict, Optional


class ErnstThetaError(Exception):
    """
    Base error for the package.

    Attributes:
        message: Human readable description
        details: Structured context (points, residuals, thresholds)
    """

    code: str = "ernst_theta_error"

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.message = message
        self.details = details or {}

    def to_dict(self) -> Dict[str, Any]:
        """Convert error to a JSON-serialisable dictionary."""
        return {
            "error": self.code,
            "message": self.message,
            "details": {key: _plain(value) for key, value in self.details.items()},
        }


def _plain(value: Any) -> Any:
    if isinstance(value, complex):
        return [value.real, value.imag]
    if isinstance(value, (list, tuple)):
        return [_plain(item) for item in value]
    return value


# ============================================================================
# CURVE CONSTRUCTION
# ============================================================================


class CurveError(ErnstThetaError):
    code = "curve_error"


class DuplicateBranchPoint(CurveError):
    code = "duplicate_branch_point"


class OddBranchCount(CurveError):
    code = "odd_branch_count"


class RealityViolation(CurveError):
    code = "reality_violation"


class OnAxis(CurveError):
    code = "on_axis"


class BranchCollision(CurveError):
    code = "branch_collision"


# ============================================================================
# PERIODS AND ABEL MAP
# ============================================================================


class QuadratureError(ErnstThetaError):
    code = "quadrature_error"


class IllConditioned(QuadratureError):
    code = "ill_conditioned"


class NoConvergence(QuadratureError):
    code = "no_convergence"


class PathThroughBranchPoint(QuadratureError):
    code = "path_through_branch_point"


class CoincidingPoles(QuadratureError):
    code = "coinciding_poles"


class HomologyMismatch(QuadratureError):
    code = "homology_mismatch"


# ============================================================================
# THETA FUNCTIONS
# ============================================================================


class ThetaError(ErnstThetaError):
    code = "theta_error"


class DivergentContext(ThetaError):
    code = "divergent_context"


class NoNonSingularOddChar(ThetaError):
    code = "no_non_singular_odd_char"


# ============================================================================
# KERNELS
# ============================================================================


class KernelError(ErnstThetaError):
    code = "kernel_error"


class CoincidingPoints(KernelError):
    code = "coinciding_points"


class SingularPrimeForm(KernelError):
    code = "singular_prime_form"


# ============================================================================
# SOLUTIONS
# ============================================================================


class SolutionError(ErnstThetaError):
    code = "solution_error"


class ThetaDivisorHit(SolutionError):
    code = "theta_divisor_hit"


class SingularRegion(SolutionError):
    code = "singular_region"


class SignCalibrationFailed(SolutionError):
    code = "sign_calibration_failed"


# ============================================================================
# CONFIGURATION
# ============================================================================


class ConfigParse(ErnstThetaError):
    code = "config_parse"
