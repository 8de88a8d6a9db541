"""
Base Check

Abstract base class for every identity check. Provides timed execution,
logging and CheckReport assembly.
"""

import time
from abc import ABC, abstractmethod
from typing import Any, Callable, Dict, Iterable, List, Optional, Tuple

import numpy as np

from ernst_theta.config import settings
from ernst_theta.exceptions import ErnstThetaError
from ernst_theta.logger import get_logger, log_check_result
from ernst_theta.schemas.common import CheckReport

logger = get_logger(__name__)

Outcome = Tuple[float, Dict[str, Any]]


def normalized_residual(lhs: complex, rhs: complex, *terms: complex) -> float:
    """
    |lhs − rhs| divided by the largest absolute term of the identity.

    Args:
        lhs: Left-hand side
        rhs: Right-hand side
        terms: Further summands whose size sets the scale

    Returns:
        float: Scale-free residual, 0 when every term vanishes
    """
    scale = max([abs(lhs), abs(rhs)] + [abs(t) for t in terms])
    if not np.isfinite(scale):
        return float("inf")
    if scale < 1e-300:
        return 0.0
    return float(abs(lhs - rhs) / scale)


def point_labels(*points) -> List[str]:
    return [p.label() for p in points]


class BaseCheck(ABC):
    """
    Base check class.

    All checks must inherit from this class and implement:
    - compute() returning (residual, inputs summary)
    """

    def __init__(self, name: str, tolerance: float):
        """
        Initialize base check.

        Args:
            name: Check name used in reports and ``--only`` filters
            tolerance: Residual threshold of the check
        """
        self.name = name
        self.tolerance = tolerance
        self.logger = get_logger(f"ernst_theta.verify.{name}")

    # ========================================================================
    # ABSTRACT METHODS (must be implemented by subclasses)
    # ========================================================================

    @abstractmethod
    def compute(self) -> Outcome:
        """
        Evaluate both sides of the identity.

        Returns:
            tuple: (normalized residual, inputs summary)
        """
        pass

    # ========================================================================
    # COMMON METHODS
    # ========================================================================

    def run(self) -> CheckReport:
        """
        Run the check, time it and log the outcome.

        Library errors become a failed report carrying the error dict; they
        never escape a suite run.

        Returns:
            CheckReport: Outcome of the check
        """
        started = time.perf_counter()
        error: Optional[Dict[str, Any]] = None
        inputs: Dict[str, Any] = {}
        try:
            residual, inputs = self.compute()
        except ErnstThetaError as exc:
            residual = float("inf")
            error = exc.to_dict()
            self.logger.error(f"Check {self.name} raised {exc.__class__.__name__}", extra=error)
        duration_ms = (time.perf_counter() - started) * 1000

        finite = bool(np.isfinite(residual))
        passed = error is None and finite and residual <= self.tolerance
        report = CheckReport(
            name=self.name,
            residual=float(residual) if finite else float(np.finfo(float).max),
            tolerance=self.tolerance,
            passed=passed,
            runtime_ms=duration_ms,
            inputs=inputs,
            error=error,
        )
        log_check_result(self.name, report.residual, self.tolerance, passed, duration_ms)
        return report

    def __repr__(self) -> str:
        return f"<{self.__class__.__name__}(name='{self.name}', tolerance={self.tolerance:g})>"


class FunctionCheck(BaseCheck):
    """Check backed by a callable returning (residual, inputs)."""

    def __init__(self, name: str, tolerance: float, func: Callable[[], Outcome]):
        super().__init__(name, tolerance)
        self.func = func

    def compute(self) -> Outcome:
        return self.func()


def run_check(name: str, tolerance: float, func: Callable[[], Outcome]) -> CheckReport:
    return FunctionCheck(name, tolerance, func).run()


def merge_reports(name: str, reports: Iterable[CheckReport]) -> CheckReport:
    """
    Fold repeated samples of one check into a single report.

    The merged residual is the worst sample; the check passes only if every
    sample passed.
    """
    reports = list(reports)
    if not reports:
        raise ValueError("merge_reports needs at least one report")
    worst = max(reports, key=lambda r: r.residual)
    errors = [r.error for r in reports if r.error is not None]
    return CheckReport(
        name=name,
        residual=worst.residual,
        tolerance=max(r.tolerance for r in reports),
        passed=all(r.passed for r in reports),
        runtime_ms=sum(r.runtime_ms for r in reports),
        inputs={"samples": len(reports), "worst": worst.inputs},
        error=errors[0] if errors else None,
    )


def derivative_tolerance(genus: int) -> float:
    return settings.derivative_tolerance(genus)
