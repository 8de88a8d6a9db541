"""
Verify Package

Identity checks with normalized residuals and the suite runner.
"""

from ernst_theta.verify.base import BaseCheck, FunctionCheck, merge_reports, normalized_residual
from ernst_theta.verify.fay import fay_degenerate1, fay_degenerate2, fay_trisecant
from ernst_theta.verify.propositions import PROPOSITION_NAMES, PropositionSuite, proposition_suite
from ernst_theta.verify.suite import SuiteContext, available_checks, run_suite
from ernst_theta.verify.variational import rauch_checks, rauch_suite

__all__ = [
    "BaseCheck",
    "FunctionCheck",
    "merge_reports",
    "normalized_residual",
    "fay_trisecant",
    "fay_degenerate1",
    "fay_degenerate2",
    "PROPOSITION_NAMES",
    "PropositionSuite",
    "proposition_suite",
    "SuiteContext",
    "available_checks",
    "run_suite",
    "rauch_checks",
    "rauch_suite",
]
