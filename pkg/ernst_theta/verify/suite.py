"""
Identity Suite

Registry of the named check groups and the default suite run. Groups are
independent jobs run over a thread pool; reports keep registry order.
"""

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np

from ernst_theta.exceptions import ConfigParse, ErnstThetaError
from ernst_theta.logger import get_logger
from ernst_theta.schemas.common import CheckReport, RunSummary
from ernst_theta.solution.ernst import ErnstSolution, ErnstState
from ernst_theta.theta.characteristics import Characteristics
from ernst_theta.verify.base import merge_reports
from ernst_theta.verify.fay import fay_degenerate1, fay_degenerate2, fay_trisecant
from ernst_theta.verify.propositions import ORDER_TOLERANCE, PROPOSITION_NAMES, proposition_suite
from ernst_theta.verify.sampling import sample_generic_points
from ernst_theta.verify.variational import rauch_suite

logger = get_logger(__name__)

FAY_GROUPS = ("fay_trisecant", "fay_degenerate1", "fay_degenerate2")
GROUPS = FAY_GROUPS + ("rauch_suite", "propositions")

# checks whose residual is not a relative error
FIXED_TOLERANCE = {"fd_order": ORDER_TOLERANCE}


@dataclass
class SuiteContext:
    """
    Solution, point and seed shared by every group of one suite run.

    Args:
        solution: Solution whose curve at ``xi`` hosts the Fay and Rauch samples
        xi: Regular point ξ
        seed: Base seed; each group derives its own generator from it
        samples: Random configurations per Fay group
    """

    solution: ErnstSolution
    xi: complex
    seed: int
    samples: int = 20

    @property
    def state(self) -> ErnstState:
        return self.solution.state(self.xi)

    def rng(self, salt: int) -> np.random.Generator:
        return np.random.default_rng([self.seed, salt])

    def chars(self, i: int) -> Characteristics:
        """Alternate between zero characteristics and the solution's own."""
        return Characteristics.zero(self.solution.genus) if i % 2 == 0 else self.solution.chars


# ============================================================================
# GROUPS
# ============================================================================


def _fay_group(name: str, salt: int) -> Callable[[SuiteContext, Optional[Sequence[str]]], List[CheckReport]]:
    arity = {"fay_trisecant": 4, "fay_degenerate1": 3, "fay_degenerate2": 2}[name]
    check = {"fay_trisecant": fay_trisecant, "fay_degenerate1": fay_degenerate1, "fay_degenerate2": fay_degenerate2}[name]

    def run(ctx: SuiteContext, only=None) -> List[CheckReport]:
        rng = ctx.rng(salt)
        st = ctx.state
        kc = st.kernels
        reports = []
        for i in range(ctx.samples):
            points = sample_generic_points(rng, st.curve, arity)
            z = rng.uniform(-0.5, 0.5, size=ctx.solution.genus)
            reports.append(check(kc, z, *points, chars=ctx.chars(i)))
        if name == "fay_degenerate1":
            xi_p, _, inf_p, inf_m = st.points()
            reports.append(fay_degenerate1(kc, st.u_minus, inf_m, xi_p, inf_p, chars=ctx.solution.chars))
        return [merge_reports(name, reports)]

    return run


def _rauch_group(ctx: SuiteContext, only=None) -> List[CheckReport]:
    # fresh periods: the suite checks the curve, not a corrupted B
    return [rauch_suite(ctx.state.curve, None, ctx.rng(3))]


def _proposition_group(ctx: SuiteContext, only=None) -> List[CheckReport]:
    names = None if only is None else [name for name in only if name in PROPOSITION_NAMES]
    return proposition_suite(ctx.solution, ctx.xi, ctx.rng(4), names)


REGISTRY: Dict[str, Callable[[SuiteContext, Optional[Sequence[str]]], List[CheckReport]]] = {
    "fay_trisecant": _fay_group("fay_trisecant", 0),
    "fay_degenerate1": _fay_group("fay_degenerate1", 1),
    "fay_degenerate2": _fay_group("fay_degenerate2", 2),
    "rauch_suite": _rauch_group,
    "propositions": _proposition_group,
}


def available_checks() -> List[str]:
    """Every name accepted by ``--only``: group names and proposition names."""
    return list(GROUPS) + list(PROPOSITION_NAMES)


def select_groups(only: Optional[Sequence[str]]) -> List[str]:
    """
    Groups needed for an ``--only`` selection.

    Raises:
        ConfigParse: If a name is neither a group nor a proposition
    """
    if not only:
        return list(GROUPS)
    unknown = [name for name in only if name not in GROUPS and name not in PROPOSITION_NAMES]
    if unknown:
        raise ConfigParse("Unknown check name", details={"names": unknown, "available": available_checks()})
    wanted = set(only)
    if wanted & set(PROPOSITION_NAMES):
        wanted.add("propositions")
    return [name for name in GROUPS if name in wanted]


def _run_group(name: str, ctx: SuiteContext, only: Optional[Sequence[str]]) -> List[CheckReport]:
    started = time.perf_counter()
    # "--only propositions" selects the whole group
    if only is not None and (name in only or name != "propositions"):
        only = None
    try:
        return REGISTRY[name](ctx, only)
    except ErnstThetaError as exc:
        logger.error(f"Check group {name} failed", extra=exc.to_dict())
        return [
            CheckReport(
                name=name,
                residual=float(np.finfo(float).max),
                tolerance=1.0,
                passed=False,
                runtime_ms=(time.perf_counter() - started) * 1000,
                error=exc.to_dict(),
            )
        ]


def _override(report: CheckReport, tolerance: Optional[float]) -> CheckReport:
    if tolerance is None or report.name in FIXED_TOLERANCE:
        return report
    passed = report.error is None and report.residual <= tolerance
    return report.model_copy(update={"tolerance": tolerance, "passed": passed})


# ============================================================================
# SUITE RUN
# ============================================================================


def run_suite(
    ctx: SuiteContext,
    only: Optional[Sequence[str]] = None,
    threads: Optional[int] = None,
    tolerance: Optional[float] = None,
) -> RunSummary:
    """
    Run the selected check groups.

    Args:
        ctx: Solution, ξ and seed of the run
        only: Group or proposition names (all when omitted)
        threads: Worker count for the group pool
        tolerance: Replaces every relative-residual tolerance

    Returns:
        RunSummary: Reports in registry order with pass/fail totals

    Raises:
        ConfigParse: If ``only`` names an unknown check
    """
    started = time.perf_counter()
    groups = select_groups(only)
    only = list(only) if only else None

    # calibrated once, before the workers share the solution
    ctx.solution.signs

    with ThreadPoolExecutor(max_workers=max(1, min(threads or len(groups), len(groups)))) as pool:
        batches = list(pool.map(lambda name: _run_group(name, ctx, only), groups))

    reports = [_override(report, tolerance) for batch in batches for report in batch]
    failed = [report.name for report in reports if not report.passed]
    summary = RunSummary(
        kind="check",
        total=len(reports),
        failed=len(failed),
        max_residual=max((report.residual for report in reports), default=0.0),
        tolerance=tolerance or 0.0,
        runtime_ms=(time.perf_counter() - started) * 1000,
        reports=reports,
    )
    log = logger.info if not failed else logger.warning
    log(
        "Identity suite finished",
        extra={"total": summary.total, "failed": failed, "seed": ctx.seed, "groups": groups},
    )
    return summary
