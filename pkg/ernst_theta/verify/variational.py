"""
Variational Checks

Finite-difference checks of the branch-point derivatives: dω/dλ_m and dB/dλ_m
against the Rauch formulas, the Abel-integral derivative against the
third-kind form, and the total λ_m-derivative of Θ against the heat equation
plus chain rule. Every branch point of the curve is moved in turn.
"""

from dataclasses import dataclass
from typing import Dict, List, Optional

import numpy as np

from ernst_theta.logger import get_logger
from ernst_theta.schemas.common import CheckReport, format_complex
from ernst_theta.surface.curve import GeneralCurve
from ernst_theta.surface.periods import (
    PeriodData,
    RauchDerivatives,
    abel,
    compute_periods,
    eval_normalized_diff,
    rauch_derivatives,
    third_kind,
)
from ernst_theta.theta.characteristics import Characteristics
from ernst_theta.theta.evaluator import ThetaContext, heat_residual
from ernst_theta.verify.base import derivative_tolerance, run_check
from ernst_theta.verify.sampling import make_rng, sample_generic_points

logger = get_logger(__name__)

HEAT_TOLERANCE = 1e-6


def _vector_residual(approx, exact) -> float:
    approx, exact = np.asarray(approx), np.asarray(exact)
    scale = max(np.linalg.norm(approx), np.linalg.norm(exact))
    if scale < 1e-300:
        return 0.0
    return float(np.linalg.norm(approx - exact) / scale)


def _lattice_free(delta: np.ndarray) -> np.ndarray:
    """Remove the integer part that a change of path class adds to an Abel difference."""
    return delta - np.rint(delta.real)


@dataclass
class BranchProbe:
    """Analytic derivatives at λ_m and periods of the curves with λ_m ± h."""

    m: int
    h: float
    rauch: RauchDerivatives
    plus: PeriodData
    minus: PeriodData

    def central(self, upper, lower):
        return (upper - lower) / (2.0 * self.h)


class BranchProbes:
    """Lazily built BranchProbe per branch point of one curve."""

    def __init__(self, curve: GeneralCurve, periods: PeriodData):
        self.curve = curve
        self.periods = periods
        self.order = max(16, periods.quad_order // 2)
        self._probes: Dict[int, BranchProbe] = {}

    def step(self, m: int) -> float:
        lam = complex(self.curve.branch_points[m])
        return min(1e-4 * max(1.0, abs(lam)), 1e-3 * self.curve.min_gap)

    def __getitem__(self, m: int) -> BranchProbe:
        probe = self._probes.get(m)
        if probe is None:
            h = self.step(m)
            lam = complex(self.curve.branch_points[m])
            plus = compute_periods(self.curve.with_branch_point(m, lam + h), self.order)
            minus = compute_periods(self.curve.with_branch_point(m, lam - h), self.order)
            probe = BranchProbe(m, h, rauch_derivatives(self.curve, self.periods, m), plus, minus)
            self._probes[m] = probe
        return probe

    def indices(self) -> range:
        return range(len(self.curve.branch_points))


def rauch_checks(
    curve: GeneralCurve,
    periods: Optional[PeriodData] = None,
    rng: Optional[np.random.Generator] = None,
) -> List[CheckReport]:
    """
    Rauch1, Rauch2, c10, heat1 and heat reports for one curve.

    Args:
        curve: Curve whose branch points are moved
        periods: Periods of ``curve`` (computed when omitted)
        rng: Generator for the evaluation points and z

    Returns:
        List[CheckReport]: One report per formula, worst branch point reported
    """
    periods = periods or compute_periods(curve)
    rng = rng or make_rng()
    probes = BranchProbes(curve, periods)
    x, y = sample_generic_points(rng, curve, 2)
    z0 = rng.uniform(-0.5, 0.5, size=curve.genus).astype(complex)
    zero = Characteristics.zero(curve.genus)
    tolerance = derivative_tolerance(curve.genus)
    base = {"curve": curve.fingerprint(), "genus": curve.genus}

    def worst(values: Dict[int, float], extra=None):
        m = max(values, key=values.get)
        inputs = dict(base, branch_index=m, per_branch=[values[k] for k in sorted(values)])
        inputs.update(extra or {})
        return values[m], inputs

    def rauch1():
        values = {}
        for m in probes.indices():
            probe = probes[m]
            fd = probe.central(
                eval_normalized_diff(probe.plus.curve, probe.plus, x),
                eval_normalized_diff(probe.minus.curve, probe.minus, x),
            )
            values[m] = _vector_residual(fd, probe.rauch.domega(x))
        return worst(values, {"point": x.label()})

    def rauch2():
        values = {}
        for m in probes.indices():
            probe = probes[m]
            fd = probe.central(probe.plus.B, probe.minus.B)
            values[m] = _vector_residual(fd.ravel(), probe.rauch.dB.ravel())
        return worst(values)

    def c10():
        inf_p, inf_m = curve.infinity(1), curve.infinity(-1)
        values = {}
        for m in probes.indices():
            probe = probes[m]
            moving = curve.branch_point(m)
            analytic = probe.rauch.dabel(moving, inf_p)
            kernel = (
                periods.c10_sign * 0.25
                * third_kind(curve, periods, inf_m, inf_p).value_at(moving)
                * probe.rauch.f
            )
            delta = _lattice_free(
                abel(probe.plus.curve, probe.plus, probe.plus.curve.branch_point(m), inf_p).value
                - abel(probe.minus.curve, probe.minus, probe.minus.curve.branch_point(m), inf_p).value
            )
            values[m] = max(
                _vector_residual(delta / (2.0 * probe.h), analytic),
                _vector_residual(analytic, kernel),
            )
        return worst(values)

    def heat1():
        ctx = ThetaContext(periods.B)
        z_center = z0 + abel(curve, periods, x, y).value
        values = {}
        for m in probes.indices():
            probe = probes[m]
            f = probe.rauch.f
            residuals = []
            for moving_z in (True, False):
                value = ctx.evaluate(z_center if moving_z else z0, zero, order=2)
                rhs = 0.25 * complex(f @ value.hess @ f)
                if moving_z:
                    rhs += complex(value.grad @ probe.rauch.dabel(x, y))
                sides = []
                for shifted in (probe.plus, probe.minus):
                    z = z0
                    if moving_z:
                        z = z_center + _lattice_free(abel(shifted.curve, shifted, x, y).value - (z_center - z0))
                    sides.append(ThetaContext(shifted.B).theta(z, zero))
                lhs = probe.central(*sides)
                residuals.append(abs(lhs - rhs) / max(abs(lhs), abs(rhs), 1e-300))
            values[m] = float(max(residuals))
        return worst(values, {"z": [format_complex(v) for v in z0], "points": [x.label(), y.label()]})

    def heat():
        ctx = ThetaContext(periods.B)
        results = [
            heat_residual(ctx, z0, zero, alpha, beta)
            for alpha in range(curve.genus)
            for beta in range(curve.genus)
        ]
        residual = max(r.residual for r in results)
        return residual, dict(base, kappa=sorted({r.kappa for r in results}))

    return [
        run_check("Rauch1", tolerance, rauch1),
        run_check("Rauch2", tolerance, rauch2),
        run_check("c10", tolerance, c10),
        run_check("heat1", tolerance, heat1),
        run_check("heat", HEAT_TOLERANCE, heat),
    ]


def rauch_suite(
    curve: GeneralCurve,
    periods: Optional[PeriodData] = None,
    rng: Optional[np.random.Generator] = None,
) -> CheckReport:
    """
    Variational checks folded into one report.

    The residual is the largest component residual; the component residuals
    and tolerances are listed in ``inputs``.
    """
    reports = rauch_checks(curve, periods, rng)
    errors = [r.error for r in reports if r.error is not None]
    return CheckReport(
        name="rauch_suite",
        residual=max(r.residual for r in reports),
        tolerance=derivative_tolerance(curve.genus),
        passed=all(r.passed for r in reports),
        runtime_ms=sum(r.runtime_ms for r in reports),
        inputs={
            "curve": curve.fingerprint(),
            "components": {r.name: {"residual": r.residual, "tolerance": r.tolerance} for r in reports},
        },
        error=errors[0] if errors else None,
    )
