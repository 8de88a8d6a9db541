"""
Prime-Form Kernels

Quotients of prime forms E(x, y) = Θ★(A(x) − A(y))/(h(x)h(y)) with a fixed
non-singular odd characteristic ★ and h² = ∇Θ★(0)·ω/dτ. Every kernel is built
from quotients in which the h of each point cancels except for explicit h²
factors, so no square root is ever taken.

    c1(a, b, c) = ω_{a,c}(b)/dτ                    (third kind, residue +1 at a)
    c2(a, b, c) = E(a, c)/(E(a, b)E(b, c)dτ_b)
    d1(a, b)    = −W(a, b)/(dτ_a dτ_b)
    d2(a, b)    = 1/(E(a, b)² dτ_a dτ_b)
"""

from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from ernst_theta.config import settings
from ernst_theta.exceptions import CoincidingPoints, NoNonSingularOddChar, SingularPrimeForm
from ernst_theta.logger import get_logger
from ernst_theta.surface.curve import ErnstCurve, GeneralCurve, SurfacePoint
from ernst_theta.surface.periods import (
    PeriodData,
    ThirdKind,
    abel_vector,
    eval_normalized_diff,
    third_kind,
)
from ernst_theta.theta.characteristics import Characteristics
from ernst_theta.theta.evaluator import ThetaContext, ThetaValue, odd_candidates

logger = get_logger(__name__)


def _distinct(*points: SurfacePoint) -> None:
    for i in range(len(points)):
        for j in range(i + 1, len(points)):
            if points[i] == points[j]:
                raise CoincidingPoints(
                    "Kernel arguments coincide",
                    details={"point": points[i].label()},
                )


class KernelContext:
    """
    Periods, theta context and odd characteristic of one curve.

    ★ is chosen among the non-singular odd characteristics to maximize the
    smallest normalized |h²| over ``points`` (defaults: cut-0 endpoints and ∞±).
    """

    def __init__(
        self,
        curve: GeneralCurve,
        periods: PeriodData,
        ctx: Optional[ThetaContext] = None,
        points: Optional[Sequence[SurfacePoint]] = None,
        star: Optional[Characteristics] = None,
    ):
        self.curve = curve
        self.periods = periods
        self.ctx = ctx or ThetaContext(periods.B)
        self.genus = curve.genus
        self._omega: Dict[SurfacePoint, np.ndarray] = {}
        self._third: Dict[Tuple[SurfacePoint, SurfacePoint], ThirdKind] = {}
        if points is None:
            points = [
                curve.branch_point(0),
                curve.branch_point(1),
                curve.infinity(1),
                curve.infinity(-1),
            ]
        self.star = star or self._select_star(points)
        self._grad0 = self.ctx.evaluate(np.zeros(self.genus), self.star, order=1).grad

    # ------------------------------------------------------------------

    def _select_star(self, points: Sequence[SurfacePoint]) -> Characteristics:
        omegas = [self.omega(x) for x in points]
        best, best_score = None, -1.0
        zero = np.zeros(self.genus, dtype=complex)
        for chars, norm in odd_candidates(self.ctx):
            if norm < settings.divisor_guard:
                continue
            grad = self.ctx.evaluate(zero, chars, order=1).grad
            scores = [
                abs(grad @ om) / (np.linalg.norm(grad) * max(np.linalg.norm(om), 1e-300))
                for om in omegas
            ]
            score = min(scores) if scores else 1.0
            if score > best_score:
                best, best_score = chars, score
        if best is None:
            raise NoNonSingularOddChar("No non-singular odd characteristic", details={})
        logger.debug(
            "Odd characteristic for kernels",
            extra={"chars": best.label(), "score": best_score},
        )
        return best

    # ------------------------------------------------------------------
    # building blocks
    # ------------------------------------------------------------------

    def omega(self, x: SurfacePoint) -> np.ndarray:
        """ω(x)/dτ (cached)."""
        value = self._omega.get(x)
        if value is None:
            value = eval_normalized_diff(self.curve, self.periods, x)
            self._omega[x] = value
        return value

    def A(self, x: SurfacePoint) -> np.ndarray:
        return abel_vector(self.periods, x)

    def theta_star(self, z: np.ndarray, order: int = 1) -> ThetaValue:
        return self.ctx.evaluate(z, self.star, order=order)

    def h2(self, x: SurfacePoint) -> complex:
        """h²(x) = ∇Θ★(0)·ω(x)/dτ."""
        return complex(self._grad0 @ self.omega(x))

    def star_between(self, x: SurfacePoint, y: SurfacePoint) -> complex:
        """Θ★(A(x) − A(y)), i.e. E(x, y)h(x)h(y).

        Raises:
            SingularPrimeForm: If the value is negligible against the series scale
        """
        v = self.theta_star(self.A(x) - self.A(y), order=0)
        if v.relative < settings.prime_form_floor:
            raise SingularPrimeForm(
                "Prime form vanishes",
                details={"x": x.label(), "y": y.label(), "relative": v.relative},
            )
        return v.value

    def third(self, a: SurfacePoint, c: SurfacePoint) -> ThirdKind:
        key = (a, c)
        omega = self._third.get(key)
        if omega is None:
            omega = third_kind(self.curve, self.periods, a, c)
            self._third[key] = omega
        return omega

    # ------------------------------------------------------------------
    # kernels
    # ------------------------------------------------------------------

    def c1(self, a: SurfacePoint, b: SurfacePoint, c: SurfacePoint) -> complex:
        _distinct(a, b, c)
        return self.third(a, c).value_at(b)

    def c2(self, a: SurfacePoint, b: SurfacePoint, c: SurfacePoint) -> complex:
        _distinct(a, b, c)
        return (
            self.star_between(a, c)
            * self.h2(b)
            / (self.star_between(a, b) * self.star_between(b, c))
        )

    def bergmann_W(self, a: SurfacePoint, b: SurfacePoint) -> complex:
        """W(a, b)/(dτ_a dτ_b) = −ω(a)ᵀ Hess ln Θ★(A(a) − A(b)) ω(b)."""
        _distinct(a, b)
        v = self.theta_star(self.A(a) - self.A(b), order=2)
        if v.relative < settings.prime_form_floor:
            raise SingularPrimeForm("Prime form vanishes", details={"a": a.label(), "b": b.label()})
        return complex(-(self.omega(a) @ v.log_hess @ self.omega(b)))

    def d1(self, a: SurfacePoint, b: SurfacePoint) -> complex:
        return -self.bergmann_W(a, b)

    def d2(self, a: SurfacePoint, b: SurfacePoint) -> complex:
        _distinct(a, b)
        return self.h2(a) * self.h2(b) / self.star_between(a, b) ** 2


# ============================================================================
# ERNST-CURVE QUOTIENTS
# ============================================================================


def ernst_points(curve: ErnstCurve) -> Tuple[SurfacePoint, SurfacePoint, SurfacePoint, SurfacePoint]:
    """(ξ, ξ̄, ∞⁺, ∞⁻)."""
    return curve.xi_point, curve.xibar_point, curve.infinity(1), curve.infinity(-1)


def q_factor(kc: KernelContext) -> complex:
    """Q = Θ(u⁻)Θ(v⁻)/(Θ(0)Θ(w)) with zero characteristic."""
    xi, xibar, inf_p, inf_m = ernst_points(kc.curve)
    ctx = kc.ctx
    u_m = kc.A(inf_m) - kc.A(xi)
    w = kc.A(xibar) - kc.A(xi)
    v_m = u_m - w
    zero = np.zeros(kc.genus, dtype=complex)
    return ctx.theta(u_m) * ctx.theta(v_m) / (ctx.theta(zero) * ctx.theta(w))


def q_factor_prime(kc: KernelContext) -> complex:
    """
    Q from prime forms: ½ E(ξ, ξ̄)E(∞⁻, ∞⁺)/(E(ξ, ∞⁻)E(ξ̄, ∞⁺)).

    Equal to ``q_factor`` up to sign.
    """
    xi, xibar, inf_p, inf_m = ernst_points(kc.curve)
    return (
        0.5
        * kc.star_between(xi, xibar)
        * kc.star_between(inf_m, inf_p)
        / (kc.star_between(xi, inf_m) * kc.star_between(xibar, inf_p))
    )


def strange_quotient(kc: KernelContext) -> complex:
    """E(ξ, ∞⁺)E(ξ̄, ∞⁻)/(E(ξ̄, ∞⁺)E(ξ, ∞⁻)); equals exp ∫_{∞⁻}^{∞⁺} ω_{ξ,ξ̄} = −1."""
    xi, xibar, inf_p, inf_m = ernst_points(kc.curve)
    return (
        kc.star_between(xi, inf_p)
        * kc.star_between(xibar, inf_m)
        / (kc.star_between(xibar, inf_p) * kc.star_between(xi, inf_m))
    )


def root_ratio_check(
    kc: KernelContext,
    points: Iterable[SurfacePoint],
    m: int,
    n: int,
) -> float:
    """
    Relative spread of C²(a) over ``points``.

    C²(a) = E(a, P_m)²(λ_a − λ_n)/(E(a, P_n)²(λ_a − λ_m)) is independent of a
    when P_m and P_n are the two endpoints of one cut.
    """
    if kc.curve.cut_of(m) != kc.curve.cut_of(n):
        raise ValueError(f"branch points {m} and {n} are not on the same cut")
    pm, pn = kc.curve.branch_point(m), kc.curve.branch_point(n)
    lam_m, lam_n = kc.curve.branch_points[m], kc.curve.branch_points[n]
    values: List[complex] = []
    for a in points:
        ratio = (kc.star_between(a, pm) / kc.star_between(a, pn)) ** 2
        values.append(ratio * kc.h2(pn) / kc.h2(pm) * (a.lam - lam_n) / (a.lam - lam_m))
    values_arr = np.array(values)
    center = np.mean(values_arr)
    return float(np.max(np.abs(values_arr - center)) / abs(center))
