"""
Periods, Abel Map and Meromorphic Differentials

The holomorphic basis λ^k dλ/μ (k = 0..g-1) is normalized on the a-cycles;
b-periods, Abel integrals and third-kind differentials are computed by
Gauss-Legendre quadrature on cut banks and on cut-avoiding paths.

Differentials are represented per dλ as R(λ) + S(λ)/μ with R a sum of simple
poles and S a polynomial plus simple poles. Values at special points use the
local parameters τ = √(λ − λ_m) (branch points) and τ = 1/λ (infinity).
"""

import logging
import time
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np
from tenacity import (
    Retrying,
    before_sleep_log,
    retry_if_exception_type,
    stop_after_attempt,
)

from ernst_theta.config import settings
from ernst_theta.exceptions import (
    CoincidingPoints,
    CoincidingPoles,
    HomologyMismatch,
    IllConditioned,
    NoConvergence,
    PathThroughBranchPoint,
)
from ernst_theta.logger import get_logger, log_period_computation
from ernst_theta.surface.curve import GeneralCurve, HomologySpec, SurfacePoint
from ernst_theta.surface.paths import Path, PathPlanner, cut_rule, gauss_legendre, path_rule

logger = get_logger(__name__)

# ξ-derivative of ∫_ξ^{∞±} is ∓¼ c1(∞⁻, ξ, ∞⁺) ω(ξ)/dτ
C10_SIGN = -1


# ============================================================================
# DOMAIN TYPES
# ============================================================================


@dataclass(frozen=True)
class AbelValue:
    """Vector ∫_from^to ω together with the paths that produced it."""

    value: np.ndarray
    path: str

    def __array__(self, dtype=None):
        return np.asarray(self.value, dtype=dtype)


@dataclass
class PeriodData:
    """
    Normalized differentials and period matrices of one curve.

    ``coeff[α, k]`` expresses ω_α = Σ_k coeff[α, k] λ^k dλ/μ; ``A_mat[j, k]`` is
    the a_j-period of λ^k dλ/μ.
    """

    curve: GeneralCurve
    coeff: np.ndarray
    A_mat: np.ndarray
    B: np.ndarray
    B_raw: np.ndarray
    cond: float
    quad_order: int
    homology: HomologySpec
    c10_sign: int = C10_SIGN
    _abel_cache: Dict[SurfacePoint, np.ndarray] = field(default_factory=dict, repr=False)
    _planner: Optional[PathPlanner] = field(default=None, repr=False)

    @property
    def genus(self) -> int:
        return self.curve.genus

    @property
    def planner(self) -> PathPlanner:
        if self._planner is None:
            self._planner = PathPlanner(self.curve)
        return self._planner

    def basis_values(self, lam: np.ndarray) -> np.ndarray:
        """Matrix [α, node] of Σ_k coeff[α,k] λ^k at the nodes (numerators of ω_α)."""
        powers = np.vander(np.asarray(lam, dtype=complex), self.genus, increasing=True)
        return self.coeff @ powers.T

    def integrate_holomorphic(self, path: Path) -> np.ndarray:
        """∫ ω along a sheet-+ path."""
        lam, weights = path_rule(path, self.quad_order)
        if lam.size == 0:
            return np.zeros(self.genus, dtype=complex)
        return self.basis_values(lam) @ (weights / self.curve.mu_plus(lam))

    def with_B(self, B: np.ndarray) -> "PeriodData":
        """Copy with a replaced period matrix (used for negative controls)."""
        return PeriodData(
            self.curve, self.coeff, self.A_mat, np.asarray(B, dtype=complex), self.B_raw,
            self.cond, self.quad_order, self.homology, self.c10_sign,
        )


# ============================================================================
# PERIOD COMPUTATION
# ============================================================================


def _a_cycle_basis(curve: GeneralCurve, j: int, order: int, numerator: Callable) -> np.ndarray:
    """∮_{a_j} numerator(λ)/μ dλ as twice the right-bank integral of cut j."""
    lam, own, weights = cut_rule(curve.cuts[j], order, side=-1)
    values = numerator(lam) / (own * curve.mu_plus(lam, skip=j))
    return 2.0 * (values @ weights)


def _raw_periods(curve: GeneralCurve, order: int, b_paths: List[Path]):
    g = curve.genus
    A_mat = np.zeros((g, g), dtype=complex)
    for j in range(1, g + 1):
        A_mat[j - 1] = _a_cycle_basis(
            curve, j, order, lambda lam: np.vander(lam, g, increasing=True).T
        )
    cond = float(np.linalg.cond(A_mat))
    if not np.isfinite(cond) or cond > settings.ill_conditioned:
        raise IllConditioned(
            "a-period matrix is ill conditioned",
            details={"cond": cond, "threshold": settings.ill_conditioned},
        )
    coeff = np.linalg.solve(A_mat, np.eye(g, dtype=complex)).T

    B_raw = np.zeros((g, g), dtype=complex)
    for alpha, path in enumerate(b_paths, start=1):
        lam, weights = path_rule(path, order)
        powers = np.vander(lam, g, increasing=True)
        integrals = (powers.T * (weights / curve.mu_plus(lam))).sum(axis=1)
        B_raw[alpha - 1] = 2.0 * (coeff @ integrals)
    return A_mat, coeff, B_raw, cond


def plan_b_paths(curve: GeneralCurve, planner: PathPlanner) -> List[Path]:
    """Sheet-+ legs of b_1..b_g: base point to the first endpoint of each cut."""
    return [planner.plan(curve.base_point, curve.homology.b_target(alpha)) for alpha in range(1, curve.genus + 1)]


def check_intersections(homology: HomologySpec, b_paths: List[Path], radius: float) -> np.ndarray:
    """
    Count a_α∘b_β on the realized b-paths and require the identity.

    Raises:
        HomologyMismatch: If a path meets a loop other than its own or the
            wrong number of times
    """
    matrix = homology.intersection_matrix([path.vertices for path in b_paths], radius)
    if not np.array_equal(matrix, np.eye(homology.genus, dtype=int)):
        raise HomologyMismatch(
            "Realized b-paths do not give a canonical basis",
            details={"intersections": matrix.tolist(), "paths": [path.describe() for path in b_paths]},
        )
    return matrix


def _symmetrize(B_raw: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    skew = B_raw - B_raw.T
    correction = -np.triu(np.rint(skew.real), k=1)
    return B_raw + correction, correction.astype(int)


def compute_periods(curve: GeneralCurve, quad_order: Optional[int] = None) -> PeriodData:
    """
    Normalized differentials and the matrix of b-periods.

    The order doubles until B changes by less than ``convergence_tol`` between
    order n and 2n; each failed attempt is retried by tenacity.

    Args:
        curve: Curve with its cut system
        quad_order: Starting Gauss-Legendre order (>= 16)

    Returns:
        PeriodData: Periods at the accepted (finer) order

    Raises:
        IllConditioned: If cond(A_mat) exceeds the configured threshold
        NoConvergence: If the doubling gate never passes
        HomologyMismatch: If a_α∘b_β on the planned paths is not δ_αβ
    """
    order = quad_order or settings.quad_order
    if order < 16:
        raise ValueError(f"quad_order must be >= 16, got {order}")

    started = time.perf_counter()
    planner = PathPlanner(curve)
    b_paths = plan_b_paths(curve, planner)
    # a_α hugs cut α closer than the separation of any two cuts
    intersections = check_intersections(curve.homology, b_paths, 0.5 * curve.delta_sep)
    state = {"order": order}

    def attempt() -> PeriodData:
        n = state["order"]
        _, _, coarse, _ = _raw_periods(curve, n, b_paths)
        A_mat, coeff, B_raw, cond = _raw_periods(curve, 2 * n, b_paths)
        change = float(np.linalg.norm(B_raw - coarse) / np.linalg.norm(B_raw))
        if change > settings.convergence_tol:
            state["order"] = 2 * n
            raise NoConvergence(
                "b-periods not converged under order doubling",
                details={"order": n, "relative_change": change},
            )
        B, correction = _symmetrize(B_raw)
        homology = HomologySpec(curve.cuts, correction, intersections)
        return PeriodData(curve, coeff, A_mat, B, B_raw, cond, 2 * n, homology, _planner=planner)

    retrying = Retrying(
        stop=stop_after_attempt(settings.quad_max_doublings),
        retry=retry_if_exception_type(NoConvergence),
        before_sleep=before_sleep_log(logger, logging.WARNING),
        reraise=True,
    )
    periods = retrying(attempt)

    log_period_computation(
        curve.genus,
        periods.quad_order,
        periods.cond,
        (time.perf_counter() - started) * 1000,
        extra={"fingerprint": curve.fingerprint()},
    )
    return periods


# ============================================================================
# ABEL MAP
# ============================================================================


def _abel_from_base(periods: PeriodData, point: SurfacePoint) -> np.ndarray:
    cached = periods._abel_cache.get(point)
    if cached is not None:
        return cached

    curve = periods.curve
    if point.is_infinity:
        cut0 = curve.cuts[0]
        outward = -(cut0.end - cut0.start)
        path = periods.planner.plan_ray(curve.base_point, outward)
        value = point.sheet * periods.integrate_holomorphic(path)
    elif point.is_branch and point.branch_index == 0:
        value = np.zeros(periods.genus, dtype=complex)
    elif point.is_branch and point.branch_index == 1:
        # right bank of cut 0, equal to half its a-period: -(1/2)(1,...,1)
        lam, own, weights = cut_rule(curve.cuts[0], periods.quad_order, side=-1)
        value = periods.basis_values(lam) @ (weights / (own * curve.mu_plus(lam, skip=0)))
    else:
        path = periods.planner.plan(curve.base_point, point.lam)
        value = point.sheet * periods.integrate_holomorphic(path)

    periods._abel_cache[point] = value
    return value


def abel(
    curve: GeneralCurve,
    periods: PeriodData,
    start: SurfacePoint,
    end: SurfacePoint,
) -> AbelValue:
    """
    ∫_start^end ω along the canonical path class.

    Every value is A(end) − A(start) with A integrated from the base point (the
    first endpoint of cut 0) along planned cut-avoiding paths, so sums and
    differences of Abel values are consistent lifts.

    Raises:
        PathThroughBranchPoint: If a cut-avoiding path cannot be planned
    """
    if start == end:
        return AbelValue(np.zeros(curve.genus, dtype=complex), "empty")
    value = _abel_from_base(periods, end) - _abel_from_base(periods, start)
    return AbelValue(value, f"{start.label()}->{end.label()}")


def abel_vector(periods: PeriodData, point: SurfacePoint) -> np.ndarray:
    """A(point) from the base point."""
    return _abel_from_base(periods, point)


# ============================================================================
# NORMALIZED DIFFERENTIALS AT POINTS
# ============================================================================


def eval_normalized_diff(curve: GeneralCurve, periods: PeriodData, point: SurfacePoint) -> np.ndarray:
    """
    ω_α/dτ at a point in its local parameter.

    Branch point λ_m: 2 φ_α(λ_m)/√(Π_{n≠m}(λ_m − λ_n)); infinity on sheet s:
    −s times the λ^{g-1} coefficient; otherwise φ_α(λ)/μ.
    """
    g = curve.genus
    if point.is_infinity:
        return -point.sheet * periods.coeff[:, g - 1].astype(complex)
    numerators = periods.basis_values(np.array([point.lam]))[:, 0]
    if point.is_branch:
        return 2.0 * numerators / curve.sqrt_at_branch(point.branch_index)
    return numerators / curve.mu(point)


# ============================================================================
# THIRD KIND DIFFERENTIALS
# ============================================================================


def _same_point(a: SurfacePoint, c: SurfacePoint) -> bool:
    if a.is_infinity or c.is_infinity:
        return a.is_infinity and c.is_infinity and a.sheet == c.sheet
    if a.is_branch or c.is_branch:
        return a.branch_index == c.branch_index and a.branch_index is not None
    return abs(a.lam - c.lam) == 0 and a.sheet == c.sheet


@dataclass
class ThirdKind:
    """
    Normalized differential of the third kind ω_{a,c}.

    Residue +1 at ``a`` and −1 at ``c``, all a-periods zero. ``rational`` holds
    (residue, pole) pairs of R, ``simple`` holds (coefficient, pole) pairs of the
    pole part of S and ``poly`` the coefficients of λ^0..λ^g in S, holomorphic
    correction included.
    """

    curve: GeneralCurve
    periods: PeriodData
    a: SurfacePoint
    c: SurfacePoint
    rational: List[Tuple[complex, complex]]
    simple: List[Tuple[complex, complex]]
    poly: np.ndarray
    correction: np.ndarray

    # ------------------------------------------------------------------

    def _S(self, lam: np.ndarray) -> np.ndarray:
        lam = np.asarray(lam, dtype=complex)
        value = np.polynomial.polynomial.polyval(lam, self.poly)
        for coef, pole in self.simple:
            value = value + coef / (lam - pole)
        return value

    def _R(self, lam: np.ndarray) -> np.ndarray:
        lam = np.asarray(lam, dtype=complex)
        value = np.zeros_like(lam)
        for res, pole in self.rational:
            value = value + res / (lam - pole)
        return value

    def density(self, lam: np.ndarray, sheet: int) -> np.ndarray:
        """ω/dλ at λ on the given sheet (λ off the cuts)."""
        return self._R(lam) + sheet * self._S(lam) / self.curve.mu_plus(lam)

    def value_at(self, point: SurfacePoint) -> complex:
        """
        ω/dτ at a point in its local parameter.

        Raises:
            CoincidingPoints: If the point is one of the poles
        """
        if _same_point(point, self.a) or _same_point(point, self.c):
            raise CoincidingPoints(
                "Third-kind differential evaluated at its pole",
                details={"point": point.label()},
            )
        curve = self.curve
        if point.is_infinity:
            g = curve.genus
            s = point.sheet
            total_res = sum(res for res, _ in self.rational)
            lead = self.poly[g] if len(self.poly) > g else 0.0
            if abs(total_res + s * lead) > 1e-12 * (1.0 + abs(total_res)):
                raise CoincidingPoints("Differential has a pole at infinity", details={"sheet": s})
            first = sum(res * pole for res, pole in self.rational)
            sub = self.poly[g - 1] if len(self.poly) > g - 1 else 0.0
            shift = 0.5 * complex(np.sum(curve.branch_points))
            return complex(-first - s * (sub + shift * lead))
        if point.is_branch:
            lam = point.lam
            return complex(2.0 * self._S(np.array([lam]))[0] / curve.sqrt_at_branch(point.branch_index))
        return complex(self.density(np.array([point.lam]), point.sheet)[0])

    def integrate(self, path: Path, sheet: int, order: Optional[int] = None) -> complex:
        """∫ ω along a path on one sheet."""
        lam, weights = path_rule(path, order or self.periods.quad_order)
        return complex(self.density(lam, sheet) @ weights)

    def integral_from_base(self, point: SurfacePoint) -> complex:
        """∫ ω from the base point to ``point`` along the Abel-map path."""
        planner = self.periods.planner
        curve = self.curve
        if point.is_branch and point.branch_index == 0:
            return 0j
        if point.is_branch:
            return self.integrate(planner.plan(curve.base_point, point.lam), 1)
        return self.integrate(planner.plan(curve.base_point, point.lam), point.sheet)

    def local_contour(self, point: SurfacePoint, radius: float, nodes: int = 256) -> complex:
        """
        Counter-clockwise ∮ ω on the circle |τ| = radius around a point.

        The local parameter is λ − λ_x at a finite point, √(λ − λ_m) at a
        branch point and 1/λ at infinity.
        """
        theta = 2.0 * np.pi * np.arange(nodes) / nodes
        tau = radius * np.exp(1j * theta)
        dtau = 1j * tau * (2.0 * np.pi / nodes)
        curve = self.curve
        if point.is_infinity:
            lam = 1.0 / tau
            values = self.density(lam, point.sheet) * (-1.0 / tau**2)
        elif point.is_branch:
            m = point.branch_index
            lam = point.lam + tau**2
            others = np.delete(curve.branch_points, m)
            ratio = np.prod((lam[:, None] - others) / (point.lam - others), axis=1)
            mu = tau * curve.sqrt_at_branch(m) * np.sqrt(ratio)
            values = (self._R(lam) + self._S(lam) / mu) * 2.0 * tau
        else:
            lam = point.lam + tau
            values = self.density(lam, point.sheet)
        return complex(values @ dtau)

    def residue(self, point: SurfacePoint, radius: Optional[float] = None) -> complex:
        """Residue at a point from a small local contour."""
        if radius is None:
            if point.is_infinity:
                radius = 0.1 / (1.0 + float(np.max(np.abs(self.curve.branch_points))))
            else:
                radius = 0.1 * self.curve.min_gap
                if point.is_branch:
                    radius = np.sqrt(radius)
        return self.local_contour(point, radius) / (2j * np.pi)

    def a_periods(self) -> np.ndarray:
        """∮_{a_j} ω for j = 1..g."""
        return _third_kind_a_periods(self.curve, self.periods, self.rational, self._S)

    def _tau_values(self, m: int, tau: np.ndarray) -> np.ndarray:
        """ω/dτ along values of the local parameter τ = √(λ − λ_m)."""
        curve = self.curve
        lam_m = curve.branch_points[m]
        lam = lam_m + tau**2
        others = np.delete(curve.branch_points, m)
        ratio = np.prod((lam[:, None] - others) / (lam_m - others), axis=1)
        mu = tau * curve.sqrt_at_branch(m) * np.sqrt(ratio)
        return (self._R(lam) + self._S(lam) / mu) * 2.0 * tau

    def around_branch_between_infinities(self, m: int = 0, radius: Optional[float] = None) -> complex:
        """
        ∫ from ∞⁻ to ∞⁺ passing once around branch point m.

        In along a ray on sheet −, half a counter-clockwise turn of
        τ = √(λ − λ_m), out along the same ray on sheet +.
        """
        curve = self.curve
        cut = curve.cuts[curve.cut_of(m)]
        lam_m = curve.branch_points[m]
        away = cut.start - cut.end if m % 2 == 0 else cut.end - cut.start
        r = radius if radius is not None else 0.05 * min(curve.min_gap, cut.length)
        start = lam_m + r * away / abs(away)
        direction = away / abs(away)
        planner = self.periods.planner
        if not planner.segment_clear(start, start + planner.far * direction, 0.5 * r):
            raise PathThroughBranchPoint(
                "Outward ray meets another cut", details={"branch_index": m}
            )
        ray = Path((start,), ray=direction)
        inward = -self.integrate(ray, -1)
        outward = self.integrate(ray, 1)

        # the root of τ² = start − λ_m that lies on sheet −
        phi = np.angle(start - lam_m) / 2.0
        mu_minus = -complex(curve.mu_plus(np.array([start]))[0])
        candidate = np.sqrt(r) * np.exp(1j * phi) * curve.sqrt_at_branch(m)
        if abs(candidate - mu_minus) > abs(candidate + mu_minus):
            phi += np.pi

        t, w = gauss_legendre(self.periods.quad_order)
        tau = np.sqrt(r) * np.exp(1j * (phi + 0.5 * np.pi + t))
        turn = complex(self._tau_values(m, tau) @ (1j * tau * w))
        return inward + turn + outward


def _third_kind_a_periods(curve, periods, rational, S) -> np.ndarray:
    g = curve.genus
    result = np.zeros(g, dtype=complex)
    tol = curve.delta_sep
    for j in range(1, g + 1):
        cut = curve.cuts[j]
        total = _a_cycle_basis(curve, j, periods.quad_order, lambda lam: S(lam))
        for res, pole in rational:
            if min(abs(pole - cut.start), abs(pole - cut.end)) <= tol:
                total += 2j * np.pi * res
        result[j - 1] = total
    return result


def _omega_parts(curve: GeneralCurve, x: SurfacePoint, sign: float):
    """(rational, simple, poly) of sign·Ω_x with residue sign·1 at x."""
    g = curve.genus
    poly = np.zeros(g + 1, dtype=complex)
    if x.is_infinity:
        poly[g] = -0.5 * x.sheet * sign
        return [], [], poly
    if x.is_branch:
        return [(0.5 * sign, x.lam)], [], poly
    return [(0.5 * sign, x.lam)], [(0.5 * sign * curve.mu(x), x.lam)], poly


def third_kind(curve: GeneralCurve, periods: PeriodData, a: SurfacePoint, c: SurfacePoint) -> ThirdKind:
    """
    Normalized third-kind differential with residue +1 at a and −1 at c.

    Ω_x = (μ + μ(x))/(2(λ − λ(x))) dλ/μ; ω_{a,c} = Ω_a − Ω_c + Σ γ_k λ^k dλ/μ
    with γ solving the zero-a-period system.

    Raises:
        CoincidingPoles: If a and c are the same point
    """
    if _same_point(a, c):
        raise CoincidingPoles("Third-kind poles coincide", details={"point": a.label()})

    ra, sa, pa = _omega_parts(curve, a, 1.0)
    rc, sc, pc = _omega_parts(curve, c, -1.0)
    rational, simple, poly = ra + rc, sa + sc, pa + pc

    def S(lam):
        value = np.polynomial.polynomial.polyval(np.asarray(lam, dtype=complex), poly)
        for coef, pole in simple:
            value = value + coef / (lam - pole)
        return value

    periods_raw = _third_kind_a_periods(curve, periods, rational, S)
    correction = np.linalg.solve(periods.A_mat, -periods_raw)
    poly_total = poly.copy()
    poly_total[: curve.genus] += correction
    return ThirdKind(curve, periods, a, c, rational, simple, poly_total, correction)


# ============================================================================
# RAUCH VARIATIONAL FORMULAS
# ============================================================================


def _ellipse_a_period(curve: GeneralCurve, j: int, density: Callable, nodes: int) -> complex:
    cut = curve.cuts[j]
    others = [cut.distance_to(c) for i, c in enumerate(curve.cuts) if i != j]
    reach = 0.3 * min(others + [cut.length])
    eta = np.arcsinh(reach / abs(cut.half))
    theta = 2.0 * np.pi * np.arange(nodes) / nodes
    lam = cut.mid + cut.half * np.cos(theta - 1j * eta)
    dlam = -cut.half * np.sin(theta - 1j * eta) * (2.0 * np.pi / nodes)
    return complex(density(lam) @ dlam)


@dataclass
class RauchDerivatives:
    """
    Derivatives with respect to the branch point λ_m.

    ``dB`` is πi f fᵀ with f = ω(λ_m)/dτ; ``domega(point)`` gives dω_α/dλ_m at
    fixed λ(point); ``dabel(start, end)`` the derivative of ∫_start^end ω.
    """

    curve: GeneralCurve
    periods: PeriodData
    m: int
    f: np.ndarray
    dB: np.ndarray
    second_kind_a_periods: np.ndarray

    def second_kind(self, point: SurfacePoint) -> complex:
        """W(x, λ_m)/(dλ_x dτ_m) from the normalized second-kind differential."""
        curve = self.curve
        if point.is_infinity or point.is_branch:
            raise ValueError("second_kind is evaluated at generic finite points")
        lam_m = curve.branch_points[self.m]
        nu = 0.5 * curve.sqrt_at_branch(self.m) / ((point.lam - lam_m) * curve.mu(point))
        omega = eval_normalized_diff(curve, self.periods, point)
        return complex(nu - self.second_kind_a_periods @ omega)

    def domega(self, point: SurfacePoint) -> np.ndarray:
        return 0.5 * self.f * self.second_kind(point)

    def dabel(self, start: SurfacePoint, end: SurfacePoint) -> np.ndarray:
        """
        Derivative of ∫_start^end ω in λ_m.

        With the moving branch point as the start the integral is half of
        ∫_{J end}^{end}, which gives the factor ¼ instead of ½.
        """
        curve, periods = self.curve, self.periods
        moving = curve.branch_point(self.m)
        if start.is_branch and start.branch_index == self.m:
            omega = third_kind(curve, periods, end, end.involution())
            return 0.25 * self.f * omega.value_at(moving)
        if end.is_branch and end.branch_index == self.m:
            return -self.dabel(end, start)
        omega = third_kind(curve, periods, end, start)
        return 0.5 * self.f * omega.value_at(moving)


def rauch_derivatives(curve: GeneralCurve, periods: PeriodData, m: int) -> RauchDerivatives:
    """
    Rauch variational data for branch point m.

    Returns:
        RauchDerivatives: dB/dλ_m, dω/dλ_m evaluator and Abel-integral derivatives
    """
    point = curve.branch_point(m)
    f = eval_normalized_diff(curve, periods, point)
    dB = np.pi * 1j * np.outer(f, f)

    lam_m = curve.branch_points[m]
    scale = 0.5 * curve.sqrt_at_branch(m)

    def density(lam):
        return scale / ((lam - lam_m) * curve.mu_plus(lam))

    nodes = max(8 * periods.quad_order, 512)
    a_per = np.array(
        [_ellipse_a_period(curve, j, density, nodes) for j in range(1, curve.genus + 1)]
    )
    return RauchDerivatives(curve, periods, m, f, dB, a_per)
