"""
Ernst Potential

ℰ(ξ, ξ̄) = Θ_pq(∫_ξ^{∞⁺})/Θ_pq(∫_ξ^{∞⁻}) on the curve with branch points ξ, ξ̄
and the fixed pairs (E_m, F_m). The curve moves with ξ, so every ξ gets its own
periods, theta context and kernel context, kept in a per-solution LRU cache.

Notation (all Abel values from ξ along the canonical lifts):
    u± = ∫_ξ^{∞±},   w = ∫_ξ^{ξ̄} = −½(1, …, 1),   v± = u± − w = ∫_ξ̄^{∞±}
"""

import time
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional, Sequence, Tuple

import numpy as np

from ernst_theta.config import settings
from ernst_theta.exceptions import RealityViolation, SignCalibrationFailed, SingularRegion, ThetaDivisorHit
from ernst_theta.kernels import KernelContext
from ernst_theta.logger import get_logger
from ernst_theta.surface.curve import ErnstCurve, SurfacePoint, new_ernst_curve
from ernst_theta.surface.periods import PeriodData, compute_periods
from ernst_theta.theta.characteristics import Characteristics
from ernst_theta.theta.evaluator import ThetaContext, ThetaValue

logger = get_logger(__name__)


# ============================================================================
# DOMAIN TYPES
# ============================================================================


@dataclass(frozen=True)
class ErnstValue:
    """
    ℰ at one ξ with diagnostics.

    ``conj_sheet`` is Θ_pq(v⁺)/Θ_pq(v⁻), the function the theta identities pair
    with ℰ; ``reality_defect`` measures how far it is from conj ℰ.
    """

    xi: complex
    E: complex
    conj_sheet: complex
    reality_defect: float
    divisor_proximity: float

    @property
    def E_conj(self) -> complex:
        return complex(np.conj(self.E))

    @property
    def e2U(self) -> float:
        return float(self.E.real)


@dataclass(frozen=True)
class SignGates:
    """Signs of the c2 quotients in the derivative formulas, fixed at a probe ξ."""

    xi: int = 1
    xibar: int = 1
    laplace: int = 1
    probe: Optional[complex] = None
    errors: Tuple[float, float, float] = (0.0, 0.0, 0.0)


@dataclass
class ErnstState:
    """Everything that depends on one value of ξ."""

    xi: complex
    curve: ErnstCurve
    periods: PeriodData
    kernels: KernelContext
    chars: Characteristics
    u_plus: np.ndarray
    u_minus: np.ndarray
    w: np.ndarray
    _cache: dict = field(default_factory=dict, repr=False)

    @property
    def ctx(self) -> ThetaContext:
        return self.kernels.ctx

    @property
    def v_plus(self) -> np.ndarray:
        return self.u_plus - self.w

    @property
    def v_minus(self) -> np.ndarray:
        return self.u_minus - self.w

    @property
    def rho(self) -> float:
        return self.curve.rho

    def points(self) -> Tuple[SurfacePoint, SurfacePoint, SurfacePoint, SurfacePoint]:
        """(ξ, ξ̄, ∞⁺, ∞⁻)."""
        c = self.curve
        return c.xi_point, c.xibar_point, c.infinity(1), c.infinity(-1)

    def pq(self, z: np.ndarray, order: int = 1) -> ThetaValue:
        """Θ_pq at z (cached per argument)."""
        key = ("pq", order, tuple(np.round(np.asarray(z, dtype=complex), 15)))
        value = self._cache.get(key)
        if value is None:
            value = self.ctx.evaluate(z, self.chars, order=order)
            self._cache[key] = value
        return value

    def zero_char(self, z: np.ndarray, order: int = 1) -> ThetaValue:
        return self.ctx.evaluate(z, Characteristics.zero(self.curve.genus), order=order)

    def D(self, point: SurfacePoint, z: np.ndarray, zero_chars: bool = False) -> complex:
        """D_point Θ(z) = ∇Θ(z)·ω(point)/dτ."""
        grad = (self.zero_char(z) if zero_chars else self.pq(z)).grad
        return complex(grad @ self.kernels.omega(point))

    def check_regular(self) -> None:
        """
        Raises:
            ThetaDivisorHit: If Θ_pq(u⁻) vanishes
            SingularRegion: If Θ_pq(0) vanishes
        """
        denominator = self.pq(self.u_minus)
        if denominator.relative < settings.divisor_guard:
            raise ThetaDivisorHit(
                "Theta_pq(u-) vanishes",
                details={"xi": self.xi, "relative": denominator.relative},
            )
        origin = self.pq(np.zeros(self.curve.genus, dtype=complex))
        if origin.relative < settings.divisor_guard:
            raise SingularRegion(
                "Theta_pq(0) vanishes",
                details={"xi": self.xi, "relative": origin.relative},
            )


# ============================================================================
# SOLUTION
# ============================================================================


def default_probe(pairs: Sequence[Tuple[complex, complex]]) -> complex:
    points = [complex(x) for pair in pairs for x in pair]
    scale = 1.0 + max(abs(x) for x in points)
    zeta = max(x.real for x in points) + 0.5 * scale
    return complex(zeta, -0.5 * scale)


class ErnstSolution:
    """
    Theta-functional Ernst potential for fixed pairs and characteristics.

    Args:
        pairs: g pairs (E_m, F_m), each conjugate or real
        chars: Characteristics [p, q]
        quad_order: Starting quadrature order for the periods
        probe_xi: Point where the reality condition and the derivative signs are fixed
        cache_size: Number of ξ values whose state is kept
        corrupt_b: Perturbation added to every entry of B (negative control only)
    """

    def __init__(
        self,
        pairs: Sequence[Tuple[complex, complex]],
        chars: Characteristics,
        quad_order: Optional[int] = None,
        probe_xi: Optional[complex] = None,
        cache_size: int = 256,
        corrupt_b: float = 0.0,
    ):
        self.pairs = tuple((complex(e), complex(f)) for e, f in pairs)
        self.genus = len(self.pairs)
        if chars.genus != self.genus:
            raise ValueError(f"characteristics of genus {chars.genus} for {self.genus} pairs")
        self.chars = chars
        self.quad_order = quad_order
        self.probe_xi = complex(probe_xi) if probe_xi is not None else default_probe(self.pairs)
        self.corrupt_b = corrupt_b
        self._state = lru_cache(maxsize=cache_size)(self._build_state)
        self._signs: Optional[SignGates] = None

    @property
    def is_flat(self) -> bool:
        return self.chars.is_zero

    # ------------------------------------------------------------------

    def _build_state(self, xi: complex) -> ErnstState:
        curve = new_ernst_curve(xi, self.pairs)
        periods = compute_periods(curve, self.quad_order)
        if self.corrupt_b:
            periods = corrupted(periods, self.corrupt_b)
        kernels = KernelContext(curve, periods)
        xi_p, xibar_p = curve.xi_point, curve.xibar_point
        u_plus = kernels.A(curve.infinity(1)) - kernels.A(xi_p)
        u_minus = kernels.A(curve.infinity(-1)) - kernels.A(xi_p)
        w = kernels.A(xibar_p) - kernels.A(xi_p)
        return ErnstState(complex(xi), curve, periods, kernels, self.chars, u_plus, u_minus, w)

    def state(self, xi: complex) -> ErnstState:
        return self._state(complex(xi))

    # ------------------------------------------------------------------
    # signs of the derivative formulas
    # ------------------------------------------------------------------

    @property
    def signs(self) -> SignGates:
        if self._signs is None:
            self._signs = calibrate_signs(self, self.probe_xi)
        return self._signs

    def __repr__(self) -> str:
        return f"ErnstSolution(genus={self.genus}, chars={self.chars.label()})"


def corrupted(periods: PeriodData, amount: float) -> PeriodData:
    """Periods whose B is shifted by ``amount`` in every entry; Abel values are kept."""
    g = periods.genus
    return periods.with_B(periods.B + amount * np.ones((g, g)))


def reality_invariant(B: np.ndarray, chars: Characteristics) -> float:
    """
    Distance of [p, q] from the characteristics whose ℰ is real-compatible.

    Conjugation reverses every a-cycle, so conj B = −B + H with H an integer
    matrix, and conj ℰ is the sheet conjugate built from
    [p̄, −q̄ − Hp̄ − h/2], h = diag H. That characteristic is equivalent to
    [p, q] when p is real and 2 Re(Bp + q) + h/2 is an integer vector; the
    imaginary part of Bp + q is free.

    Returns:
        float: Largest of |Im p|, the distance of 2 Re B from H and the
        distance of 2 Re(Bp + q) + h/2 from the integers
    """
    B = np.asarray(B, dtype=complex)
    H = np.rint(2.0 * B.real)
    p, q = chars.p_vec, chars.q_vec
    lattice = 2.0 * (B @ p + q).real + 0.5 * np.diag(H)
    parts = (
        np.abs(p.imag),
        np.abs(2.0 * B.real - H).ravel(),
        np.abs(lattice - np.rint(lattice)),
    )
    return float(max(np.max(part, initial=0.0) for part in parts))


def admissible_characteristics(
    curve: ErnstCurve,
    shift: Sequence[float],
    p: Optional[Sequence[float]] = None,
) -> Characteristics:
    """
    Characteristics with ``reality_invariant`` zero.

    q = −Bp − h/4 + i·shift with h = diag(round(2 Re B)); ``shift`` is a free
    real vector and p defaults to zero. Non-zero p should be half-integer:
    other values leave a constant phase between conj ℰ and ℰ̄ wherever the
    path to ∞ passes a cut on the other side.
    """
    B = compute_periods(curve).B
    h = np.diag(np.rint(2.0 * B.real))
    p_vec = np.zeros(curve.genus) if p is None else np.asarray(p, dtype=float).reshape(curve.genus)
    shift = np.asarray(shift, dtype=float).reshape(curve.genus)
    q = -(B.real @ p_vec) - h / 4.0 + 1j * shift
    return Characteristics.of(p_vec, q)


def check_reality(sol: ErnstSolution, xi: Optional[complex] = None) -> float:
    """
    Reality of ``sol`` at ``xi`` (the probe point by default).

    The characteristic-level invariant is validated first, then the defect
    |conj ℰ − ℰ̄|/|ℰ| of the evaluated potential.

    Returns:
        float: The reality defect

    Raises:
        RealityViolation: If the invariant or the defect exceeds ``settings.reality_tol``
    """
    xi = sol.probe_xi if xi is None else xi
    invariant = reality_invariant(sol.state(xi).periods.B, sol.chars)
    if invariant > settings.reality_tol:
        raise RealityViolation(
            "Characteristics violate the reality condition",
            details={"xi": complex(xi), "invariant": invariant, "chars": sol.chars.label()},
        )
    value = evaluate(sol, xi)
    if value.reality_defect > settings.reality_tol:
        raise RealityViolation(
            "Characteristics violate the reality condition",
            details={"xi": complex(xi), "defect": value.reality_defect},
        )
    return value.reality_defect

# ============================================================================
# OPERATIONS
# ============================================================================


def evaluate(sol: ErnstSolution, xi: complex) -> ErnstValue:
    """
    ℰ = Θ_pq(u⁺)/Θ_pq(u⁻).

    Raises:
        ThetaDivisorHit: If Θ_pq(u⁻) vanishes
        SingularRegion: If Θ_pq(0) vanishes
    """
    st = sol.state(xi)
    st.check_regular()
    denominator = st.pq(st.u_minus)
    E = st.pq(st.u_plus).value / denominator.value
    conj_sheet = st.pq(st.v_plus).value / st.pq(st.v_minus).value
    defect = abs(np.conj(E) - conj_sheet) / max(abs(E), 1e-300)
    return ErnstValue(complex(xi), complex(E), complex(conj_sheet), float(defect), denominator.relative)


def _raw_d_xi(st: ErnstState) -> complex:
    xi_p, xibar_p, inf_p, inf_m = st.points()
    zero = np.zeros(st.curve.genus, dtype=complex)
    c2 = st.kernels.c2(inf_m, xi_p, inf_p)
    return 0.5 * c2 * st.pq(zero).value * st.D(xi_p, zero) / st.pq(st.u_minus).value ** 2


def _raw_d_xibar(st: ErnstState) -> complex:
    xi_p, xibar_p, inf_p, inf_m = st.points()
    c2 = st.kernels.c2(inf_m, xibar_p, inf_p)
    return 0.5 * c2 * st.pq(-st.w).value * st.D(xibar_p, st.w) / st.pq(st.u_minus).value ** 2


def _raw_laplace(st: ErnstState) -> complex:
    xi_p, xibar_p, inf_p, inf_m = st.points()
    zero = np.zeros(st.curve.genus, dtype=complex)
    c2_a = st.kernels.c2(inf_m, xi_p, inf_p)
    c2_b = st.kernels.c2(xi_p, xibar_p, inf_p)
    return (
        -2.0 * c2_a * c2_b
        * st.pq(st.v_minus).value / st.pq(st.u_minus).value ** 3
        * st.D(xibar_p, st.w) * st.D(xi_p, zero)
    )


def d_xi(sol: ErnstSolution, xi: complex) -> complex:
    """ℰ_ξ = (c2(∞⁻,ξ,∞⁺)/2)·Θ_pq(0)·D_ξΘ_pq(0)/Θ_pq²(u⁻)."""
    if sol.is_flat:
        return 0j
    st = sol.state(xi)
    st.check_regular()
    return sol.signs.xi * _raw_d_xi(st)


def d_xibar(sol: ErnstSolution, xi: complex) -> complex:
    """ℰ_ξ̄ = (c2(∞⁻,ξ̄,∞⁺)/2)·Θ_pq(∫_ξ̄^ξ)·D_ξ̄Θ_pq(∫_ξ^ξ̄)/Θ_pq²(u⁻)."""
    if sol.is_flat:
        return 0j
    st = sol.state(xi)
    st.check_regular()
    return sol.signs.xibar * _raw_d_xibar(st)


def laplace(sol: ErnstSolution, xi: complex) -> complex:
    """Δℰ with Δ = ∂²_ρρ + ρ⁻¹∂_ρ + ∂²_ζζ."""
    if sol.is_flat:
        return 0j
    st = sol.state(xi)
    st.check_regular()
    return sol.signs.laplace * _raw_laplace(st)


def ernst_residual(sol: ErnstSolution, xi: complex) -> float:
    """
    Normalized residual of (ℰ + conj ℰ)Δℰ/4 = 2ℰ_ξℰ_ξ̄.

    Characteristics outside the reality condition leave a residual of the
    order of their reality defect.
    """
    value = evaluate(sol, xi)
    lhs = (value.E + value.E_conj) * laplace(sol, xi) / 4.0
    rhs = 2.0 * d_xi(sol, xi) * d_xibar(sol, xi)
    scale = max(abs(lhs), abs(rhs))
    if scale < 1e-300:
        return 0.0
    return float(abs(lhs - rhs) / scale)


# ============================================================================
# FINITE DIFFERENCES AND SIGN CALIBRATION
# ============================================================================


def _shifted(xi: complex, d_zeta: float, d_rho: float) -> complex:
    # ξ = ζ − iρ
    return complex(xi.real + d_zeta, xi.imag - d_rho)


def fd_wirtinger(f, xi: complex, step: float) -> Tuple[complex, complex]:
    """
    Central-difference (∂_ξ f, ∂_ξ̄ f) of a function of ξ.

    ∂_ξ = ½(∂_ζ + i∂_ρ) and ∂_ξ̄ = ½(∂_ζ − i∂_ρ) for ξ = ζ − iρ.
    """
    xi = complex(xi)
    f_zeta = (f(_shifted(xi, step, 0.0)) - f(_shifted(xi, -step, 0.0))) / (2.0 * step)
    f_rho = (f(_shifted(xi, 0.0, step)) - f(_shifted(xi, 0.0, -step))) / (2.0 * step)
    return 0.5 * (f_zeta + 1j * f_rho), 0.5 * (f_zeta - 1j * f_rho)


def fd_laplacian(f, xi: complex, step: float) -> complex:
    """Five-point ∂²_ρρ f + ρ⁻¹∂_ρ f + ∂²_ζζ f."""
    xi = complex(xi)
    rho = -xi.imag
    center = f(xi)
    zp, zm = f(_shifted(xi, step, 0.0)), f(_shifted(xi, -step, 0.0))
    rp, rm = f(_shifted(xi, 0.0, step)), f(_shifted(xi, 0.0, -step))
    return (zp + zm + rp + rm - 4.0 * center) / step**2 + (rp - rm) / (2.0 * step * rho)


def fd_step(xi: complex) -> float:
    return settings.fd_step * max(abs(complex(xi)), 1.0)


def _pick_sign(raw: complex, reference: complex) -> Tuple[int, float]:
    scale = max(abs(raw), abs(reference), 1e-300)
    plus, minus = abs(reference - raw) / scale, abs(reference + raw) / scale
    return (1, plus) if plus <= minus else (-1, minus)


def calibrate_signs(sol: ErnstSolution, probe: complex) -> SignGates:
    """
    Fix the signs of ℰ_ξ, ℰ_ξ̄ and Δℰ against finite differences at the probe.

    The signs are constant on a connected regular region, so one probe per
    solution suffices.

    Raises:
        SignCalibrationFailed: If neither sign reproduces ℰ_ξ or ℰ_ξ̄ within the
            derivative tolerance
    """
    started = time.perf_counter()
    if sol.is_flat:
        return SignGates(probe=probe)

    st = sol.state(probe)
    st.check_regular()

    def potential(x):
        return evaluate(sol, x).E

    h = fd_step(probe)
    fd_xi, fd_xibar = fd_wirtinger(potential, probe, h)
    fd_lap = fd_laplacian(potential, probe, 100.0 * h)

    s_xi, e_xi = _pick_sign(_raw_d_xi(st), fd_xi)
    s_xibar, e_xibar = _pick_sign(_raw_d_xibar(st), fd_xibar)
    s_lap, e_lap = _pick_sign(_raw_laplace(st), fd_lap)

    gates = SignGates(s_xi, s_xibar, s_lap, probe, (e_xi, e_xibar, e_lap))
    tolerance = settings.derivative_tolerance(sol.genus)
    if max(e_xi, e_xibar) >= tolerance:
        raise SignCalibrationFailed(
            "Derivative formulas disagree with finite differences",
            details={"xi": probe, "errors": [e_xi, e_xibar, e_lap], "tolerance": tolerance},
        )
    logger.info(
        "Derivative signs calibrated",
        extra={
            "probe": probe,
            "signs": [s_xi, s_xibar, s_lap],
            "errors": [e_xi, e_xibar, e_lap],
            "duration_ms": (time.perf_counter() - started) * 1000,
        },
    )
    return gates


def convergence_order(f, exact: complex, h0: float, levels: int = 4) -> float:
    """
    Observed order of a difference approximation on a step-halving ladder.

    ``f(h)`` returns the approximation at step h; the order is the mean slope
    of log|error| against log h.
    """
    steps = np.array([h0 / 2**i for i in range(levels)])
    errors = np.array([abs(f(h) - exact) for h in steps])
    errors = np.maximum(errors, 1e-300)
    slope = np.polyfit(np.log(steps), np.log(errors), 1)[0]
    return float(slope)
