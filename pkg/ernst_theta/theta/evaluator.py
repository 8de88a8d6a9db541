"""
Theta Function Evaluator

Θ_pq(z) = Σ_m exp(πi (m+p)ᵀB(m+p) + 2πi (m+p)ᵀ(z+q)) summed over the lattice
points inside an ellipsoid around the dominant term. Arguments are first
reduced into the fundamental cell with the quasi-periodicity

    Θ_pq(z + Bn + k) = exp(2πi pᵀk − πi nᵀBn − 2πi nᵀ(z + q)) Θ_pq(z)

so large Abel sums never overflow. Gradients and Hessians in z are summed
with the value.
"""

from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.linalg import eigvalsh

from ernst_theta.config import settings
from ernst_theta.exceptions import DivergentContext, NoNonSingularOddChar
from ernst_theta.logger import get_logger
from ernst_theta.theta.characteristics import Characteristics, odd_characteristics

logger = get_logger(__name__)

TWO_PI_I = 2j * np.pi

# |Θ★(0)| relative to the series scale
ODD_ORIGIN_TOL = 1e-10


@dataclass(frozen=True)
class ThetaValue:
    """Θ_pq(z) with derivatives and the absolute-sum scale of the series."""

    value: complex
    grad: np.ndarray
    hess: Optional[np.ndarray]
    scale: float

    @property
    def relative(self) -> float:
        """|Θ| relative to Σ|terms|; small values mean z is near the divisor."""
        return abs(self.value) / self.scale if self.scale > 0 else 0.0

    @property
    def log_grad(self) -> np.ndarray:
        return self.grad / self.value

    @property
    def log_hess(self) -> np.ndarray:
        return self.hess / self.value - np.outer(self.grad, self.grad) / self.value**2


# ============================================================================
# CONTEXT
# ============================================================================


class ThetaContext:
    """
    Period matrix prepared for repeated theta evaluation.

    B is symmetrized as (B + Bᵀ)/2; Im B must be positive definite.

    Raises:
        DivergentContext: If Im B is not positive definite
    """

    def __init__(self, B: np.ndarray, tol: Optional[float] = None, margin: Optional[float] = None):
        B = np.atleast_2d(np.asarray(B, dtype=complex))
        self.B = 0.5 * (B + B.T)
        self.genus = self.B.shape[0]
        self.Y = self.B.imag
        eigenvalues = eigvalsh(self.Y)
        self.lambda_min = float(eigenvalues[0])
        if not np.all(np.isfinite(self.B)) or self.lambda_min <= 0.0:
            raise DivergentContext(
                "Im B is not positive definite",
                details={"eigenvalues": eigenvalues.tolist()},
            )
        self.Y_inv = np.linalg.inv(self.Y)
        self.tol = tol or settings.theta_tol
        margin = settings.theta_margin if margin is None else margin
        self.radius = np.sqrt(-np.log(self.tol) / (np.pi * self.lambda_min)) + margin
        # ellipsoid (m - c)ᵀ Y (m - c) <= r2
        self.r2 = self.lambda_min * self.radius**2
        half_width = np.ceil(np.sqrt(self.r2 * np.diag(self.Y_inv))).astype(int) + 1
        axes = [np.arange(-w, w + 1) for w in half_width]
        self._offsets = np.array(np.meshgrid(*axes, indexing="ij")).reshape(self.genus, -1).T

    @property
    def tail_bound(self) -> float:
        """Bound on the relative size of any omitted term."""
        return float(np.exp(-np.pi * self.r2))

    def with_entry(self, alpha: int, beta: int, delta: complex) -> "ThetaContext":
        """Context with the single (unsymmetrized) entry B[α, β] perturbed."""
        B = self.B.copy()
        B[alpha, beta] += delta
        return ThetaContext(B, self.tol)

    # ------------------------------------------------------------------

    def _lattice(self, center: np.ndarray) -> np.ndarray:
        points = np.round(center).astype(int) + self._offsets
        diff = points - center
        inside = np.einsum("ki,ij,kj->k", diff, self.Y, diff) <= self.r2
        return points[inside]

    def reduce(self, z: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Split z = z_r + Bn + k with z_r in the fundamental cell."""
        n = np.round(self.Y_inv @ z.imag)
        shifted = z - self.B @ n
        k = np.round(shifted.real)
        return shifted - k, n, k

    def evaluate(self, z: Sequence[complex], chars: Characteristics, order: int = 1) -> ThetaValue:
        """
        Θ_pq at z with gradient (order >= 1) and Hessian (order >= 2).

        Args:
            z: Point in ℂ^g
            chars: Characteristics (p, q), complex allowed
            order: Highest derivative order to sum

        Returns:
            ThetaValue: Value, derivatives and series scale
        """
        z = np.asarray(z, dtype=complex).reshape(self.genus)
        p, q = chars.p_vec, chars.q_vec
        z_r, n, k = self.reduce(z)

        shift_vec = self.B @ p + z_r + q
        center = -self.Y_inv @ shift_vec.imag
        nu = self._lattice(center) + p

        exponent = (
            np.pi * 1j * np.einsum("ki,ij,kj->k", nu, self.B, nu)
            + TWO_PI_I * nu @ (z_r + q)
        )
        peak = float(exponent.real.max())
        terms = np.exp(exponent - peak)

        # quasi-periodicity factor of the reduction
        log_factor = (
            TWO_PI_I * p @ k
            - np.pi * 1j * n @ self.B @ n
            - TWO_PI_I * n @ (z_r + q)
            + peak
        )
        factor = np.exp(log_factor)

        value_r = terms.sum()
        grad_r = TWO_PI_I * (nu.T @ terms) if order >= 1 else np.zeros(self.genus, dtype=complex)
        value = factor * value_r
        grad = factor * (grad_r - TWO_PI_I * n * value_r)
        hess = None
        if order >= 2:
            hess_r = TWO_PI_I**2 * (nu.T @ (terms[:, None] * nu))
            cross = np.outer(n, grad_r)
            hess = factor * (
                hess_r - TWO_PI_I * (cross + cross.T) + TWO_PI_I**2 * np.outer(n, n) * value_r
            )
        scale = float(np.abs(terms).sum() * abs(factor))
        return ThetaValue(complex(value), grad, hess, scale)

    def theta(self, z: Sequence[complex], chars: Optional[Characteristics] = None) -> complex:
        chars = chars or Characteristics.zero(self.genus)
        return self.evaluate(z, chars, order=0).value

    def grad(self, z: Sequence[complex], chars: Optional[Characteristics] = None) -> np.ndarray:
        chars = chars or Characteristics.zero(self.genus)
        return self.evaluate(z, chars, order=1).grad

    def hess(self, z: Sequence[complex], chars: Optional[Characteristics] = None) -> np.ndarray:
        chars = chars or Characteristics.zero(self.genus)
        return self.evaluate(z, chars, order=2).hess


def theta(ctx: ThetaContext, z: Sequence[complex], chars: Characteristics) -> complex:
    return ctx.theta(z, chars)


def grad_theta(ctx: ThetaContext, z: Sequence[complex], chars: Characteristics) -> np.ndarray:
    return ctx.grad(z, chars)


def hess_theta(ctx: ThetaContext, z: Sequence[complex], chars: Characteristics) -> np.ndarray:
    return ctx.hess(z, chars)


# ============================================================================
# PRODUCTS OF THETA FUNCTIONS
# ============================================================================


@dataclass(frozen=True)
class ThetaFactor:
    shift: Tuple[complex, ...]
    chars: Characteristics
    power: int = 1


class ThetaMonomial:
    """
    f(z) = Π Θ_{p_i q_i}(z + s_i)^{k_i}, with derivatives in the common z.

    Used wherever a directional derivative of a theta product or quotient is
    needed, e.g. D_ξ ln(Θ(0)/Θ(u⁻)).
    """

    def __init__(self, ctx: ThetaContext, factors: Sequence[ThetaFactor]):
        self.ctx = ctx
        self.factors: List[ThetaFactor] = list(factors)

    @classmethod
    def single(cls, ctx: ThetaContext, shift, chars: Characteristics, power: int = 1) -> "ThetaMonomial":
        return cls(ctx, [ThetaFactor(tuple(complex(s) for s in np.ravel(shift)), chars, power)])

    def times(self, shift, chars: Characteristics, power: int = 1) -> "ThetaMonomial":
        factor = ThetaFactor(tuple(complex(s) for s in np.ravel(shift)), chars, power)
        return ThetaMonomial(self.ctx, self.factors + [factor])

    def _values(self, z: np.ndarray) -> List[ThetaValue]:
        return [
            self.ctx.evaluate(z + np.array(f.shift, dtype=complex), f.chars, order=2)
            for f in self.factors
        ]

    def value(self, z=None) -> complex:
        z = self._point(z)
        result = 1.0 + 0j
        for f, v in zip(self.factors, self._values(z)):
            result *= v.value ** f.power
        return complex(result)

    def log_gradient(self, z=None) -> np.ndarray:
        z = self._point(z)
        return sum(f.power * v.log_grad for f, v in zip(self.factors, self._values(z)))

    def log_hessian(self, z=None) -> np.ndarray:
        z = self._point(z)
        return sum(f.power * v.log_hess for f, v in zip(self.factors, self._values(z)))

    def gradient(self, z=None) -> np.ndarray:
        return self.value(z) * self.log_gradient(z)

    def hessian(self, z=None) -> np.ndarray:
        lg = self.log_gradient(z)
        return self.value(z) * (self.log_hessian(z) + np.outer(lg, lg))

    def _point(self, z) -> np.ndarray:
        if z is None:
            return np.zeros(self.ctx.genus, dtype=complex)
        return np.asarray(z, dtype=complex).reshape(self.ctx.genus)


# ============================================================================
# CHARACTERISTIC SEARCH AND SELF-CHECKS
# ============================================================================


def odd_candidates(ctx: ThetaContext) -> List[Tuple[Characteristics, float]]:
    """
    Odd half-integer characteristics with the normalized gradient norm at 0.

    Sorted by decreasing ‖∇Θ(0)‖ / scale; a vanishing norm marks a singular
    characteristic.
    """
    if ctx.genus > settings.max_odd_char_genus:
        raise NoNonSingularOddChar(
            "Genus too large for the exhaustive odd characteristic search",
            details={"genus": ctx.genus, "limit": settings.max_odd_char_genus},
        )
    zero = np.zeros(ctx.genus, dtype=complex)
    ranked = []
    for chars in odd_characteristics(ctx.genus):
        v = ctx.evaluate(zero, chars, order=1)
        ranked.append((chars, float(np.linalg.norm(v.grad)) / v.scale))
    ranked.sort(key=lambda item: -item[1])
    return ranked


def find_odd_char(ctx: ThetaContext) -> Characteristics:
    """
    Odd characteristic with the largest ‖∇Θ★(0)‖; Θ★(0) itself must vanish.

    Raises:
        NoNonSingularOddChar: If every odd characteristic has vanishing gradient,
            or the selected one does not vanish at the origin
    """
    ranked = odd_candidates(ctx)
    best, norm = ranked[0]
    if norm < settings.divisor_guard:
        raise NoNonSingularOddChar(
            "All odd characteristics are singular",
            details={"best_norm": norm},
        )
    origin = ctx.evaluate(np.zeros(ctx.genus, dtype=complex), best, order=0)
    if origin.relative > ODD_ORIGIN_TOL:
        raise NoNonSingularOddChar(
            "Odd theta function does not vanish at the origin",
            details={"chars": best.label(), "relative": origin.relative},
        )
    logger.debug("Selected odd characteristic", extra={"chars": best.label(), "grad_norm": norm})
    return best


@dataclass(frozen=True)
class HeatResidual:
    """Relative residual of 4πi ∂Θ/∂B_αβ = κ ∂²Θ/∂z_α∂z_β for κ = 1 and κ = 2."""

    residual: float
    kappa: int
    residual_k1: float
    residual_k2: float


def heat_residual(
    ctx: ThetaContext,
    z: Sequence[complex],
    chars: Characteristics,
    alpha: int,
    beta: int,
    step: float = 1e-5,
) -> HeatResidual:
    """
    Check the heat equation for one (unsymmetrized) entry of B.

    The B derivative is a central difference; both conventions κ = 1 and κ = 2
    are measured and the better one reported. With independent entries B_αβ the
    expected value is κ = 1.
    """
    z = np.asarray(z, dtype=complex)
    plus = ctx.with_entry(alpha, beta, step).theta(z, chars)
    minus = ctx.with_entry(alpha, beta, -step).theta(z, chars)
    lhs = 4j * np.pi * (plus - minus) / (2.0 * step)
    second = ctx.hess(z, chars)[alpha, beta]

    def rel(kappa):
        scale = max(abs(lhs), abs(kappa * second), 1e-300)
        return float(abs(lhs - kappa * second) / scale)

    r1, r2 = rel(1), rel(2)
    return HeatResidual(min(r1, r2), 1 if r1 <= r2 else 2, r1, r2)


# ============================================================================
# DIRECTIONAL DERIVATIVES
# ============================================================================


def dir_deriv(ctx: ThetaContext, omega: np.ndarray, f: ThetaMonomial, z=None) -> complex:
    """D_a f(z) = ∇f(z)·ω(a)/dτ for a normalized-differential vector ω(a)."""
    return complex(f.gradient(z) @ np.asarray(omega, dtype=complex))


def dir_deriv2(ctx: ThetaContext, omega_a: np.ndarray, omega_b: np.ndarray, f: ThetaMonomial, z=None) -> complex:
    """D_a D_b f(z)."""
    return complex(np.asarray(omega_a) @ f.hessian(z) @ np.asarray(omega_b))


def dir_deriv_q(
    ctx: ThetaContext,
    omega: np.ndarray,
    z: Sequence[complex],
    chars: Characteristics,
    step: float = 1e-6,
) -> complex:
    """D_a Θ_pq(z) from central differences in q."""
    z = np.asarray(z, dtype=complex)
    total = 0j
    for alpha in range(ctx.genus):
        delta = np.zeros(ctx.genus, dtype=complex)
        delta[alpha] = step
        plus = ctx.theta(z, chars.shifted_q(delta))
        minus = ctx.theta(z, chars.shifted_q(-delta))
        total += omega[alpha] * (plus - minus) / (2.0 * step)
    return complex(total)
