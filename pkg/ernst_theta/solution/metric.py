"""
Weyl-Lewis-Papapetrou Metric

    ds² = −e^{2U}(dt + A dφ)² + e^{−2U}[e^{2k}(dρ² + dζ²) + ρ² dφ²]

with e^{2U} = Re ℰ and closed theta expressions for A and e^{2k}:

    (A − A₀)e^{2U} = Z = −ρ[Θ_pq(0)Θ_pq(u⁻ + v⁻)/(Q Θ_pq(u⁻)Θ_pq(v⁻)) − 1]
    e^{2k} = K Θ_pq(0)Θ_pq(w)/(Θ(0)Θ(w))
"""

from dataclasses import dataclass

import numpy as np

from ernst_theta.kernels import q_factor
from ernst_theta.logger import get_logger
from ernst_theta.solution.ernst import ErnstSolution, evaluate

logger = get_logger(__name__)


@dataclass(frozen=True)
class MetricValues:
    """Metric functions at one point; imaginary parts are kept as diagnostics."""

    e2U: float
    A: float
    k: float
    e2k: float
    mask: int = 0
    imag_A: float = 0.0
    imag_k: float = 0.0


@dataclass(frozen=True)
class LineElement:
    g_tt: float
    g_tphi: float
    g_phiphi: float
    g_rhorho: float
    g_zetazeta: float

    def as_tuple(self):
        return (self.g_tt, self.g_tphi, self.g_phiphi, self.g_rhorho, self.g_zetazeta)

    @property
    def block_determinant(self) -> float:
        """Determinant of the t-φ block, −ρ² for every metric of this form."""
        return self.g_tt * self.g_phiphi - self.g_tphi**2


def e2U_complex(sol: ErnstSolution, xi: complex) -> complex:
    """(ℰ + conj ℰ)/2, kept complex so A and its derivatives stay in one type."""
    value = evaluate(sol, xi)
    return 0.5 * (value.E + value.E_conj)


def metric_Z(sol: ErnstSolution, xi: complex) -> complex:
    """Z = (A − A₀)e^{2U}."""
    st = sol.state(xi)
    st.check_regular()
    zero = np.zeros(st.curve.genus, dtype=complex)
    ratio = (
        st.pq(zero).value
        * st.pq(st.u_minus + st.v_minus).value
        / (st.pq(st.u_minus).value * st.pq(st.v_minus).value)
    )
    return complex(-st.rho * (ratio / q_factor(st.kernels) - 1.0))


def metric_A_complex(sol: ErnstSolution, xi: complex, A0: float = 0.0) -> complex:
    return A0 + metric_Z(sol, xi) / e2U_complex(sol, xi)


def metric_A(sol: ErnstSolution, xi: complex, A0: float = 0.0) -> float:
    """A from (A − A₀)e^{2U} = Z; the real part is returned."""
    value = metric_A_complex(sol, xi, A0)
    if abs(value.imag) > 1e-8 * max(1.0, abs(value)):
        logger.debug("Metric A has an imaginary part", extra={"xi": xi, "imag": value.imag})
    return float(value.real)


def metric_e2k_complex(sol: ErnstSolution, xi: complex, K: float = 1.0) -> complex:
    st = sol.state(xi)
    st.check_regular()
    zero = np.zeros(st.curve.genus, dtype=complex)
    numerator = st.pq(zero).value * st.pq(st.w).value
    denominator = st.zero_char(zero, order=0).value * st.zero_char(st.w, order=0).value
    return complex(K * numerator / denominator)


def metric_k(sol: ErnstSolution, xi: complex, K: float = 1.0) -> float:
    """k with e^{2k} = K Θ_pq(0)Θ_pq(w)/(Θ(0)Θ(w))."""
    return float(0.5 * np.log(metric_e2k_complex(sol, xi, K)).real)


def metric_values(sol: ErnstSolution, xi: complex, A0: float = 0.0, K: float = 1.0) -> MetricValues:
    """e^{2U}, A and k at one point."""
    e2U = e2U_complex(sol, xi)
    A = metric_A_complex(sol, xi, A0)
    e2k = metric_e2k_complex(sol, xi, K)
    k = 0.5 * np.log(e2k)
    return MetricValues(
        e2U=float(e2U.real),
        A=float(A.real),
        k=float(k.real),
        e2k=float(e2k.real),
        imag_A=float(A.imag),
        imag_k=float(k.imag),
    )


def line_element(values: MetricValues, rho: float, zeta: float) -> LineElement:
    """Metric coefficients in Weyl coordinates (t, φ, ρ, ζ)."""
    e2U, A = values.e2U, values.A
    conformal = np.exp(2.0 * values.k) / e2U
    return LineElement(
        g_tt=-e2U,
        g_tphi=-e2U * A,
        g_phiphi=-e2U * A**2 + rho**2 / e2U,
        g_rhorho=float(conformal),
        g_zetazeta=float(conformal),
    )
