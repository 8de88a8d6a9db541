"""
Proposition Checks

Identities satisfied by the theta-functional Ernst potential and its metric
functions at one point ξ: the structure constants, the derivative formulas, the
ξ̄-derivatives of the building blocks and the relations behind A and k.

Derivatives in ξ are central differences of ξ ↦ quantity, with the curve and
its periods rebuilt at every shifted ξ. Quantities that contain the local
parameter at ξ (D_ξ, h²(ξ)) are continued with the sign of √Π(ξ − λ_n) at the
center, since the principal root can jump between neighbouring ξ.

Terms linear in a c2 quotient at the moving branch point are compared up to a
common sign; the chosen sign is reported in the inputs.
"""

from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from ernst_theta.config import settings
from ernst_theta.exceptions import SolutionError
from ernst_theta.kernels import q_factor, q_factor_prime, root_ratio_check, strange_quotient
from ernst_theta.logger import get_logger
from ernst_theta.schemas.common import CheckReport, format_complex
from ernst_theta.solution.ernst import (
    ErnstSolution,
    ErnstState,
    _raw_d_xi,
    _raw_d_xibar,
    convergence_order,
    d_xi,
    d_xibar,
    ernst_residual,
    evaluate,
    fd_laplacian,
    fd_step,
    fd_wirtinger,
    laplace,
)
from ernst_theta.solution.metric import metric_A_complex, metric_e2k_complex, metric_Z
from ernst_theta.surface.curve import segment_distance
from ernst_theta.theta.evaluator import dir_deriv_q
from ernst_theta.verify.base import Outcome, derivative_tolerance, normalized_residual, run_check
from ernst_theta.verify.sampling import make_rng, sample_generic_points, sample_xi_near

logger = get_logger(__name__)

RESIDUAL_TOLERANCE = 1e-7
ORDER_TOLERANCE = 0.1

# extra points of ErE, Epoxi and Epoxibar around ξ
NEIGHBOURS = 4

ALGEBRAIC = "algebraic"
DERIVATIVE = "derivative"

PROPOSITION_CHECKS: Tuple[Tuple[str, str], ...] = (
    ("E+Ebar", ALGEBRAIC),
    ("C0", ALGEBRAIC),
    ("strange", ALGEBRAIC),
    ("rootcol", ALGEBRAIC),
    ("root2", ALGEBRAIC),
    ("c11", ALGEBRAIC),
    ("root_ratio", ALGEBRAIC),
    ("ErE", "residual"),
    ("Epoxi", DERIVATIVE),
    ("Epoxibar", DERIVATIVE),
    ("fd_order", "order"),
    ("Laplace", DERIVATIVE),
    ("rhs", ALGEBRAIC),
    ("dir_deriv_q", DERIVATIVE),
    ("derxib", DERIVATIVE),
    ("fac2", DERIVATIVE),
    ("C2xibar", DERIVATIVE),
    ("Qxibar", DERIVATIVE),
    ("Zh1", DERIVATIVE),
    ("Z4", ALGEBRAIC),
    ("Z6", ALGEBRAIC),
    ("Z1", DERIVATIVE),
    ("axi", DERIVATIVE),
    ("kxi", DERIVATIVE),
    ("F1", ALGEBRAIC),
    ("F2", ALGEBRAIC),
    ("prime_form_relation", ALGEBRAIC),
)

PROPOSITION_NAMES = tuple(name for name, _ in PROPOSITION_CHECKS)

# both sides vanish identically when p = q = 0
FLAT_TRIVIAL = frozenset({"Epoxi", "Epoxibar", "fd_order", "Laplace", "rhs", "fac2", "Z1", "axi", "kxi"})


def signed_residual(lhs: complex, even: complex, odd: complex, *terms: complex) -> Tuple[float, int]:
    """Residual of lhs = even ± odd with the better sign."""
    plus = normalized_residual(lhs, even + odd, even, odd, *terms)
    minus = normalized_residual(lhs, even - odd, even, odd, *terms)
    return (plus, 1) if plus <= minus else (minus, -1)


def f2_residual(st: ErnstState, V: Sequence[complex]) -> float:
    """
    k-identity in zero-characteristic form at the shift V:

        D_ξD_ξ ln[Θ(V)Θ(w+V)/(Θ(0)Θ(w))] + (D_ξ ln Θ(V))² + (D_ξ ln Θ(w+V))²
            = 2 D_ξ ln Θ(V) · D_ξ ln Θ(w+V)
    """
    V = np.asarray(V, dtype=complex).reshape(st.curve.genus)
    om = st.kernels.omega(st.curve.xi_point)
    zero = np.zeros(st.curve.genus, dtype=complex)
    at_V = st.zero_char(V, order=2)
    at_wV = st.zero_char(st.w + V, order=2)
    hess = at_V.log_hess + at_wV.log_hess - st.zero_char(zero, order=2).log_hess - st.zero_char(st.w, order=2).log_hess
    second = complex(om @ hess @ om)
    a = complex(at_V.log_grad @ om)
    b = complex(at_wV.log_grad @ om)
    return normalized_residual(second + a * a + b * b, 2.0 * a * b, second, a * a, b * b)


class PropositionSuite:
    """
    Proposition identities of one solution at one ξ.

    Args:
        sol: Ernst solution (admissible characteristics for the conjugate-based checks)
        xi: Regular point ξ = ζ − iρ
        rng: Generator for the random points and shifts
    """

    def __init__(self, sol: ErnstSolution, xi: complex, rng: Optional[np.random.Generator] = None):
        self.sol = sol
        self.xi = complex(xi)
        self.rng = rng or make_rng()
        self.st = sol.state(self.xi)
        self.st.check_regular()
        self.genus = sol.genus
        self.h = fd_step(self.xi)
        self.zero = np.zeros(self.genus, dtype=complex)
        self.xi_p, self.xib_p, self.inf_p, self.inf_m = self.st.points()
        self.kc = self.st.kernels
        self.value = evaluate(sol, self.xi)
        self.Q = q_factor(self.kc)
        self._sqrt0 = self.st.curve.sqrt_at_branch(0)
        self._neighbour_rng = np.random.default_rng(int(self.rng.integers(2**31)))
        self._neighbours: Optional[List[complex]] = None

    # ------------------------------------------------------------------
    # helpers
    # ------------------------------------------------------------------

    def tolerance(self, kind: str) -> float:
        if kind == ALGEBRAIC:
            return settings.algebraic_tolerance(self.genus)
        if kind == DERIVATIVE:
            return derivative_tolerance(self.genus)
        if kind == "order":
            return ORDER_TOLERANCE
        return RESIDUAL_TOLERANCE

    def T(self, z) -> complex:
        return self.st.pq(np.asarray(z, dtype=complex)).value

    def continued(self, st: ErnstState) -> int:
        """Sign that continues √Π(ξ − λ_n) from the center to ``st``."""
        root = st.curve.sqrt_at_branch(0)
        return 1 if abs(root - self._sqrt0) <= abs(root + self._sqrt0) else -1

    def fd(self, fn: Callable[[ErnstState], complex], step: Optional[float] = None) -> Tuple[complex, complex]:
        return fd_wirtinger(lambda x: fn(self.sol.state(x)), self.xi, step or self.h)

    def fd_log(self, fn: Callable[[ErnstState], complex]) -> Tuple[complex, complex]:
        center = fn(self.st)
        f_xi, f_xibar = self.fd(fn)
        return f_xi / center, f_xibar / center

    def inputs(self, **extra) -> Dict:
        data = {
            "curve": self.st.curve.fingerprint(),
            "genus": self.genus,
            "xi": format_complex(self.xi),
            "chars": self.sol.chars.label(),
        }
        data.update(extra)
        return data

    def points_around(self) -> List[complex]:
        """ξ followed by up to NEIGHBOURS regular points of its strip."""
        if self._neighbours is None:
            candidates = sample_xi_near(self._neighbour_rng, self.sol.pairs, self.xi, NEIGHBOURS)
            regular = []
            for x in candidates:
                try:
                    evaluate(self.sol, x)
                except SolutionError:
                    continue
                regular.append(x)
            self._neighbours = regular
        return [self.xi] + self._neighbours

    def worst_over_points(self, residual: Callable[[complex], float]) -> Outcome:
        points = self.points_around()
        values = [residual(x) for x in points]
        worst = int(np.argmax(values))
        return values[worst], self.inputs(
            points=[format_complex(x) for x in points],
            worst=format_complex(points[worst]),
        )

    def kernels_at_xi(self) -> Tuple[complex, complex]:
        """(c1, c2) at (ξ, ξ̄, ∞⁻)."""
        return (
            self.kc.c1(self.xi_p, self.xib_p, self.inf_m),
            self.kc.c2(self.xi_p, self.xib_p, self.inf_m),
        )

    # ------------------------------------------------------------------
    # structure constants
    # ------------------------------------------------------------------

    def check_e_plus_ebar(self) -> Outcome:
        st, w = self.st, self.st.w
        lhs = self.value.E + self.value.E_conj
        rhs = 2.0 * self.Q * self.T(self.zero) * self.T(-w) / (self.T(st.u_minus) * self.T(st.v_minus))
        return normalized_residual(lhs, rhs), self.inputs()

    def check_c0(self) -> Outcome:
        prime = q_factor_prime(self.kc)
        return normalized_residual(prime**2, self.Q**2), self.inputs(Q=format_complex(self.Q))

    def check_strange(self) -> Outcome:
        quotient = strange_quotient(self.kc)
        return normalized_residual(quotient, -1.0), self.inputs(quotient=format_complex(quotient))

    def check_rootcol(self) -> Outcome:
        span = self.xi - self.xi.conjugate()
        first = self.kc.c2(self.xib_p, self.xi_p, self.inf_p) ** 2 * span
        second = (self.kc.c2(self.inf_m, self.xi_p, self.inf_p) / (2.0 * self.Q)) ** 2 * span
        residual = max(normalized_residual(first, 1.0), normalized_residual(second, 1.0))
        return residual, self.inputs()

    def check_root2(self) -> Outcome:
        span = self.xi - self.xi.conjugate()
        first = self.kc.c2(self.inf_m, self.xib_p, self.inf_p) / (span * self.kc.c2(self.inf_m, self.xi_p, self.inf_p))
        second = self.kc.d2(self.xib_p, self.xi_p)
        return normalized_residual(first, -second), self.inputs()

    def check_c11(self) -> Outcome:
        first = self.kc.c1(self.inf_m, self.xib_p, self.inf_p)
        second = self.kc.c1(self.xi_p, self.xib_p, self.inf_m)
        return normalized_residual(first, -2.0 * second), self.inputs()

    def check_root_ratio(self) -> Outcome:
        points = sample_generic_points(self.rng, self.st.curve, 3)
        spread = root_ratio_check(self.kc, points, 0, 1)
        return spread, self.inputs(points=[p.label() for p in points])

    # ------------------------------------------------------------------
    # Ernst potential and its derivatives
    # ------------------------------------------------------------------

    def _potential(self, x: complex) -> complex:
        return evaluate(self.sol, x).E

    def check_ernst(self) -> Outcome:
        return self.worst_over_points(lambda x: ernst_residual(self.sol, x))

    def check_epoxi(self) -> Outcome:
        def residual(x: complex) -> float:
            fd_xi, _ = fd_wirtinger(self._potential, x, fd_step(x))
            return normalized_residual(fd_xi, d_xi(self.sol, x))

        return self.worst_over_points(residual)

    def check_epoxibar(self) -> Outcome:
        def residual(x: complex) -> float:
            _, fd_xibar = fd_wirtinger(self._potential, x, fd_step(x))
            return normalized_residual(fd_xibar, d_xibar(self.sol, x))

        return self.worst_over_points(residual)

    def check_fd_order(self) -> Outcome:
        exact = d_xi(self.sol, self.xi)
        h0 = 1e-2 * max(1.0, abs(self.xi))
        order = convergence_order(lambda h: fd_wirtinger(self._potential, self.xi, h)[0], exact, h0)
        return abs(order - 2.0), self.inputs(order=order, h0=h0)

    def check_laplace(self) -> Outcome:
        fd = fd_laplacian(self._potential, self.xi, 100.0 * self.h)
        return normalized_residual(fd, laplace(self.sol, self.xi)), self.inputs(step=100.0 * self.h)

    def check_rhs(self) -> Outcome:
        st = self.st
        total = self.value.E + self.value.E_conj
        lhs = 8.0 * _raw_d_xi(st) * _raw_d_xibar(st) / total
        rhs = (
            self.kc.c2(self.inf_m, self.xi_p, self.inf_p)
            * self.kc.c2(self.inf_m, self.xib_p, self.inf_p)
            / self.Q
            * self.T(st.v_minus) / self.T(st.u_minus) ** 3
            * st.D(self.xi_p, self.zero)
            * st.D(self.xib_p, st.w)
        )
        return normalized_residual(lhs, rhs), self.inputs()

    def check_dir_deriv_q(self) -> Outcome:
        st = self.st
        om = self.kc.omega(self.xi_p)
        q_form = dir_deriv_q(st.ctx, om, st.u_minus, self.sol.chars)
        return normalized_residual(q_form, st.D(self.xi_p, st.u_minus)), self.inputs()

    # ------------------------------------------------------------------
    # ξ̄-derivatives of the building blocks
    # ------------------------------------------------------------------

    def check_derxib(self) -> Outcome:
        _, lhs = self.fd_log(lambda s: s.pq(self._zeros(s)).value / s.pq(s.u_minus).value)
        lhs *= 4.0
        c1, c2 = self.kernels_at_xi()
        st = self.st
        odd = -2.0 * c2 * st.D(self.xib_p, st.w) * self.T(st.v_minus) / (self.T(st.u_minus) * self.T(self.zero))
        residual, sign = signed_residual(lhs, c1**2 - c2**2, odd, c1**2, c2**2)
        return residual, self.inputs(sign=sign)

    def check_fac2(self) -> Outcome:
        def log_grad(s: ErnstState) -> complex:
            zero = self._zeros(s)
            return self.continued(s) * s.D(s.curve.xi_point, zero) / s.pq(zero).value

        _, lhs = self.fd(log_grad)
        lhs *= 2.0
        st = self.st
        rhs = self.kc.d2(self.xib_p, self.xi_p) * self.T(-st.w) / self.T(self.zero) ** 2 * st.D(self.xib_p, st.w)
        residual, sign = signed_residual(lhs, 0j, rhs)
        return residual, self.inputs(sign=sign)

    def check_c2xibar(self) -> Outcome:
        def c2(s: ErnstState) -> complex:
            xi_p, _, inf_p, inf_m = s.points()
            return self.continued(s) * s.kernels.c2(inf_m, xi_p, inf_p)

        _, lhs = self.fd_log(c2)
        c1, c2v = self.kernels_at_xi()
        rhs = -0.5 * (c1**2 - c2v**2) - 1.0 / (2.0 * (self.xi.conjugate() - self.xi))
        return normalized_residual(lhs, rhs, 0.5 * c1**2, 0.5 * c2v**2), self.inputs()

    def check_qxibar(self) -> Outcome:
        _, lhs = self.fd_log(lambda s: q_factor(s.kernels))
        lhs *= 2.0
        c1, c2 = self.kernels_at_xi()
        return normalized_residual(lhs, c2**2 - c1**2, c1**2, c2**2), self.inputs()

    def check_zh1(self) -> Outcome:
        _, lhs = self.fd_log(lambda s: s.pq(s.u_minus + s.v_minus).value / s.pq(s.v_minus).value)
        lhs *= 4.0
        c1, c2 = self.kernels_at_xi()
        st, T = self.st, self.T
        u, v = st.u_minus, st.v_minus
        even = -3.0 * c1**2 + c2**2 * (4.0 * self.Q * T(u) * T(v) / (T(self.zero) * T(u + v)) - 1.0)
        odd = (
            2.0 * c2 * T(u) * T(2.0 * u) / (T(v) * T(u + v))
            * st.D(self.xib_p, self.zero) / T(self.zero)
        )
        residual, sign = signed_residual(lhs, even, odd, 3.0 * c1**2, c2**2)
        return residual, self.inputs(sign=sign)

    @staticmethod
    def _zeros(s: ErnstState) -> np.ndarray:
        return np.zeros(s.curve.genus, dtype=complex)

    # ------------------------------------------------------------------
    # metric relations
    # ------------------------------------------------------------------

    def check_z4(self) -> Outcome:
        st, T = self.st, self.T
        u, v, w = st.u_minus, st.v_minus, st.w
        first = T(u + v) * T(self.zero)
        second = T(2.0 * u) * T(-w)
        rhs = 2.0 * self.Q * T(u) * T(v)
        return normalized_residual(first + second, rhs, first, second), self.inputs()

    def check_z6(self) -> Outcome:
        st, T = self.st, self.T
        rho = st.rho
        lhs = metric_Z(self.sol, self.xi) + rho
        rhs = rho / self.Q * T(2.0 * st.u_minus) * T(-st.w) / (T(st.u_minus) * T(st.v_minus))
        return normalized_residual(lhs, rhs, rho), self.inputs()

    def _derivatives(self) -> Tuple[complex, complex, complex]:
        return d_xi(self.sol, self.xi), d_xibar(self.sol, self.xi), self.value.E + self.value.E_conj

    def check_z1(self) -> Outcome:
        _, lhs = fd_wirtinger(lambda x: metric_Z(self.sol, x), self.xi, self.h)
        e_xi, e_xibar, total = self._derivatives()
        Z, rho = metric_Z(self.sol, self.xi), self.st.rho
        first = (Z + rho) * np.conj(e_xi) / total
        second = (Z - rho) * e_xibar / total
        return normalized_residual(lhs, first + second, first, second), self.inputs()

    def check_axi(self) -> Outcome:
        lhs, _ = fd_wirtinger(lambda x: metric_A_complex(self.sol, x), self.xi, self.h)
        e_xi, e_xibar, total = self._derivatives()
        rhs = 2.0 * self.st.rho * (e_xi - np.conj(e_xibar)) / total**2
        return normalized_residual(lhs, rhs), self.inputs()

    def check_kxi(self) -> Outcome:
        center = metric_e2k_complex(self.sol, self.xi)
        e2k_xi, _ = fd_wirtinger(lambda x: metric_e2k_complex(self.sol, x), self.xi, self.h)
        lhs = e2k_xi / (2.0 * center)
        e_xi, e_xibar, total = self._derivatives()
        rhs = (self.xi - self.xi.conjugate()) * e_xi * np.conj(e_xibar) / total**2
        return normalized_residual(lhs, rhs), self.inputs()

    def check_f1(self) -> Outcome:
        st = self.st
        om = self.kc.omega(self.xi_p)
        pq0, pqw = st.pq(self.zero, order=2), st.pq(st.w, order=2)
        hess = (
            pq0.log_hess + pqw.log_hess
            - st.zero_char(self.zero, order=2).log_hess
            - st.zero_char(st.w, order=2).log_hess
        )
        second = complex(om @ hess @ om)
        a = complex(pq0.log_grad @ om)
        b = complex(pqw.log_grad @ om)
        lhs = (second + a * a + b * b) / 8.0
        rhs = 0.25 * a * b
        return normalized_residual(lhs, rhs, second / 8.0, a * a / 8.0, b * b / 8.0), self.inputs()

    def check_f2(self) -> Outcome:
        chars = self.sol.chars
        shifts = [
            self.st.ctx.B @ chars.p_vec + chars.q_vec,
            self.rng.uniform(-0.5, 0.5, self.genus) + 0.1j * self.rng.uniform(-1.0, 1.0, self.genus),
        ]
        residuals = [f2_residual(self.st, V) for V in shifts]
        return max(residuals), self.inputs(shifts=[[format_complex(x) for x in V] for V in shifts])

    def check_prime_form_relation(self) -> Outcome:
        """ln[E(b,d)E(a,c)/(E(a,d)E(b,c))] = ∫_c^d ω_{b,a}, compared through exponentials."""
        a, b, c, d = self._relation_points()
        S = self.kc.star_between
        left = S(b, d) * S(a, c) / (S(a, d) * S(b, c))
        omega = self.kc.third(b, a)
        right = np.exp(omega.integral_from_base(d) - omega.integral_from_base(c))
        return normalized_residual(left, right), self.inputs(points=[p.label() for p in (a, b, c, d)])

    def _relation_points(self, clearance: float = 0.1):
        """Four generic points whose base paths keep away from the poles a and b."""
        curve, planner = self.st.curve, self.st.periods.planner
        points = sample_generic_points(self.rng, curve, 4)
        for _ in range(20):
            a, b, c, d = points
            paths = [planner.plan(curve.base_point, p.lam).vertices for p in (c, d)]
            near = min(
                segment_distance(p, q, pole.lam, pole.lam)
                for vertices in paths
                for p, q in zip(vertices[:-1], vertices[1:])
                for pole in (a, b)
            )
            if near >= clearance:
                break
            points = sample_generic_points(self.rng, curve, 4)
        return points

    # ------------------------------------------------------------------

    def _trivial(self) -> Outcome:
        return 0.0, self.inputs(skipped="flat")

    def registry(self) -> Dict[str, Callable[[], Outcome]]:
        return {
            "E+Ebar": self.check_e_plus_ebar,
            "C0": self.check_c0,
            "strange": self.check_strange,
            "rootcol": self.check_rootcol,
            "root2": self.check_root2,
            "c11": self.check_c11,
            "root_ratio": self.check_root_ratio,
            "ErE": self.check_ernst,
            "Epoxi": self.check_epoxi,
            "Epoxibar": self.check_epoxibar,
            "fd_order": self.check_fd_order,
            "Laplace": self.check_laplace,
            "rhs": self.check_rhs,
            "dir_deriv_q": self.check_dir_deriv_q,
            "derxib": self.check_derxib,
            "fac2": self.check_fac2,
            "C2xibar": self.check_c2xibar,
            "Qxibar": self.check_qxibar,
            "Zh1": self.check_zh1,
            "Z4": self.check_z4,
            "Z6": self.check_z6,
            "Z1": self.check_z1,
            "axi": self.check_axi,
            "kxi": self.check_kxi,
            "F1": self.check_f1,
            "F2": self.check_f2,
            "prime_form_relation": self.check_prime_form_relation,
        }

    def run(self, only: Optional[Sequence[str]] = None) -> List[CheckReport]:
        """Run every proposition (or the ``only`` subset) in declaration order."""
        registry = self.registry()
        reports = []
        for name, kind in PROPOSITION_CHECKS:
            if only is not None and name not in only:
                continue
            func = registry[name]
            if self.sol.is_flat and name in FLAT_TRIVIAL:
                func = self._trivial
            reports.append(run_check(name, self.tolerance(kind), func))
        return reports


def proposition_suite(
    sol: ErnstSolution,
    xi: complex,
    rng: Optional[np.random.Generator] = None,
    only: Optional[Sequence[str]] = None,
) -> List[CheckReport]:
    """
    Run the proposition identities of ``sol`` at ``xi``.

    Returns:
        List[CheckReport]: One report per identity, in a fixed order
    """
    return PropositionSuite(sol, xi, rng).run(only)
