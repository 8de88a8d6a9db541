"""
Fay Identities

The trisecant identity and its once and twice degenerated forms, evaluated
with prime forms replaced by Θ★(A(x) − A(y)). Every term of each identity
carries the same h factor of each point, so no h is ever computed.
"""

from typing import Any, Dict, Optional, Sequence

import numpy as np

from ernst_theta.config import settings
from ernst_theta.kernels import KernelContext
from ernst_theta.schemas.common import CheckReport, format_complex
from ernst_theta.surface.curve import SurfacePoint
from ernst_theta.theta.characteristics import Characteristics
from ernst_theta.verify.base import normalized_residual, point_labels, run_check


def _inputs(kc: KernelContext, z: np.ndarray, chars: Characteristics, points) -> Dict[str, Any]:
    return {
        "curve": kc.curve.fingerprint(),
        "genus": kc.genus,
        "points": point_labels(*points),
        "z": [format_complex(v) for v in z],
        "chars": chars.label(),
    }


def _setup(kc: KernelContext, z: Sequence[complex], chars: Optional[Characteristics], tolerance):
    z = np.asarray(z, dtype=complex).reshape(kc.genus)
    chars = chars or Characteristics.zero(kc.genus)
    tolerance = tolerance or settings.algebraic_tolerance(kc.genus)
    return z, chars, tolerance


def fay_trisecant(
    kc: KernelContext,
    z: Sequence[complex],
    a: SurfacePoint,
    b: SurfacePoint,
    c: SurfacePoint,
    d: SurfacePoint,
    chars: Optional[Characteristics] = None,
    tolerance: Optional[float] = None,
) -> CheckReport:
    """
    E(c,a)E(d,b)Θ(z+∫_b^c)Θ(z+∫_a^d) + E(c,b)E(a,d)Θ(z+∫_a^c)Θ(z+∫_b^d)
        = E(c,d)E(a,b)Θ(z)Θ(z+∫_b^c+∫_a^d)

    With b = d both sides agree term by term and the residual is 0.

    Raises (inside the report):
        SingularPrimeForm: If two of the points coincide otherwise
    """
    z, chars, tolerance = _setup(kc, z, chars, tolerance)

    def compute():
        inputs = _inputs(kc, z, chars, (a, b, c, d))
        if b == d:
            inputs["degenerate"] = "b=d"
            return 0.0, inputs
        A = {p: kc.A(p) for p in (a, b, c, d)}

        def th(shift):
            return kc.ctx.evaluate(z + shift, chars, order=0).value

        S = kc.star_between
        first = S(c, a) * S(d, b) * th(A[c] - A[b]) * th(A[d] - A[a])
        second = S(c, b) * S(a, d) * th(A[c] - A[a]) * th(A[d] - A[b])
        right = S(c, d) * S(a, b) * th(np.zeros(kc.genus)) * th(A[c] - A[b] + A[d] - A[a])
        return normalized_residual(first + second, right, first, second), inputs

    return run_check("fay_trisecant", tolerance, compute)


def fay_degenerate1(
    kc: KernelContext,
    z: Sequence[complex],
    a: SurfacePoint,
    b: SurfacePoint,
    c: SurfacePoint,
    chars: Optional[Characteristics] = None,
    tolerance: Optional[float] = None,
) -> CheckReport:
    """
    D_b ln(Θ(z+∫_a^c)/Θ(z)) = c1(a,b,c) + c2(a,b,c)Θ(z+∫_a^b)Θ(z+∫_b^c)/(Θ(z)Θ(z+∫_a^c))
    """
    z, chars, tolerance = _setup(kc, z, chars, tolerance)

    def compute():
        Aa, Ab, Ac = kc.A(a), kc.A(b), kc.A(c)
        omega_b = kc.omega(b)
        at_z = kc.ctx.evaluate(z, chars, order=1)
        at_ac = kc.ctx.evaluate(z + Ac - Aa, chars, order=1)
        lhs = complex(omega_b @ (at_ac.log_grad - at_z.log_grad))

        first = kc.c1(a, b, c)
        quotient = (
            kc.ctx.evaluate(z + Ab - Aa, chars, order=0).value
            * kc.ctx.evaluate(z + Ac - Ab, chars, order=0).value
            / (at_z.value * at_ac.value)
        )
        second = kc.c2(a, b, c) * quotient
        return normalized_residual(lhs, first + second, first, second), _inputs(kc, z, chars, (a, b, c))

    return run_check("fay_degenerate1", tolerance, compute)


def fay_degenerate2(
    kc: KernelContext,
    z: Sequence[complex],
    a: SurfacePoint,
    b: SurfacePoint,
    chars: Optional[Characteristics] = None,
    tolerance: Optional[float] = None,
) -> CheckReport:
    """
    D_a D_b ln Θ(z) = d1(a,b) + d2(a,b)Θ(z+∫_b^a)Θ(z+∫_a^b)/Θ²(z)
    """
    z, chars, tolerance = _setup(kc, z, chars, tolerance)

    def compute():
        Aa, Ab = kc.A(a), kc.A(b)
        at_z = kc.ctx.evaluate(z, chars, order=2)
        lhs = complex(kc.omega(a) @ at_z.log_hess @ kc.omega(b))
        first = kc.d1(a, b)
        quotient = (
            kc.ctx.evaluate(z + Aa - Ab, chars, order=0).value
            * kc.ctx.evaluate(z + Ab - Aa, chars, order=0).value
            / at_z.value**2
        )
        second = kc.d2(a, b) * quotient
        return normalized_residual(lhs, first + second, first, second), _inputs(kc, z, chars, (a, b))

    return run_check("fay_degenerate2", tolerance, compute)
