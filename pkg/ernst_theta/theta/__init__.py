"""
Theta Package

Characteristics and the truncated theta-series evaluator.
"""

from ernst_theta.theta.characteristics import Characteristics, half_integer_characteristics, odd_characteristics
from ernst_theta.theta.evaluator import (
    ThetaContext,
    ThetaMonomial,
    ThetaValue,
    dir_deriv,
    dir_deriv2,
    dir_deriv_q,
    find_odd_char,
    heat_residual,
)

__all__ = [
    "Characteristics",
    "half_integer_characteristics",
    "odd_characteristics",
    "ThetaContext",
    "ThetaMonomial",
    "ThetaValue",
    "dir_deriv",
    "dir_deriv2",
    "dir_deriv_q",
    "find_odd_char",
    "heat_residual",
]
