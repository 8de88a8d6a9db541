import logging

import numpy as np
import pytest

from ernst_theta.solution.ernst import evaluate
from ernst_theta.solution.metric import (
    MetricValues,
    line_element,
    metric_A,
    metric_e2k_complex,
    metric_k,
    metric_values,
)

logging.getLogger("ernst_theta").setLevel(logging.WARNING)


@pytest.mark.unit
def test_flat_line_element_is_minkowski():
    """Scenario 1: e^{2U} = 1, A = 0, k = 0 give (−1, 0, ρ², 1, 1)."""
    values = MetricValues(e2U=1.0, A=0.0, k=0.0, e2k=1.0)
    element = line_element(values, rho=1.7, zeta=-0.3)
    assert element.as_tuple() == pytest.approx((-1.0, 0.0, 1.7**2, 1.0, 1.0))


@pytest.mark.unit
def test_flat_solution_metric_functions(flat_solution):
    """Scenario 2: p = q = 0 gives e^{2U} = 1, e^{2k} = K and a constant A."""
    probe = flat_solution.probe_xi
    values = [metric_values(flat_solution, xi, A0=0.0, K=2.5) for xi in (probe, probe + 0.4 - 0.3j)]
    for v in values:
        assert v.e2U == pytest.approx(1.0, abs=1e-12)
        assert v.e2k == pytest.approx(2.5, rel=1e-12)
    assert abs(values[0].A - values[1].A) < 1e-9


@pytest.mark.unit
def test_e2U_is_real_part_of_potential(ernst_solution):
    """Scenario 3: e^{2U} = Re ℰ and A carries no imaginary part."""
    for xi in (ernst_solution.probe_xi, ernst_solution.probe_xi + 0.3):
        values = metric_values(ernst_solution, xi)
        assert abs(values.e2U - evaluate(ernst_solution, xi).E.real) < 1e-10
        assert abs(values.imag_A) < 1e-8 * max(1.0, abs(values.A))
        assert np.isfinite([values.e2U, values.A, values.k]).all()


@pytest.mark.unit
def test_integration_constants_act_uniformly(ernst_solution):
    """Scenario 4: A₀ shifts A and K rescales e^{2k}."""
    xi = ernst_solution.probe_xi
    assert metric_A(ernst_solution, xi, A0=1.5) - metric_A(ernst_solution, xi) == pytest.approx(1.5, abs=1e-12)
    ratio = metric_e2k_complex(ernst_solution, xi, K=3.0) / metric_e2k_complex(ernst_solution, xi)
    assert abs(ratio - 3.0) < 1e-13
    assert metric_k(ernst_solution, xi, K=np.e**2) == pytest.approx(metric_k(ernst_solution, xi) + 1.0)


@pytest.mark.unit
def test_block_determinant(ernst_solution):
    """Scenario 5: The t-φ block has determinant −ρ²."""
    xi = ernst_solution.probe_xi - 0.2j
    rho, zeta = -xi.imag, xi.real
    element = line_element(metric_values(ernst_solution, xi, A0=0.4), rho, zeta)
    assert element.block_determinant == pytest.approx(-(rho**2), rel=1e-10)
    assert element.g_rhorho == element.g_zetazeta
