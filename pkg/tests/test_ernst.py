import logging

import numpy as np
import pytest

from ernst_theta.config import settings
from ernst_theta.exceptions import OnAxis, RealityViolation, SignCalibrationFailed
from ernst_theta.schemas.common import JobConfig
from ernst_theta.solution.ernst import (
    ErnstSolution,
    SignGates,
    check_reality,
    convergence_order,
    d_xi,
    d_xibar,
    default_probe,
    ernst_residual,
    evaluate,
    fd_step,
    fd_wirtinger,
    laplace,
    reality_invariant,
)
from ernst_theta.solution.grid import apply_job_settings, grid_points, solution_from_config
from ernst_theta.theta.characteristics import Characteristics
from tests.conftest import ERNST_PAIRS

logging.getLogger("ernst_theta").setLevel(logging.WARNING)


def nearby(probe: complex):
    """Regular points around the probe, all with ρ > 0."""
    return [probe, probe + 0.3, probe - 0.2j, probe - 0.25 + 0.15j]


# ============================================================================
# POTENTIAL
# ============================================================================


@pytest.mark.unit
def test_default_probe_lies_right_of_the_pairs():
    """Scenario 1: The probe point has ρ > 0 and ζ beyond every branch point."""
    probe = default_probe(ERNST_PAIRS)
    assert probe.imag < 0
    assert probe.real > max(x.real for pair in ERNST_PAIRS for x in pair)


@pytest.mark.unit
def test_admissible_solution_is_real(ernst_solution):
    """Scenario 2: The sheet conjugate equals conj ℰ for admissible characteristics."""
    for xi in nearby(ernst_solution.probe_xi):
        value = evaluate(ernst_solution, xi)
        assert np.isfinite(value.E)
        assert value.reality_defect < settings.reality_tol
        assert value.e2U == value.E.real
    assert check_reality(ernst_solution) < settings.reality_tol


@pytest.mark.unit
def test_non_admissible_characteristics_rejected(ernst_solution):
    """Scenario 3: Re q off the admissible lattice breaks the reality condition."""
    sol = ErnstSolution(ERNST_PAIRS, Characteristics.of([0.0], [0.1 + 0.1j]), probe_xi=ernst_solution.probe_xi)
    with pytest.raises(RealityViolation):
        check_reality(sol)


@pytest.mark.unit
def test_flat_solution_is_one(flat_solution):
    """Scenario 4: p = q = 0 gives ℰ ≡ 1 and vanishing derivatives."""
    assert flat_solution.is_flat
    for xi in nearby(flat_solution.probe_xi):
        assert abs(evaluate(flat_solution, xi).E - 1.0) < 1e-12
        assert d_xi(flat_solution, xi) == 0
        assert d_xibar(flat_solution, xi) == 0
        assert laplace(flat_solution, xi) == 0
        assert ernst_residual(flat_solution, xi) == 0.0
    assert flat_solution.signs == SignGates(probe=flat_solution.probe_xi)


@pytest.mark.unit
def test_on_axis_rejected(ernst_solution):
    """Scenario 5: ρ = 0 is outside the domain."""
    with pytest.raises(OnAxis):
        evaluate(ernst_solution, 2.0 + 0.0j)


@pytest.mark.unit
def test_genus_mismatch_is_a_programming_error():
    """Scenario 6: Characteristics must match the number of pairs."""
    with pytest.raises(ValueError):
        ErnstSolution(ERNST_PAIRS, Characteristics.zero(2))


@pytest.mark.unit
def test_state_is_cached(ernst_solution):
    """Scenario 7: Repeated ξ reuse the per-ξ state."""
    xi = ernst_solution.probe_xi + 0.1
    assert ernst_solution.state(xi) is ernst_solution.state(xi)


# ============================================================================
# DERIVATIVES AND THE ERNST EQUATION
# ============================================================================


@pytest.mark.unit
def test_sign_calibration_is_tight(ernst_solution):
    """Scenario 8: The calibrated signs reproduce finite differences at the probe."""
    gates = ernst_solution.signs
    assert gates.probe == ernst_solution.probe_xi
    assert {gates.xi, gates.xibar, gates.laplace} <= {-1, 1}
    assert max(gates.errors[:2]) < settings.derivative_tol


@pytest.mark.unit
def test_wirtinger_derivatives_match_differences_away_from_probe(ernst_solution):
    """Scenario 9: Signs fixed at the probe stay valid on the connected region."""
    xi = ernst_solution.probe_xi + 0.3 - 0.2j

    def potential(x):
        return evaluate(ernst_solution, x).E

    fd_xi, fd_xibar = fd_wirtinger(potential, xi, fd_step(xi))
    exact_xi, exact_xibar = d_xi(ernst_solution, xi), d_xibar(ernst_solution, xi)
    assert abs(fd_xi - exact_xi) < settings.derivative_tol * max(1.0, abs(exact_xi))
    assert abs(fd_xibar - exact_xibar) < settings.derivative_tol * max(1.0, abs(exact_xibar))


@pytest.mark.unit
def test_difference_quotient_converges_at_second_order(ernst_solution):
    """Scenario 10: The central-difference error of ℰ_ξ falls like h²."""
    xi = ernst_solution.probe_xi

    def potential(x):
        return evaluate(ernst_solution, x).E

    exact = d_xi(ernst_solution, xi)
    order = convergence_order(lambda h: fd_wirtinger(potential, xi, h)[0], exact, h0=0.02)
    assert abs(order - 2.0) < 0.2


@pytest.mark.unit
def test_ernst_equation_genus1(ernst_solution):
    """Scenario 11: (ℰ + ℰ̄)Δℰ/4 = 2ℰ_ξℰ_ξ̄ at regular points."""
    for xi in nearby(ernst_solution.probe_xi):
        assert ernst_residual(ernst_solution, xi) < 1e-7


@pytest.mark.slow
def test_ernst_equation_genus2(ernst_solution_g2):
    """Scenario 12: The same at genus 2."""
    for xi in nearby(ernst_solution_g2.probe_xi):
        assert ernst_residual(ernst_solution_g2, xi) < 1e-7


@pytest.mark.unit
def test_corrupted_periods_break_the_equation(ernst_solution):
    """Scenario 13: Shifting B by 1e-3 is caught by the sign gate or leaves a residual far above tolerance."""
    sol = ErnstSolution(
        ERNST_PAIRS,
        ernst_solution.chars,
        probe_xi=ernst_solution.probe_xi,
        corrupt_b=1e-3,
    )
    xi = ernst_solution.probe_xi + 0.3
    try:
        residual = ernst_residual(sol, xi)
    except SignCalibrationFailed:
        return
    assert residual > 1e-6


# ============================================================================
# JOB CONFIGURATION
# ============================================================================


@pytest.mark.unit
def test_solution_from_config_is_admissible_and_reproducible():
    """Scenario 14: Without p and q the characteristics are admissible and seeded."""
    config = JobConfig.from_mapping({"pairs": "-1+0.5i,-1-0.5i", "seed": 7})
    first = solution_from_config(config)
    second = solution_from_config(config)
    np.testing.assert_array_equal(first.chars.q_vec, second.chars.q_vec)
    np.testing.assert_array_equal(first.chars.p_vec, np.zeros(1))
    assert abs(first.chars.q_vec[0].imag) <= 0.3
    assert check_reality(first) < settings.reality_tol
    assert solution_from_config(config, seed=8).chars.q_vec[0] != first.chars.q_vec[0]


@pytest.mark.unit
def test_solution_from_config_explicit_characteristics():
    """Scenario 15: Explicit p and q are taken as given."""
    config = JobConfig.from_mapping({"pairs": "-1+0.5i,-1-0.5i", "p": "0", "q": "0", "probe_xi": "2-1i"})
    sol = solution_from_config(config)
    assert sol.is_flat
    assert sol.probe_xi == 2 - 1j


@pytest.mark.unit
def test_job_settings_only_copy_given_fields(settings_override):
    """Scenario 16: Tolerances absent from the document keep their settings value."""
    settings_override(derivative_tol=settings.derivative_tol, fd_step=settings.fd_step)
    settings_override(algebraic_tol_genus1=settings.algebraic_tol_genus1)
    settings_override(algebraic_tol_higher=settings.algebraic_tol_higher)
    settings_override(derivative_tol=3e-5)
    apply_job_settings(JobConfig.from_mapping({"pairs": "-1+0.5i,-1-0.5i", "fd_step": 2e-5, "algebraic_tol": 1e-6}))
    assert settings.derivative_tol == 3e-5
    assert settings.fd_step == 2e-5
    assert settings.algebraic_tolerance(1) == settings.algebraic_tolerance(3) == 1e-6


@pytest.mark.unit
def test_grid_points_order():
    """Scenario 17: ρ is the outer loop and ζ the inner one."""
    config = JobConfig.from_mapping(
        {"pairs": "-1+0.5i,-1-0.5i", "rho_min": 1, "rho_max": 2, "n_rho": 2, "zeta_min": 0, "zeta_max": 1, "n_zeta": 3}
    )
    assert grid_points(config) == [(1.0, 0.0), (1.0, 0.5), (1.0, 1.0), (2.0, 0.0), (2.0, 0.5), (2.0, 1.0)]


# ============================================================================
# REALITY CONDITION
# ============================================================================


@pytest.mark.unit
def test_reality_invariant_vanishes_for_admissible_characteristics(ernst_solution):
    """Scenario 18: Admissible [p, q] have zero invariant and a free Im q."""
    for xi in nearby(ernst_solution.probe_xi):
        B = ernst_solution.state(xi).periods.B
        assert reality_invariant(B, ernst_solution.chars) < 1e-10
        shifted = Characteristics.of(ernst_solution.chars.p_vec, ernst_solution.chars.q_vec + 0.5j)
        assert reality_invariant(B, shifted) < 1e-10


@pytest.mark.unit
def test_reality_invariant_measures_real_part_offsets(ernst_solution):
    """Scenario 19: Real q = 0.3 and complex p are far from the admissible set."""
    B = ernst_solution.state(ernst_solution.probe_xi).periods.B
    assert reality_invariant(B, Characteristics.of([0.0], [0.3])) > 0.05
    assert reality_invariant(B, Characteristics.of([0.1j], ernst_solution.chars.q_vec)) >= 0.1 - 1e-12
    sol = ErnstSolution(ERNST_PAIRS, Characteristics.of([0.0], [0.3]), probe_xi=ernst_solution.probe_xi)
    with pytest.raises(RealityViolation) as excinfo:
        check_reality(sol)
    assert excinfo.value.details["invariant"] > 0.05


@pytest.mark.unit
def test_corrupted_periods_fail_the_reality_invariant(ernst_solution):
    """Scenario 20: Re B off the half-integers is rejected before ℰ is evaluated."""
    sol = ErnstSolution(ERNST_PAIRS, ernst_solution.chars, probe_xi=ernst_solution.probe_xi, corrupt_b=1e-3)
    with pytest.raises(RealityViolation) as excinfo:
        check_reality(sol)
    assert excinfo.value.details["invariant"] >= 2e-3 - 1e-9


@pytest.mark.unit
def test_residual_uses_complex_conjugate(ernst_solution):
    """Scenario 21: E_conj is conj ℰ, and the sheet conjugate only matches it for admissible [p, q]."""
    xi = ernst_solution.probe_xi + 0.3
    value = evaluate(ernst_solution, xi)
    assert value.E_conj == complex(np.conj(value.E))
    assert abs(value.E_conj - value.conj_sheet) < settings.reality_tol * abs(value.E)
    assert ernst_residual(ernst_solution, xi) < 1e-7

    sol = ErnstSolution(ERNST_PAIRS, Characteristics.of([0.0], [0.3]), probe_xi=ernst_solution.probe_xi)
    other = evaluate(sol, xi)
    rhs = 2.0 * d_xi(sol, xi) * d_xibar(sol, xi)
    paired = (other.E + other.conj_sheet) * laplace(sol, xi) / 4.0
    # the theta identities hold with the sheet conjugate for any [p, q]
    assert abs(paired - rhs) < 1e-7 * max(abs(paired), abs(rhs))
    assert ernst_residual(sol, xi) > 1e-6


@pytest.mark.unit
def test_sign_gate_raises_when_formulas_disagree(ernst_solution, settings_override):
    """Scenario 22: A derivative tolerance below the finite-difference error stops calibration."""
    settings_override(derivative_tol=1e-15)
    sol = ErnstSolution(ERNST_PAIRS, ernst_solution.chars, probe_xi=ernst_solution.probe_xi)
    with pytest.raises(SignCalibrationFailed) as excinfo:
        sol.signs
    assert excinfo.value.details["tolerance"] == 1e-15
    assert excinfo.value.to_dict()["error"] == "sign_calibration_failed"
    assert np.isfinite(evaluate(sol, sol.probe_xi).E)
