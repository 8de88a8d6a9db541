import logging

import numpy as np
import pytest
from scipy.special import ellipk

from ernst_theta.exceptions import HomologyMismatch
from ernst_theta.surface.curve import SurfacePoint, new_ernst_curve, new_general_curve
from ernst_theta.surface.paths import PathPlanner
from ernst_theta.surface.periods import (
    _symmetrize,
    abel,
    check_intersections,
    compute_periods,
    eval_normalized_diff,
    plan_b_paths,
    third_kind,
)
from ernst_theta.verify.sampling import make_rng, sample_general_curve, sample_pairs, sample_xi
from tests.conftest import GENUS1_BRANCH

logging.getLogger("ernst_theta").setLevel(logging.WARNING)


def lattice_distance(B: np.ndarray, d: np.ndarray) -> float:
    """Distance of d from the lattice ℤ^g + Bℤ^g."""
    n = np.round(np.linalg.solve(B.imag, d.imag))
    rest = d - B @ n
    return float(np.max(np.abs(rest - np.round(rest.real))))


@pytest.mark.unit
def test_genus1_period_matches_elliptic_oracle(genus1_periods):
    """Scenario 1: Im B = K(k')/K(k) for four real branch points."""
    e1, e2, e3, e4 = GENUS1_BRANCH
    m = (e4 - e3) * (e2 - e1) / ((e4 - e2) * (e3 - e1))
    expected = ellipk(1.0 - m) / ellipk(m)
    B = genus1_periods.B[0, 0]
    assert abs(B.imag - expected) < 1e-9
    # b-cycle leaves from the first cut: Re B is a half integer
    assert abs(2.0 * B.real - round(2.0 * B.real)) < 1e-9


@pytest.mark.unit
def test_a_periods_are_normalized(genus2_periods):
    """Scenario 2: The a-periods of the normalized differentials form the identity."""
    normalized = genus2_periods.coeff @ genus2_periods.A_mat.T
    np.testing.assert_allclose(normalized, np.eye(2), atol=1e-10)


@pytest.mark.unit
def test_genus2_riemann_matrix(genus2_periods):
    """Scenario 3: B is symmetric with positive definite imaginary part."""
    B = genus2_periods.B
    assert np.max(np.abs(B - B.T)) < 1e-10
    assert np.all(np.linalg.eigvalsh(B.imag) > 0)
    assert genus2_periods.quad_order >= 32


@pytest.mark.unit
def test_quad_order_below_minimum_rejected(genus1_curve):
    """Scenario 4: A starting order below 16 is a programming error."""
    with pytest.raises(ValueError):
        compute_periods(genus1_curve, quad_order=8)


@pytest.mark.slow
@pytest.mark.parametrize("genus", [1, 2])
def test_random_curves_give_riemann_matrices(genus):
    """Scenario 5: Random curves give symmetric B with Im B positive definite."""
    rng = make_rng(7)
    for _ in range(10):
        periods = compute_periods(sample_general_curve(rng, genus))
        B = periods.B
        assert np.max(np.abs(B - B.T)) < 1e-10
        assert np.all(np.linalg.eigvalsh(B.imag) > 0)


@pytest.mark.unit
def test_abel_to_xibar_is_half_period(ernst_curve):
    """Scenario 6: ∫_ξ^ξ̄ ω ≡ −½(1, …, 1) modulo the lattice."""
    periods = compute_periods(ernst_curve)
    w = abel(ernst_curve, periods, ernst_curve.xi_point, ernst_curve.xibar_point).value
    assert lattice_distance(periods.B, w + 0.5) < 1e-8


@pytest.mark.unit
def test_abel_infinities_are_antisymmetric(ernst_curve):
    """Scenario 7: ∫_ξ^{∞⁺} ω = −∫_ξ^{∞⁻} ω."""
    periods = compute_periods(ernst_curve)
    xi = ernst_curve.xi_point
    up = abel(ernst_curve, periods, xi, ernst_curve.infinity(1)).value
    down = abel(ernst_curve, periods, xi, ernst_curve.infinity(-1)).value
    np.testing.assert_allclose(up, -down, atol=1e-12)


@pytest.mark.slow
def test_homology_normalization_on_random_ernst_curves():
    """Scenario 8: Half-period and antisymmetry on random Ernst curves of genus 1 and 2."""
    rng = make_rng(11)
    for genus in (1, 2):
        for _ in range(5):
            pairs = sample_pairs(rng, genus)
            curve = new_ernst_curve(sample_xi(rng, pairs), pairs)
            periods = compute_periods(curve)
            xi = curve.xi_point
            w = abel(curve, periods, xi, curve.xibar_point).value
            assert lattice_distance(periods.B, w + 0.5) < 1e-8
            up = abel(curve, periods, xi, curve.infinity(1)).value
            down = abel(curve, periods, xi, curve.infinity(-1)).value
            assert np.max(np.abs(up + down)) < 1e-8


@pytest.mark.unit
def test_abel_is_additive(genus2_curve, genus2_periods):
    """Scenario 9: ∫_x^y + ∫_y^z = ∫_x^z along the canonical lifts."""
    x = SurfacePoint.finite(0.1 + 1.0j, 1)
    y = SurfacePoint.finite(-1.0 - 1.5j, -1)
    z = SurfacePoint.finite(2.5 + 0.8j, 1)
    xy = abel(genus2_curve, genus2_periods, x, y).value
    yz = abel(genus2_curve, genus2_periods, y, z).value
    xz = abel(genus2_curve, genus2_periods, x, z).value
    np.testing.assert_allclose(xy + yz, xz, atol=1e-12)
    assert np.all(abel(genus2_curve, genus2_periods, x, x).value == 0)


@pytest.mark.unit
def test_normalized_differential_matches_abel_derivative(genus2_curve, genus2_periods):
    """Scenario 10: ω/dλ at a finite point is the λ-derivative of the Abel map."""
    lam, h = 0.4 + 1.2j, 1e-5
    base = SurfacePoint.finite(-1.0 + 2.0j, 1)
    plus = abel(genus2_curve, genus2_periods, base, SurfacePoint.finite(lam + h, 1)).value
    minus = abel(genus2_curve, genus2_periods, base, SurfacePoint.finite(lam - h, 1)).value
    exact = eval_normalized_diff(genus2_curve, genus2_periods, SurfacePoint.finite(lam, 1))
    np.testing.assert_allclose((plus - minus) / (2 * h), exact, rtol=1e-6, atol=1e-8)


@pytest.mark.unit
def test_third_kind_normalization(genus1_curve, genus1_periods):
    """Scenario 11: ω_{a,c} has residues +1/−1 and vanishing a-periods."""
    a = SurfacePoint.finite(0.3 + 1.0j, 1)
    c = SurfacePoint.finite(-0.5 - 1.2j, -1)
    omega = third_kind(genus1_curve, genus1_periods, a, c)
    assert abs(omega.residue(a) - 1.0) < 1e-8
    assert abs(omega.residue(c) + 1.0) < 1e-8
    assert np.max(np.abs(omega.a_periods())) < 1e-8


# a vertical cut sits between the base point and the last cut, so b_2 must detour
BLOCKED_BRANCH = [-3.0, -2.0, -1.0 - 1.0j, -1.0 + 1.0j, 1.0, 2.0]


@pytest.mark.unit
def test_intersections_on_detoured_b_paths():
    """Scenario 12: a_α∘b_β is the identity when a b-path has to go around another cut."""
    curve = new_general_curve(BLOCKED_BRANCH)
    b_paths = plan_b_paths(curve, PathPlanner(curve))
    assert len(b_paths[1].vertices) >= 3
    periods = compute_periods(curve)
    np.testing.assert_array_equal(periods.homology.intersections, np.eye(2, dtype=int))
    assert np.max(np.abs(periods.B - periods.B.T)) < 1e-10
    assert np.all(np.linalg.eigvalsh(periods.B.imag) > 0)


@pytest.mark.unit
def test_intersections_detect_mislabelled_paths():
    """Scenario 13: Swapped b-paths give a permutation and are rejected."""
    curve = new_general_curve(BLOCKED_BRANCH)
    b_paths = plan_b_paths(curve, PathPlanner(curve))
    swapped = curve.homology.intersection_matrix([p.vertices for p in reversed(b_paths)], 0.5 * curve.delta_sep)
    np.testing.assert_array_equal(swapped, np.array([[0, 1], [1, 0]]))
    with pytest.raises(HomologyMismatch):
        check_intersections(curve.homology, list(reversed(b_paths)), 0.5 * curve.delta_sep)


@pytest.mark.unit
def test_intersection_sign_follows_path_direction():
    """Scenario 14: A path leaving cut α counts −1 and a path passing by counts 0."""
    curve = new_general_curve(BLOCKED_BRANCH)
    b_paths = plan_b_paths(curve, PathPlanner(curve))
    backwards = tuple(reversed(b_paths[0].vertices))
    around = (curve.homology.base_point, -1.5 + 2.0j, 0.0 + 2.0j)
    matrix = curve.homology.intersection_matrix([backwards, around], 0.5 * curve.delta_sep)
    np.testing.assert_array_equal(matrix, np.array([[-1, 0], [0, 0]]))


@pytest.mark.unit
def test_symmetrize_records_integer_rerouting():
    """Scenario 15: The correction is strictly upper triangular and makes B symmetric."""
    B_raw = np.array([[1.0j, 0.2 + 0.5j], [1.2 + 0.5j, 2.0j]])
    B, correction = _symmetrize(B_raw)
    np.testing.assert_array_equal(correction, np.array([[0, 1], [0, 0]]))
    assert correction.dtype.kind == "i"
    np.testing.assert_allclose(B, B.T, atol=1e-15)
    np.testing.assert_allclose(B - B_raw, correction, atol=1e-15)


@pytest.mark.unit
def test_correction_stored_with_periods(genus2_periods):
    """Scenario 16: compute_periods keeps B − B_raw as the integer correction."""
    correction = genus2_periods.homology.correction
    assert correction is not None
    assert np.all(np.tril(correction) == 0)
    np.testing.assert_allclose(genus2_periods.B - genus2_periods.B_raw, correction, atol=1e-12)
