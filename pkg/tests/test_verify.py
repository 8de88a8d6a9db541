import logging

import numpy as np
import pytest

from ernst_theta.config import settings
from ernst_theta.exceptions import ConfigParse, ThetaDivisorHit
from ernst_theta.solution.ernst import check_reality
from ernst_theta.surface.curve import segment_distance
from ernst_theta.schemas.common import CheckReport
from ernst_theta.verify.base import merge_reports, normalized_residual, run_check
from ernst_theta.verify.propositions import FLAT_TRIVIAL, PROPOSITION_NAMES, f2_residual, proposition_suite
from ernst_theta.verify.sampling import make_rng, sample_solution, sample_xi, sample_xi_near
from ernst_theta.verify.suite import GROUPS, SuiteContext, available_checks, run_suite, select_groups
from ernst_theta.verify.variational import rauch_suite

logging.getLogger("ernst_theta").setLevel(logging.WARNING)


# ============================================================================
# REPORT PLUMBING
# ============================================================================


@pytest.mark.unit
def test_normalized_residual():
    """Scenario 1: Residuals are scaled by the largest term."""
    assert normalized_residual(2.0, 2.0) == 0.0
    assert normalized_residual(1.0, 0.0, 4.0) == pytest.approx(0.25)
    assert normalized_residual(0.0, 0.0) == 0.0
    assert normalized_residual(float("inf"), 1.0) == float("inf")


@pytest.mark.unit
def test_run_check_turns_errors_into_failed_reports():
    """Scenario 2: Library errors never escape a check."""

    def boom():
        raise ThetaDivisorHit("Theta_pq(u-) vanishes", details={"xi": "1-1i"})

    report = run_check("boom", 1e-8, boom)
    assert not report.passed
    assert report.error["error"] == "theta_divisor_hit"
    assert report.residual > 1e300

    ok = run_check("ok", 1e-8, lambda: (1e-10, {"genus": 1}))
    assert ok.passed and ok.inputs == {"genus": 1}
    assert "timestamp" not in ok.to_record()


@pytest.mark.unit
def test_merge_reports_keeps_the_worst_sample():
    """Scenario 3: A merged report fails if any sample fails."""
    reports = [
        CheckReport(name="s", residual=1e-10, tolerance=1e-8, passed=True),
        CheckReport(name="s", residual=1e-6, tolerance=1e-8, passed=False),
    ]
    merged = merge_reports("fay", reports)
    assert merged.residual == 1e-6
    assert not merged.passed
    assert merged.inputs["samples"] == 2
    with pytest.raises(ValueError):
        merge_reports("fay", [])


# ============================================================================
# VARIATIONAL AND PROPOSITION CHECKS
# ============================================================================


@pytest.mark.integration
def test_rauch_suite_genus1(genus1_curve, genus1_periods):
    """Scenario 4: Rauch formulas and the heat equation on the real genus-1 curve."""
    report = rauch_suite(genus1_curve, genus1_periods, make_rng(3))
    assert report.passed, report.inputs["components"]
    assert {"Rauch2", "c10", "heat1", "heat"} <= set(report.inputs["components"])


@pytest.mark.integration
def test_propositions_hold_for_admissible_solution(ernst_solution):
    """Scenario 5: Every proposition identity passes at the probe point."""
    reports = proposition_suite(ernst_solution, ernst_solution.probe_xi, make_rng(4))
    assert [r.name for r in reports] == list(PROPOSITION_NAMES)
    failed = {r.name: r.residual for r in reports if not r.passed}
    assert not failed


@pytest.mark.integration
def test_propositions_on_flat_solution_skip_trivial_checks(flat_solution):
    """Scenario 6: Identities that vanish identically for p = q = 0 are skipped."""
    reports = proposition_suite(flat_solution, flat_solution.probe_xi, make_rng(4))
    for report in reports:
        if report.name in FLAT_TRIVIAL:
            assert report.residual == 0.0
            assert report.inputs["skipped"] == "flat"
    assert all(report.passed for report in reports)


@pytest.mark.unit
def test_proposition_subset(ernst_solution):
    """Scenario 7: A subset runs in declaration order."""
    reports = proposition_suite(ernst_solution, ernst_solution.probe_xi, make_rng(4), ["strange", "E+Ebar"])
    assert [r.name for r in reports] == ["E+Ebar", "strange"]
    assert all(r.passed for r in reports)


@pytest.mark.unit
def test_k_identity_at_random_shifts(ernst_solution):
    """Scenario 8: The k identity holds for random V = Bp + q."""
    st = ernst_solution.state(ernst_solution.probe_xi)
    rng = make_rng(12)
    for _ in range(3):
        p, q = rng.uniform(-0.5, 0.5, size=1), rng.uniform(-0.5, 0.5, size=1)
        assert f2_residual(st, st.periods.B @ p + q) < 1e-8


# ============================================================================
# SUITE
# ============================================================================


@pytest.mark.unit
def test_select_groups():
    """Scenario 9: Proposition names pull in their group; unknown names are rejected."""
    assert select_groups(None) == list(GROUPS)
    assert select_groups(["fay_trisecant"]) == ["fay_trisecant"]
    assert select_groups(["axi", "rauch_suite"]) == ["rauch_suite", "propositions"]
    assert set(available_checks()) >= set(GROUPS)
    with pytest.raises(ConfigParse):
        select_groups(["no_such_check"])


@pytest.mark.integration
def test_run_suite_single_group(ernst_solution):
    """Scenario 10: --only fay_trisecant runs one merged report."""
    ctx = SuiteContext(ernst_solution, ernst_solution.probe_xi, seed=42)
    summary = run_suite(ctx, ["fay_trisecant"], threads=2)
    assert summary.kind == "check"
    assert [r.name for r in summary.reports] == ["fay_trisecant"]
    assert summary.ok
    assert summary.reports[0].inputs["samples"] == ctx.samples


@pytest.mark.integration
def test_run_suite_is_deterministic(ernst_solution):
    """Scenario 11: The same seed gives the same residuals."""
    ctx = SuiteContext(ernst_solution, ernst_solution.probe_xi, seed=5)
    first = run_suite(ctx, ["fay_degenerate2", "strange"])
    second = run_suite(ctx, ["fay_degenerate2", "strange"])
    assert [r.residual for r in first.reports] == [r.residual for r in second.reports]
    assert [r.name for r in first.reports] == ["fay_degenerate2", "strange"]


@pytest.mark.unit
def test_tolerance_override(ernst_solution):
    """Scenario 12: A global tolerance replaces relative tolerances but not the order tolerance."""
    ctx = SuiteContext(ernst_solution, ernst_solution.probe_xi, seed=1)
    summary = run_suite(ctx, ["E+Ebar", "fd_order"], tolerance=1e-300)
    by_name = {r.name: r for r in summary.reports}
    assert by_name["fd_order"].tolerance == 0.1
    assert by_name["E+Ebar"].tolerance == 1e-300
    assert summary.tolerance == 1e-300


# ============================================================================
# SAMPLING OF ξ
# ============================================================================

# a conjugate pair and a real pair with a gap between them
SPREAD_PAIRS = [(-1.0 + 0.5j, -1.0 - 0.5j), (1.0 + 0j, 2.0 + 0j)]


@pytest.mark.unit
def test_sample_xi_covers_the_plane_off_the_cuts():
    """Scenario 13: ξ lands left of, between and beyond the pairs, never near a cut."""
    rng = make_rng(21)
    points = [sample_xi(rng, SPREAD_PAIRS) for _ in range(60)]
    for xi in points:
        assert 0.3 <= -xi.imag <= 2.0
        assert all(segment_distance(xi, xi.conjugate(), e, f) >= 0.4 for e, f in SPREAD_PAIRS)
    assert any(xi.real < -1.0 for xi in points)
    assert any(-1.0 < xi.real < 1.0 for xi in points)
    assert any(xi.real > 2.0 for xi in points)


@pytest.mark.unit
def test_sample_xi_near_stays_in_its_strip():
    """Scenario 14: Points near ξ keep ζ between the same pairs and ρ above 0.3."""
    rng = make_rng(22)
    xi = 0.0 - 1.0j
    points = sample_xi_near(rng, SPREAD_PAIRS, xi, 10)
    assert len(points) == 10
    for x in points:
        assert -1.0 < x.real < 1.0
        assert x.imag <= -0.3
        assert abs(x.real - xi.real) <= 0.5


@pytest.mark.unit
def test_suite_draws_twenty_samples_by_default(ernst_solution):
    """Scenario 15: Each randomized check is repeated over 20 draws."""
    ctx = SuiteContext(ernst_solution, ernst_solution.probe_xi, seed=1)
    assert ctx.samples == 20


@pytest.mark.integration
def test_xi_dependent_checks_run_around_xi(ernst_solution):
    """Scenario 16: ErE, Epoxi and Epoxibar report every point they were evaluated at."""
    reports = proposition_suite(ernst_solution, ernst_solution.probe_xi, make_rng(4), ["ErE", "Epoxi", "Epoxibar"])
    for report in reports:
        assert report.passed, (report.name, report.residual)
        assert len(report.inputs["points"]) >= 2
        assert report.inputs["worst"] in report.inputs["points"]


@pytest.mark.slow
@pytest.mark.parametrize("genus", [1, 2])
def test_random_solutions_are_real_and_solve_the_equation(genus):
    """Scenario 17: Random pairs and ξ anywhere off the cuts give real solutions of the Ernst equation."""
    rng = make_rng(30 + genus)
    for _ in range(3):
        sol, xi = sample_solution(rng, genus)
        assert check_reality(sol, xi) < settings.reality_tol
        reports = proposition_suite(sol, xi, rng, ["E+Ebar", "ErE"])
        failed = {r.name: r.residual for r in reports if not r.passed}
        assert not failed
        assert np.isfinite([r.residual for r in reports]).all()
