import csv
import io
import logging

import orjson
import pytest
from click.testing import CliRunner

from ernst_theta.cli import EXIT_OK, EXIT_SETUP, EXIT_TOLERANCE, main
from ernst_theta.config import settings
from ernst_theta.schemas.common import GRID_HEADER

logging.getLogger("ernst_theta").setLevel(logging.WARNING)

FLAT_JOB = """\
pairs: "-1+0.5i,-1-0.5i"
p: "0"
q: "0"
rho_min: 0.8
rho_max: 1.2
n_rho: 2
zeta_min: 1.0
zeta_max: 1.5
n_zeta: 2
"""

ADMISSIBLE_JOB = """\
pairs: "-1+0.5i,-1-0.5i"
seed: 3
rho_min: 0.9
rho_max: 1.1
n_rho: 2
zeta_min: 0.8
zeta_max: 1.2
n_zeta: 2
"""


@pytest.fixture
def cli(tmp_path, settings_override):
    """
    Enterprise Fixture for CLI invocations.
    Returns a runner that writes the YAML job to tmp_path and invokes the command;
    logging handlers and settings touched by the command are restored afterwards.
    """
    settings_override(log_file=str(tmp_path / "logs" / "ernst_theta.log"), log_level="WARNING")
    settings_override(**{name: getattr(settings, name) for name in type(settings).model_fields})
    root = logging.getLogger()
    handlers, level = list(root.handlers), root.level
    runner = CliRunner()

    def invoke(job: str, *args: str, name: str = "job.yaml"):
        path = tmp_path / name
        path.write_text(job, encoding="utf-8")
        return runner.invoke(main, ["--config", str(path), "--quiet", *args])

    yield invoke
    root.handlers[:] = handlers
    root.setLevel(level)


def read_csv(text: str):
    return list(csv.reader(io.StringIO(text)))


# ============================================================================
# SETUP ERRORS
# ============================================================================


@pytest.mark.unit
def test_non_positive_rho_is_a_setup_error(cli):
    """Scenario 1: rho_min = 0 is rejected before any evaluation."""
    result = cli(FLAT_JOB.replace("rho_min: 0.8", "rho_min: 0"))
    assert result.exit_code == EXIT_SETUP
    assert "config_parse" in result.stderr


@pytest.mark.unit
def test_missing_config_file(cli, tmp_path):
    """Scenario 2: An unreadable configuration exits with 1."""
    result = CliRunner().invoke(main, ["--config", str(tmp_path / "absent.yaml"), "--quiet"])
    assert result.exit_code == EXIT_SETUP


@pytest.mark.unit
@pytest.mark.parametrize("args", [["--check", "--only", "no_such_check"], ["--tolerance", "-1"]])
def test_bad_options_are_setup_errors(cli, args):
    """Scenario 3: Unknown check names and non-positive tolerances exit with 1."""
    assert cli(FLAT_JOB, *args).exit_code == EXIT_SETUP


@pytest.mark.unit
def test_nested_config_rejected(cli):
    """Scenario 4: The job document must be a flat mapping."""
    result = cli(FLAT_JOB + "grid:\n  n: 3\n")
    assert result.exit_code == EXIT_SETUP


# ============================================================================
# GRID MODE
# ============================================================================


@pytest.mark.integration
def test_flat_grid(cli, tmp_path):
    """Scenario 5: The flat job writes ℰ = 1 rows and a passing report."""
    out = tmp_path / "grid.csv"
    result = cli(FLAT_JOB, "--grid", "--out", str(out))
    assert result.exit_code == EXIT_OK, result.stderr

    rows = read_csv(out.read_text(encoding="utf-8"))
    assert tuple(rows[0]) == GRID_HEADER
    assert len(rows) == 5
    assert [(float(r[0]), float(r[1])) for r in rows[1:]] == [(0.8, 1.0), (0.8, 1.5), (1.2, 1.0), (1.2, 1.5)]
    for row in rows[1:]:
        record = dict(zip(GRID_HEADER, row))
        assert float(record["re_E"]) == pytest.approx(1.0, abs=1e-12)
        assert float(record["ernst_residual"]) < 1e-10
        assert record["mask"] == "0"
    assert len({row[6] for row in rows[1:]}) == 1

    report = orjson.loads(result.stdout)
    assert report["ok"] is True
    assert report["runs"][0]["kind"] == "grid"
    assert report["runs"][0]["total"] == 4


@pytest.mark.integration
def test_grid_csv_on_stdout(cli):
    """Scenario 6: Without --out the CSV goes to stdout and the report to stderr."""
    result = cli(FLAT_JOB)
    assert result.exit_code == EXIT_OK
    assert result.stdout.splitlines()[0] == ",".join(GRID_HEADER)
    assert '"kind": "grid"' in result.stderr


@pytest.mark.integration
def test_grid_output_is_reproducible(cli, tmp_path):
    """Scenario 7: Two runs with different worker counts write byte-identical CSV."""
    first, second = tmp_path / "a.csv", tmp_path / "b.csv"
    assert cli(ADMISSIBLE_JOB, "--out", str(first), "--threads", "1").exit_code == EXIT_OK
    assert cli(ADMISSIBLE_JOB, "--out", str(second), "--threads", "4").exit_code == EXIT_OK
    assert first.read_bytes() == second.read_bytes()


# ============================================================================
# CHECK MODE
# ============================================================================


@pytest.mark.integration
def test_check_only_one_group(cli, tmp_path):
    """Scenario 8: --check --only fay_trisecant writes a single-report summary to --out."""
    out = tmp_path / "report.json"
    result = cli(ADMISSIBLE_JOB, "--check", "--only", "fay_trisecant", "--out", str(out))
    assert result.exit_code == EXIT_OK, result.stderr
    report = orjson.loads(out.read_bytes())
    assert report["seed"] == 3
    (run,) = report["runs"]
    assert run["kind"] == "check"
    assert [r["name"] for r in run["reports"]] == ["fay_trisecant"]
    assert run["reports"][0]["passed"] is True


@pytest.mark.integration
def test_seed_option_overrides_config(cli):
    """Scenario 9: --seed replaces the seed of the document."""
    result = cli(FLAT_JOB, "--check", "--only", "fay_degenerate2", "--seed", "11")
    assert result.exit_code == EXIT_OK
    assert orjson.loads(result.stdout)["seed"] == 11


@pytest.mark.integration
def test_corrupted_periods_exit_with_tolerance_failure(cli):
    """Scenario 10: Shifting B by 1e-3 makes the trisecant check fail with exit code 2."""
    result = cli(FLAT_JOB + "corrupt_b: 0.001\n", "--check", "--only", "fay_trisecant")
    assert result.exit_code == EXIT_TOLERANCE
    report = orjson.loads(result.stdout)
    assert report["ok"] is False
    assert report["runs"][0]["reports"][0]["residual"] > 1e-6


@pytest.mark.integration
def test_sign_gate_failure_is_a_setup_error(cli):
    """Scenario 11: Derivative formulas that miss the finite differences stop the run with exit code 1."""
    result = cli(ADMISSIBLE_JOB + "derivative_tol: 1.0e-15\n", "--check", "--only", "fay_trisecant")
    assert result.exit_code == EXIT_SETUP
    assert "sign_calibration_failed" in result.stderr


@pytest.mark.integration
def test_corrupted_periods_of_non_flat_solution_fail_reality(cli):
    """Scenario 12: With non-zero characteristics a shifted B breaks the reality invariant first."""
    result = cli(ADMISSIBLE_JOB + "corrupt_b: 0.001\n", "--check", "--only", "fay_trisecant")
    assert result.exit_code == EXIT_SETUP
    assert "reality_violation" in result.stderr
