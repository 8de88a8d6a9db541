"""
Command Line Interface

Reads a job configuration document, evaluates ℰ and the metric functions on a
(ρ, ζ) grid and/or runs the identity suite, and writes CSV data plus a JSON
report.

Exit codes:
    0  success
    1  configuration or setup error
    2  tolerance failure
"""

import sys
from pathlib import Path
from typing import Optional, Sequence

import click
import orjson

from ernst_theta.config import settings
from ernst_theta.exceptions import ConfigParse, ErnstThetaError
from ernst_theta.logger import get_logger, setup_logging
from ernst_theta.schemas.common import JobConfig
from ernst_theta.solution.ernst import check_reality
from ernst_theta.solution.grid import apply_job_settings, run_grid, solution_from_config, write_grid_csv
from ernst_theta.verify.suite import SuiteContext, run_suite, select_groups

logger = get_logger(__name__)

EXIT_OK = 0
EXIT_SETUP = 1
EXIT_TOLERANCE = 2


def _emit(payload, target: Optional[str], err: bool = False) -> None:
    """Write a JSON document to ``target``, or to stdout/stderr."""
    data = orjson.dumps(payload, option=orjson.OPT_INDENT_2 | orjson.OPT_SERIALIZE_NUMPY)
    if target:
        path = Path(target)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(data + b"\n")
    else:
        click.echo(data.decode("utf-8"), err=err)


def _fail(exc: ErnstThetaError) -> None:
    logger.error(f"Setup failed: {exc.message}", extra=exc.to_dict())
    _emit(exc.to_dict(), None, err=True)
    sys.exit(EXIT_SETUP)


@click.command(context_settings={"help_option_names": ["-h", "--help"]})
@click.option("--config", "config_path", required=True, type=click.Path(dir_okay=False), help="Job configuration document (flat YAML).")
@click.option("--check", "do_check", is_flag=True, help="Run the identity suite.")
@click.option("--grid", "do_grid", is_flag=True, help="Evaluate the (rho, zeta) grid (default mode).")
@click.option("--only", multiple=True, help="Restrict --check to a group or proposition name (repeatable).")
@click.option("--tolerance", type=float, default=None, help="Override every relative-residual tolerance.")
@click.option("--seed", type=int, default=None, help="RNG seed (overrides the configuration).")
@click.option("--out", "out_path", default=None, help="CSV path for --grid, report path for --check alone.")
@click.option("--threads", type=int, default=None, help="Worker count (falls back to ERNST_THETA_THREADS).")
@click.option("--quiet", is_flag=True, help="Disable the progress bar.")
def main(
    config_path: str,
    do_check: bool,
    do_grid: bool,
    only: Sequence[str],
    tolerance: Optional[float],
    seed: Optional[int],
    out_path: Optional[str],
    threads: Optional[int],
    quiet: bool,
) -> None:
    """Evaluate theta-functional Ernst solutions and verify their identities."""
    setup_logging()
    if not do_check and not do_grid:
        do_grid = True

    # setup: every failure here exits with 1
    try:
        if tolerance is not None and tolerance <= 0:
            raise ConfigParse("Tolerance must be positive", details={"tolerance": tolerance})
        config = JobConfig.load(config_path)
        seed = config.seed if seed is None else seed
        names = list(only) or config.checks
        if do_check:
            select_groups(names)
        apply_job_settings(config)
        sol = solution_from_config(config, seed)
        if not sol.is_flat:
            check_reality(sol)
        sol.signs
    except ErnstThetaError as exc:
        _fail(exc)
        return

    threads = threads or settings.threads
    summaries = []
    csv_on_stdout = False

    try:
        if do_grid:
            rows, grid_summary = run_grid(config, sol, threads=threads, quiet=quiet, tolerance=tolerance)
            target = out_path or config.grid_out
            csv_on_stdout = target is None
            write_grid_csv(rows, target)
            summaries.append(grid_summary)

        if do_check:
            ctx = SuiteContext(sol, sol.probe_xi, seed)
            summaries.append(run_suite(ctx, names, threads=threads, tolerance=tolerance))
    except ErnstThetaError as exc:
        _fail(exc)
        return

    report_target = config.report_out
    if report_target is None and do_check and not do_grid:
        report_target = out_path
    _emit(
        {
            "config": str(config_path),
            "seed": seed,
            "ok": all(summary.ok for summary in summaries),
            "runs": [summary.to_record() for summary in summaries],
        },
        report_target,
        err=csv_on_stdout,
    )

    failed = [summary.kind for summary in summaries if not summary.ok]
    if failed:
        logger.warning("Tolerance failure", extra={"runs": failed})
        sys.exit(EXIT_TOLERANCE)
    sys.exit(EXIT_OK)


if __name__ == "__main__":
    main()
