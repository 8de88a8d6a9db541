"""
Grid Evaluation

Evaluates ℰ, the metric functions and the Ernst residual on a (ρ, ζ) grid over a
thread pool. Rows come back in grid order whatever the completion order, and
failures are localized to their point as a mask.
"""

import csv
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import List, Optional, Tuple, Union

import numpy as np
from tqdm import tqdm

from ernst_theta.config import settings
from ernst_theta.exceptions import ErnstThetaError, SolutionError
from ernst_theta.logger import get_logger, log_grid_point
from ernst_theta.schemas.common import GRID_HEADER, GridRow, JobConfig, RunSummary
from ernst_theta.solution.ernst import (
    ErnstSolution,
    admissible_characteristics,
    default_probe,
    ernst_residual,
    evaluate,
)
from ernst_theta.solution.metric import metric_values
from ernst_theta.surface.curve import new_ernst_curve
from ernst_theta.theta.characteristics import Characteristics

logger = get_logger(__name__)

MASK_REGULAR = 0
MASK_DIVISOR = 1
MASK_ERROR = 2


# ============================================================================
# SETUP
# ============================================================================


def apply_job_settings(config: JobConfig) -> None:
    """Copy the tolerances set in a job document onto the global settings."""
    given = config.model_fields_set
    for name in ("theta_tol", "derivative_tol", "fd_step", "quad_order"):
        if name in given and getattr(config, name) is not None:
            setattr(settings, name, getattr(config, name))
    if config.algebraic_tol is not None:
        settings.algebraic_tol_genus1 = config.algebraic_tol
        settings.algebraic_tol_higher = config.algebraic_tol


def solution_from_config(config: JobConfig, seed: Optional[int] = None) -> ErnstSolution:
    """
    Build the solution described by a job document.

    Without p and q the characteristics are the admissible ones at the probe
    point with a shift drawn from ``seed``.

    Raises:
        CurveError: If the pairs or the probe point are invalid
        QuadratureError: If the probe periods cannot be computed
    """
    seed = config.seed if seed is None else seed
    probe = config.probe_xi if config.probe_xi is not None else default_probe(config.pairs)
    if config.p is None and config.q is None:
        shift = np.random.default_rng(seed).uniform(-0.3, 0.3, size=config.genus)
        chars = admissible_characteristics(new_ernst_curve(probe, config.pairs), shift)
    else:
        chars = Characteristics.of(config.p_vec(), config.q_vec())
    logger.info(
        "Solution configured",
        extra={"genus": config.genus, "chars": chars.label(), "probe": probe},
    )
    return ErnstSolution(
        config.pairs,
        chars,
        quad_order=config.quad_order,
        probe_xi=probe,
        corrupt_b=config.corrupt_b,
    )


def grid_points(config: JobConfig) -> List[Tuple[float, float]]:
    """(ρ, ζ) pairs, ρ outer and ζ inner."""
    rhos = np.linspace(config.rho_min, config.rho_max, config.n_rho)
    zetas = np.linspace(config.zeta_min, config.zeta_max, config.n_zeta)
    return [(float(rho), float(zeta)) for rho in rhos for zeta in zetas]


# ============================================================================
# EVALUATION
# ============================================================================


def evaluate_point(sol: ErnstSolution, rho: float, zeta: float, a0: float = 0.0, k_const: float = 1.0) -> GridRow:
    """
    One grid row; a SolutionError gives mask 1, any other library error mask 2.
    """
    started = time.perf_counter()
    xi = complex(zeta, -rho)
    try:
        value = evaluate(sol, xi)
        metric = metric_values(sol, xi, a0, k_const)
        row = GridRow(
            rho=rho,
            zeta=zeta,
            re_E=value.E.real,
            im_E=value.E.imag,
            e2U=metric.e2U,
            A=metric.A,
            k=metric.k,
            ernst_residual=ernst_residual(sol, xi),
            mask=MASK_REGULAR,
        )
    except SolutionError as exc:
        row = GridRow(rho=rho, zeta=zeta, mask=MASK_DIVISOR)
        logger.debug("Point on the theta divisor", extra=exc.to_dict())
    except ErnstThetaError as exc:
        row = GridRow(rho=rho, zeta=zeta, mask=MASK_ERROR)
        logger.debug("Point evaluation failed", extra=exc.to_dict())
    log_grid_point(rho, zeta, row.mask, (time.perf_counter() - started) * 1000)
    return row


def run_grid(
    config: JobConfig,
    sol: ErnstSolution,
    threads: Optional[int] = None,
    quiet: bool = False,
    tolerance: Optional[float] = None,
) -> Tuple[List[GridRow], RunSummary]:
    """
    Evaluate the grid of a job over a thread pool.

    Args:
        config: Job document (grid bounds, A₀, K)
        sol: Solution to evaluate
        threads: Worker count (defaults to ``settings.threads``)
        quiet: Disable the progress bar
        tolerance: Residual tolerance (defaults to ``config.residual_tol``)

    Returns:
        tuple: Rows in grid order and the run summary
    """
    started = time.perf_counter()
    tolerance = tolerance or config.residual_tol
    threads = threads or settings.threads
    points = grid_points(config)

    # signs are shared state; fix them before the workers start
    sol.signs

    def work(point: Tuple[float, float]) -> GridRow:
        return evaluate_point(sol, point[0], point[1], config.a0, config.k_const)

    with ThreadPoolExecutor(max_workers=threads) as pool:
        rows = list(
            tqdm(
                pool.map(work, points),
                total=len(points),
                desc="grid",
                file=sys.stderr,
                disable=quiet,
            )
        )

    regular = [row for row in rows if row.mask == MASK_REGULAR]
    residuals = [row.ernst_residual for row in regular]
    failed = sum(1 for r in residuals if not r <= tolerance)
    summary = RunSummary(
        kind="grid",
        total=len(rows),
        masked=len(rows) - len(regular),
        failed=failed,
        max_residual=max(residuals) if residuals else 0.0,
        tolerance=tolerance,
        runtime_ms=(time.perf_counter() - started) * 1000,
    )
    logger.info(
        "Grid finished",
        extra={"total": summary.total, "masked": summary.masked, "failed": failed, "threads": threads},
    )
    return rows, summary


def write_grid_csv(rows: List[GridRow], target: Union[str, Path, None] = None) -> None:
    """Write rows with the fixed header; ``None`` writes to stdout."""
    if target is None:
        _write_rows(sys.stdout, rows)
        return
    path = Path(target)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="") as handle:
        _write_rows(handle, rows)


def _write_rows(handle, rows: List[GridRow]) -> None:
    writer = csv.writer(handle, lineterminator="\n")
    writer.writerow(GRID_HEADER)
    for row in rows:
        writer.writerow(row.csv_fields())
