"""
Configuration Management

Numerical tolerances, quadrature orders, worker-pool size and logging are read
through Pydantic Settings from ``ERNST_THETA_*`` environment variables or a
``.env`` file. Job-specific values (curve, characteristics, grid) live in the
job configuration document instead, see ``ernst_theta.schemas.common.JobConfig``.
"""

import os
from typing import Literal, Optional

from pydantic import Field, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Every numerical threshold used by the modules, so a run can be tightened without code changes."""

    app_version: str = Field(default="0.1.0", description="Package version")

    # ========================================================================
    # CURVES, QUADRATURE AND THETA
    # ========================================================================

    separation_factor: float = Field(
        default=1e-8,
        gt=0.0,
        lt=1.0,
        description="Minimum branch-point separation as a fraction of the branch-set diameter",
    )
    quad_order: int = Field(default=64, ge=16, le=4096, description="Gauss-Legendre order for cut and path integrals")
    quad_max_doublings: int = Field(
        default=4,
        ge=1,
        le=8,
        description="Attempts of the period convergence gate (order doubles per attempt)",
    )
    convergence_tol: float = Field(
        default=1e-9,
        gt=0.0,
        description="Relative change of B under order doubling accepted as converged",
    )
    ill_conditioned: float = Field(
        default=1e10,
        gt=1.0,
        description="Condition number of the a-period matrix above which periods are rejected",
    )
    theta_tol: float = Field(default=1e-12, gt=0.0, lt=1e-2, description="Truncation tolerance of the theta lattice sum")
    theta_margin: float = Field(default=1.0, ge=0.0, description="Extra lattice radius added to the tail-bound radius")
    max_odd_char_genus: int = Field(
        default=4,
        ge=1,
        le=6,
        description="Largest genus for the exhaustive odd characteristic search",
    )

    # ========================================================================
    # GUARDS AND TOLERANCES
    # ========================================================================

    divisor_guard: float = Field(
        default=1e-10,
        gt=0.0,
        description="Relative |theta| below which a point is on the theta divisor",
    )
    prime_form_floor: float = Field(
        default=1e-12,
        gt=0.0,
        description="Relative |theta_star| below which a prime-form quotient is singular",
    )
    reality_tol: float = Field(
        default=1e-8,
        gt=0.0,
        description="Accepted reality invariant of [p, q] and |conj(E) - sheet conjugate| / |E|",
    )
    algebraic_tol_genus1: float = Field(default=1e-8, gt=0.0, description="Algebraic identities, genus 1")
    algebraic_tol_higher: float = Field(default=1e-7, gt=0.0, description="Algebraic identities, genus >= 2")
    derivative_tol: float = Field(default=1e-5, gt=0.0, description="Identities that involve finite differences")
    fd_step: float = Field(default=1e-5, gt=0.0, lt=1e-1, description="Relative central-difference step (scaled by |xi|)")
    random_box: float = Field(default=3.0, gt=0.0, description="Half-width of the box branch points are sampled from")
    seed: int = Field(default=42, ge=0, description="Default RNG seed of the identity suite")

    # ========================================================================
    # WORKERS AND LOGGING
    # ========================================================================

    threads: Optional[int] = Field(
        default=None,
        validate_default=True,
        description="Grid worker count (ERNST_THETA_THREADS); defaults to the CPU count",
    )
    log_level: Literal["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"] = Field(default="INFO")
    log_file: str = Field(default="logs/ernst_theta.log")
    log_format: Literal["json", "text"] = Field(default="text", description="Console log format")

    model_config = SettingsConfigDict(
        env_prefix="ERNST_THETA_",
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore",
    )

    @field_validator("threads", mode="before")
    @classmethod
    def resolve_threads(cls, v):
        """Empty values and 0 fall back to the hardware parallelism; negatives are rejected."""
        if v is None or v == "" or v == 0 or v == "0":
            return os.cpu_count() or 1
        value = int(v)
        if value < 0:
            raise ValueError(f"threads must be non-negative, got {value}")
        return value

    def algebraic_tolerance(self, genus: int) -> float:
        """Tolerance class of algebraic identities for the given genus."""
        return self.algebraic_tol_genus1 if genus <= 1 else self.algebraic_tol_higher

    def derivative_tolerance(self, genus: int) -> float:
        """Finite-difference tolerance class: looser by 10 above genus 1."""
        return self.derivative_tol * (1.0 if genus <= 1 else 10.0)


settings = Settings()
