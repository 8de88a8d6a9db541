"""
Schemas Package

Pydantic models shared by the suite, the grid runner and the CLI.
"""

from ernst_theta.schemas.common import (
    GRID_HEADER,
    CheckReport,
    GridRow,
    JobConfig,
    RunSummary,
    format_complex,
    parse_complex,
)

__all__ = [
    "GRID_HEADER",
    "CheckReport",
    "GridRow",
    "JobConfig",
    "RunSummary",
    "format_complex",
    "parse_complex",
]
