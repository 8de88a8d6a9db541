"""
Shared Data Models

Pydantic models exchanged between the identity suite, the grid runner and the
CLI: check reports, the job configuration document, grid rows and run summaries.
"""

from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from ernst_theta.exceptions import ConfigParse


# ============================================================================
# COMPLEX LITERALS
# ============================================================================


def parse_complex(text: Union[str, int, float, complex]) -> complex:
    """
    Parse "a+bi", "-0.5i", "3" or "2-i" into a complex number.

    Raises:
        ValueError: If the literal is malformed
    """
    if isinstance(text, (int, float, complex)) and not isinstance(text, bool):
        return complex(text)
    if not isinstance(text, str):
        raise ValueError(f"not a complex literal: {text!r}")
    literal = text.strip().replace(" ", "").replace("I", "i")
    if not literal:
        raise ValueError("empty complex literal")
    if literal.endswith("i"):
        body = literal[:-1]
        # split at the last sign that is not part of an exponent
        split = max(
            (k for k, ch in enumerate(body) if ch in "+-" and k > 0 and body[k - 1] not in "eE"),
            default=0,
        )
        real_part, imag_part = body[:split], body[split:]
        if imag_part in ("", "+"):
            imag_part = "1"
        elif imag_part == "-":
            imag_part = "-1"
        try:
            return complex(float(real_part) if real_part else 0.0, float(imag_part))
        except ValueError as exc:
            raise ValueError(f"not a complex literal: {text!r}") from exc
    try:
        return complex(float(literal), 0.0)
    except ValueError as exc:
        raise ValueError(f"not a complex literal: {text!r}") from exc


def format_complex(value: complex) -> str:
    value = complex(value)
    return f"{value.real:.17g}{value.imag:+.17g}i"


def _complex_list(value: Any) -> List[complex]:
    if isinstance(value, (list, tuple)):
        return [parse_complex(v) for v in value]
    if isinstance(value, (int, float, complex)):
        return [complex(value)]
    return [parse_complex(part) for part in str(value).split(",") if part.strip()]


# ============================================================================
# CHECK REPORTS
# ============================================================================


class CheckReport(BaseModel):
    """Outcome of one identity check."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    name: str
    residual: float = Field(ge=0.0)
    tolerance: float = Field(gt=0.0)
    passed: bool
    runtime_ms: float = Field(default=0.0, ge=0.0)
    inputs: Dict[str, Any] = Field(default_factory=dict)
    error: Optional[Dict[str, Any]] = None
    timestamp: datetime = Field(default_factory=lambda: datetime.now(timezone.utc))

    def to_record(self) -> Dict[str, Any]:
        """JSON-ready dict without the timestamp (reports stay reproducible)."""
        return self.model_dump(mode="json", exclude={"timestamp"})


# ============================================================================
# JOB CONFIGURATION
# ============================================================================


class JobConfig(BaseModel):
    """
    Job configuration document.

    Loaded from a flat YAML mapping; complex values are strings such as
    "1+2i", lists are comma separated and pairs are separated by ";".
    """

    model_config = ConfigDict(extra="forbid")

    pairs: List[Tuple[complex, complex]]
    p: Optional[List[complex]] = None
    q: Optional[List[complex]] = None

    rho_min: float = Field(default=0.5, gt=0.0)
    rho_max: float = Field(default=2.0, gt=0.0)
    zeta_min: float = -1.0
    zeta_max: float = 1.0
    n_rho: int = Field(default=5, ge=1)
    n_zeta: int = Field(default=5, ge=1)

    theta_tol: float = Field(default=1e-12, gt=0.0)
    algebraic_tol: Optional[float] = Field(default=None, gt=0.0)
    derivative_tol: float = Field(default=1e-5, gt=0.0)
    residual_tol: float = Field(default=1e-7, gt=0.0)
    fd_step: float = Field(default=1e-5, gt=0.0)
    quad_order: Optional[int] = Field(default=None, ge=16)

    a0: float = 0.0
    k_const: float = Field(default=1.0, gt=0.0)
    seed: int = Field(default=42, ge=0)
    probe_xi: Optional[complex] = None
    corrupt_b: float = 0.0

    grid_out: Optional[str] = None
    report_out: Optional[str] = None
    checks: Optional[List[str]] = None

    # ------------------------------------------------------------------

    @field_validator("pairs", mode="before")
    @classmethod
    def parse_pairs(cls, v):
        """
        Parse "E1,F1;E2,F2" into pairs of complex numbers.

        Raises:
            ValueError: If a pair does not have exactly two entries
        """
        if isinstance(v, str):
            chunks = [chunk for chunk in v.split(";") if chunk.strip()]
            v = [_complex_list(chunk) for chunk in chunks]
        pairs = []
        for pair in v:
            values = _complex_list(pair)
            if len(values) != 2:
                raise ValueError(f"each pair needs two branch points, got {len(values)}")
            pairs.append((values[0], values[1]))
        if not pairs:
            raise ValueError("at least one pair is required")
        return pairs

    @field_validator("p", "q", mode="before")
    @classmethod
    def parse_vector(cls, v):
        if v is None:
            return None
        return _complex_list(v)

    @field_validator("probe_xi", mode="before")
    @classmethod
    def parse_probe(cls, v):
        return None if v is None else parse_complex(v)

    @field_validator("checks", mode="before")
    @classmethod
    def parse_checks(cls, v):
        if v is None or isinstance(v, list):
            return v
        return [name.strip() for name in str(v).split(",") if name.strip()]

    @model_validator(mode="after")
    def check_grid(self) -> "JobConfig":
        """Grid bounds are ordered and characteristic lengths match the genus."""
        if self.rho_max < self.rho_min:
            raise ValueError("rho_max must be >= rho_min")
        if self.zeta_max < self.zeta_min:
            raise ValueError("zeta_max must be >= zeta_min")
        g = len(self.pairs)
        for name in ("p", "q"):
            vec = getattr(self, name)
            if vec is not None and len(vec) != g:
                raise ValueError(f"{name} has {len(vec)} entries for genus {g}")
        return self

    # ------------------------------------------------------------------

    @property
    def genus(self) -> int:
        return len(self.pairs)

    def p_vec(self) -> List[complex]:
        return self.p if self.p is not None else [0j] * self.genus

    def q_vec(self) -> List[complex]:
        return self.q if self.q is not None else [0j] * self.genus

    @classmethod
    def from_mapping(cls, data: Any) -> "JobConfig":
        """
        Validate a parsed mapping.

        Raises:
            ConfigParse: If the mapping is not flat or fails validation
        """
        if not isinstance(data, dict):
            raise ConfigParse("Configuration must be a mapping", details={"type": type(data).__name__})
        for key, value in data.items():
            if isinstance(value, dict) or (
                isinstance(value, list) and any(isinstance(item, (dict, list)) for item in value)
            ):
                raise ConfigParse("Configuration must be flat", details={"key": key})
        try:
            return cls(**data)
        except (ValidationError, ValueError, TypeError) as exc:
            raise ConfigParse("Invalid configuration", details={"reason": str(exc)}) from exc

    @classmethod
    def from_yaml(cls, text: str) -> "JobConfig":
        try:
            data = yaml.safe_load(text)
        except yaml.YAMLError as exc:
            raise ConfigParse("Configuration is not valid YAML", details={"reason": str(exc)}) from exc
        return cls.from_mapping(data or {})

    @classmethod
    def load(cls, path: Union[str, Path]) -> "JobConfig":
        """
        Read a configuration file.

        Raises:
            ConfigParse: If the file cannot be read or validated
        """
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigParse("Cannot read configuration", details={"path": str(path)}) from exc
        return cls.from_yaml(text)


# ============================================================================
# GRID OUTPUT
# ============================================================================

GRID_HEADER = ("rho", "zeta", "re_E", "im_E", "e2U", "A", "k", "ernst_residual", "mask")


class GridRow(BaseModel):
    """One grid point; masked rows carry NaN values."""

    rho: float
    zeta: float
    re_E: float = float("nan")
    im_E: float = float("nan")
    e2U: float = float("nan")
    A: float = float("nan")
    k: float = float("nan")
    ernst_residual: float = float("nan")
    mask: int = Field(default=0, ge=0, le=2)

    def csv_fields(self) -> List[str]:
        return [f"{getattr(self, name):.17g}" if name != "mask" else str(self.mask) for name in GRID_HEADER]


class RunSummary(BaseModel):
    """Totals of a grid run or a check run."""

    kind: str
    total: int = 0
    masked: int = 0
    failed: int = 0
    max_residual: float = 0.0
    tolerance: float = 0.0
    runtime_ms: float = 0.0
    reports: List[CheckReport] = Field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.failed == 0

    def to_record(self) -> Dict[str, Any]:
        record = self.model_dump(mode="json", exclude={"reports"})
        record["ok"] = self.ok
        record["reports"] = [report.to_record() for report in self.reports]
        return record
