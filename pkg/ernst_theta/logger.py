"""
Structured Logging

Console output is human readable by default; the rotating log file always
receives one JSON object per line so suite runs can be grepped afterwards.
"""

import logging
import logging.handlers
import sys
from datetime import datetime, timezone
from pathlib import Path
from typing import Optional

import orjson

from ernst_theta.config import settings

# Attributes every LogRecord carries; anything else was passed through ``extra``.
_RESERVED = set(
    logging.LogRecord("", 0, "", 0, "", None, None).__dict__.keys()
) | {"message", "asctime", "taskName"}


class JSONFormatter(logging.Formatter):
    """One JSON line per record, with ``extra`` fields flattened into the top level."""

    def format(self, record: logging.LogRecord) -> str:
        log_data = {
            "timestamp": datetime.now(timezone.utc).isoformat().replace("+00:00", "Z"),
            "level": record.levelname,
            "logger": record.name,
            "message": record.getMessage(),
            "module": record.module,
            "function": record.funcName,
            "line": record.lineno,
        }
        if record.exc_info:
            log_data["exception"] = self.formatException(record.exc_info)
        for key, value in record.__dict__.items():
            if key not in _RESERVED and not key.startswith("_"):
                log_data[key] = value
        return orjson.dumps(log_data, option=orjson.OPT_SERIALIZE_NUMPY, default=_fallback).decode("utf-8")


def _fallback(value):
    if isinstance(value, complex):
        return [value.real, value.imag]
    return str(value)


def setup_logging(
    log_level: Optional[str] = None,
    log_file: Optional[str] = None,
    log_format: Optional[str] = None,
) -> None:
    """
    Install the console and rotating-file handlers on the root logger.

    Arguments left as None come from the settings.
    """
    log_level = log_level or settings.log_level
    log_file = log_file or settings.log_file
    log_format = log_format or settings.log_format

    Path(log_file).parent.mkdir(parents=True, exist_ok=True)
    json_formatter = JSONFormatter()

    # stderr keeps stdout free for CSV/JSON piped output
    console_handler = logging.StreamHandler(sys.stderr)
    console_handler.setFormatter(
        json_formatter
        if log_format == "json"
        else logging.Formatter("%(asctime)s - %(name)s - %(levelname)s - %(message)s", "%Y-%m-%d %H:%M:%S")
    )

    file_handler = logging.handlers.RotatingFileHandler(
        filename=log_file,
        maxBytes=10 * 1024 * 1024,
        backupCount=5,
        encoding="utf-8",
    )
    file_handler.setFormatter(json_formatter)

    root_logger = logging.getLogger()
    root_logger.setLevel(log_level)
    root_logger.handlers.clear()
    root_logger.addHandler(console_handler)
    root_logger.addHandler(file_handler)

    get_logger(__name__).info(
        "Logging configured",
        extra={"log_level": log_level, "log_file": log_file, "log_format": log_format},
    )


def get_logger(name: str) -> logging.Logger:
    return logging.getLogger(name)


def log_check_result(
    name: str,
    residual: float,
    tolerance: float,
    passed: bool,
    duration_ms: float,
    extra: Optional[dict] = None,
) -> None:
    """Outcome of one identity check; failures are logged as warnings."""
    log_data = {"check": name, "residual": residual, "tolerance": tolerance, "passed": passed, "duration_ms": duration_ms}
    log_data.update(extra or {})
    logger = get_logger(f"ernst_theta.verify.{name}")
    if passed:
        logger.info(f"Check {name} passed ({residual:.3e} <= {tolerance:.1e})", extra=log_data)
    else:
        logger.warning(f"Check {name} FAILED ({residual:.3e} > {tolerance:.1e})", extra=log_data)


def log_period_computation(
    genus: int,
    quad_order: int,
    cond: float,
    duration_ms: float,
    extra: Optional[dict] = None,
) -> None:
    """Accepted quadrature order and a-period condition estimate of one curve."""
    log_data = {"genus": genus, "quad_order": quad_order, "cond": cond, "duration_ms": duration_ms}
    log_data.update(extra or {})
    get_logger("ernst_theta.surface.periods").debug(f"Periods g={genus} order={quad_order}", extra=log_data)


def log_grid_point(
    rho: float,
    zeta: float,
    mask: int,
    duration_ms: float,
    extra: Optional[dict] = None,
) -> None:
    """One grid point; masked points (1 divisor hit, 2 evaluation error) are warnings."""
    log_data = {"rho": rho, "zeta": zeta, "mask": mask, "duration_ms": duration_ms}
    log_data.update(extra or {})
    logger = get_logger("ernst_theta.grid")
    if mask == 0:
        logger.debug(f"Grid point ({rho:g}, {zeta:g})", extra=log_data)
    else:
        logger.warning(f"Grid point ({rho:g}, {zeta:g}) masked {mask}", extra=log_data)
