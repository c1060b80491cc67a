"""
Structured logging utility using Python's logging module.

Provides JSON logging for machine consumption and human-readable logging
for terminal use, plus a timing context manager for long-running steps.
"""

import logging
import sys
import time
from contextlib import contextmanager
from pathlib import Path
from typing import Iterator

from pythonjsonlogger import jsonlogger

from magnetic_lqr.core.config import settings


def setup_logger(name: str) -> logging.Logger:
    """
    Set up a logger with appropriate handlers and formatters.

    Args:
        name: Logger name (typically the package name)

    Returns:
        Configured logger instance
    """
    logger = logging.getLogger(name)
    logger.setLevel(getattr(logging, settings.LOG_LEVEL.upper()))

    # Remove existing handlers
    logger.handlers.clear()

    # Reports go to stdout, so logs go to stderr
    console_handler = logging.StreamHandler(sys.stderr)
    console_handler.setLevel(getattr(logging, settings.LOG_LEVEL.upper()))

    if settings.LOG_FORMAT == "json":
        formatter = jsonlogger.JsonFormatter(
            "%(asctime)s %(levelname)s %(name)s %(message)s %(pathname)s %(lineno)d"
        )
    else:
        formatter = logging.Formatter(
            "%(asctime)s - %(name)s - %(levelname)s - %(message)s",
            datefmt="%Y-%m-%d %H:%M:%S",
        )

    console_handler.setFormatter(formatter)
    logger.addHandler(console_handler)

    if settings.LOG_FILE:
        log_path = Path(settings.LOG_FILE)
        log_path.parent.mkdir(parents=True, exist_ok=True)

        file_handler = logging.FileHandler(settings.LOG_FILE)
        file_handler.setLevel(logging.INFO)
        file_handler.setFormatter(formatter)
        logger.addHandler(file_handler)

    return logger


@contextmanager
def log_duration(logger: logging.Logger, operation: str, **context) -> Iterator[dict]:
    """
    Log start, completion and failure of an operation with its duration.

    Args:
        logger: Logger to write to
        operation: Short operation name
        **context: Extra structured fields attached to every record

    Yields:
        Mutable dict; keys added by the caller are logged on completion
    """
    start_time = time.perf_counter()
    outcome: dict = {}

    logger.debug(f"{operation} started", extra={"operation": operation, **context})

    try:
        yield outcome
    except Exception as exc:
        duration = time.perf_counter() - start_time
        logger.error(
            f"{operation} failed",
            extra={
                "operation": operation,
                "duration_ms": round(duration * 1000, 2),
                "error": str(exc),
                **context,
            },
            exc_info=settings.DEBUG,
        )
        raise

    duration = time.perf_counter() - start_time
    logger.info(
        f"{operation} completed",
        extra={
            "operation": operation,
            "duration_ms": round(duration * 1000, 2),
            **context,
            **outcome,
        },
    )
