"""
Logging setup and stage timing.

Public API:
- configure_logging(level="WARNING") -> logging.Logger
- timed(logger, label)
"""
from __future__ import annotations

import logging
import sys
import time
from contextlib import contextmanager
from typing import Iterator, Union

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"
ROOT_LOGGER = "deepcond"


def configure_logging(level: Union[str, int] = "WARNING") -> logging.Logger:
    """Attach one stderr handler to the package logger (idempotent)."""
    logger = logging.getLogger(ROOT_LOGGER)
    if isinstance(level, str):
        level = logging.getLevelName(level.upper())
    logger.setLevel(level)
    for h in list(logger.handlers):
        if getattr(h, "_deepcond", False):
            logger.removeHandler(h)
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter(LOG_FORMAT))
    handler._deepcond = True  # type: ignore[attr-defined]
    logger.addHandler(handler)
    return logger


@contextmanager
def timed(logger: logging.Logger, label: str) -> Iterator[None]:
    start = time.perf_counter()
    try:
        yield
    finally:
        dur_ms = (time.perf_counter() - start) * 1000.0
        logger.info("%s done (%.2f ms)", label, dur_ms)
