"""
Logging configuration for the Markov-Krein numerics library
"""

import functools
import logging
import logging.handlers
import sys
import time
from pathlib import Path

CONSOLE_FORMAT = "%(levelname)s - %(message)s"
FILE_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
DATE_FORMAT = "%Y-%m-%d %H:%M:%S"

def _resolve_level(log_level: str) -> int:
    level = getattr(logging, str(log_level).upper(), None)
    if not isinstance(level, int):
        raise ValueError(f"Unknown log level: {log_level}")
    return level

def setup_logging(
    log_level: str = "INFO",
    log_file: str = "mkrein.log",
    max_bytes: int = 20 * 1024 * 1024,  # 20MB
    backup_count: int = 5
):
    """
    Setup logging configuration

    The console handler writes to stderr; stdout carries only CSV/JSON results.
    Python warnings (scipy IntegrationWarning, numpy RuntimeWarning) are routed
    into the log as well.

    Args:
        log_level: Console level (DEBUG, INFO, WARNING, ERROR, CRITICAL)
        log_file: Rotating log file, always written at DEBUG
        max_bytes: Maximum log file size before rotation
        backup_count: Number of backup log files to keep
    """
    level = _resolve_level(log_level)
    log_path = Path(log_file)
    log_path.parent.mkdir(parents=True, exist_ok=True)

    root_logger = logging.getLogger()
    root_logger.setLevel(logging.DEBUG)
    for handler in list(root_logger.handlers):
        root_logger.removeHandler(handler)
        handler.close()

    console_handler = logging.StreamHandler(sys.stderr)
    console_handler.setLevel(level)
    console_handler.setFormatter(logging.Formatter(CONSOLE_FORMAT))
    root_logger.addHandler(console_handler)

    file_handler = logging.handlers.RotatingFileHandler(
        log_path,
        maxBytes=max_bytes,
        backupCount=backup_count,
        encoding="utf-8"
    )
    file_handler.setLevel(logging.DEBUG)
    file_handler.setFormatter(logging.Formatter(FILE_FORMAT, datefmt=DATE_FORMAT))
    root_logger.addHandler(file_handler)

    logging.captureWarnings(True)

    logging.getLogger(__name__).debug(f"mkrein logging ready: console={logging.getLevelName(level)}, file={log_path}")

def get_logger(name: str) -> logging.Logger:
    """Get a logger instance with the specified name"""
    return logging.getLogger(name)

def log_timing(label: str = None):
    """Decorator logging the wall-clock duration of a call at DEBUG"""
    def decorator(func):
        name = label or func.__qualname__

        @functools.wraps(func)
        def wrapper(*args, **kwargs):
            logger = get_logger(func.__module__)
            start = time.perf_counter()
            try:
                result = func(*args, **kwargs)
            except Exception as e:
                logger.error(f"{name} failed after {time.perf_counter() - start:.3f}s: {e}")
                raise
            logger.debug(f"{name} completed in {time.perf_counter() - start:.3f}s")
            return result
        return wrapper
    return decorator
