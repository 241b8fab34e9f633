"""
Logging Configuration for hypobound

Module-level loggers share one format:

    2024-01-15 10:30:45 | INFO     | hypobound.services.suite | Message here

Logs go to stderr; stdout is kept for command output such as covariance dumps.
"""

import logging
import sys
from typing import Optional

from hypobound.configs.app_config import get_config

LOG_FORMAT = "%(asctime)s | %(levelname)-8s | %(name)s | %(message)s"
DATE_FORMAT = "%Y-%m-%d %H:%M:%S"


def get_logger(name: Optional[str] = None) -> logging.Logger:
    """
    Get a configured logger instance.

    Args:
        name: Logger name (typically __name__ of the calling module).
              If None, returns the package logger.

    Returns:
        logging.Logger: Configured logger instance.

    Usage:
        from hypobound.logs.logger import get_logger
        logger = get_logger(__name__)
        logger.info("Suite finished")
    """
    config = get_config()

    logger = logging.getLogger(name or "hypobound")

    # Only configure if not already configured (prevents duplicate handlers)
    if not logger.handlers:
        log_level = getattr(logging, config.log_level.upper(), logging.INFO)
        logger.setLevel(log_level)

        console_handler = logging.StreamHandler(sys.stderr)
        console_handler.setLevel(log_level)
        console_handler.setFormatter(logging.Formatter(fmt=LOG_FORMAT, datefmt=DATE_FORMAT))
        logger.addHandler(console_handler)

        # Prevent propagation to root logger (avoids duplicate logs)
        logger.propagate = False

    return logger


def setup_logging() -> None:
    """
    Initialize logging for the command line entry point.

    Configures the root logger and quiets verbose third-party libraries.
    """
    config = get_config()
    log_level = getattr(logging, config.log_level.upper(), logging.INFO)

    logging.basicConfig(
        level=log_level, format=LOG_FORMAT, datefmt=DATE_FORMAT, handlers=[logging.StreamHandler(sys.stderr)]
    )

    # matplotlib is chatty at DEBUG (font manager, backend selection)
    logging.getLogger("matplotlib").setLevel(logging.WARNING)
    logging.getLogger("PIL").setLevel(logging.WARNING)

    logger = get_logger("hypobound")
    logger.debug(f"Logging initialized at {config.log_level} level")
