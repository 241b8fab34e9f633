"""Logging configuration for hypobound."""

from hypobound.logs.logger import get_logger, setup_logging

__all__ = ["get_logger", "setup_logging"]
