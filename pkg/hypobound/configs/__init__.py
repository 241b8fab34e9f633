"""Configuration module for hypobound."""

from hypobound.configs.app_config import AppConfig, get_config

__all__ = ["AppConfig", "get_config"]
