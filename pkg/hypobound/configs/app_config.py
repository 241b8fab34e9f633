"""
Application Configuration - Environment Variable Loader

Process-level settings for hypobound. Run plans (models, test functions, grids,
Monte Carlo budgets) live in TOML files and are handled by
`hypobound.configs.run_plan`; this module only covers what the environment may
set for every run:

1. Log level
2. Worker count for suite execution (the only run parameter the environment
   may override)
3. Default report formats when the command line does not name any

Environment variables are read once, after loading a local .env file.
"""

import os
from functools import lru_cache

from dotenv import load_dotenv

# Load environment variables from .env file
load_dotenv()


class AppConfig:
    """
    Singleton configuration class that loads settings from environment variables.

    Usage:
        config = AppConfig()
        jobs = config.jobs

    All settings have sensible defaults for local runs.
    """

    _instance = None

    def __new__(cls) -> "AppConfig":
        if cls._instance is None:
            cls._instance = super().__new__(cls)
            cls._instance._initialized = False
        return cls._instance

    def __init__(self):
        if self._initialized:
            return

        # Logging
        self.log_level: str = os.getenv("LOG_LEVEL", "INFO")

        # Suite execution; None leaves the choice to the command line or the plan
        jobs = os.getenv("HYPOBOUND_JOBS")
        self.jobs: int | None = int(jobs) if jobs else None

        # Reports
        formats = os.getenv("HYPOBOUND_FORMATS", "json,csv")
        self.default_formats: list[str] = [item.strip() for item in formats.split(",") if item.strip()]

        self._initialized = True

    def validate(self) -> bool:
        """
        Validate the loaded settings.

        Returns:
            bool: True if configuration is valid, raises ValueError otherwise.
        """
        if self.jobs is not None and self.jobs < 1:
            raise ValueError(f"HYPOBOUND_JOBS must be a positive integer, got {self.jobs}")
        unknown = set(self.default_formats) - {"json", "csv", "svg"}
        if unknown:
            raise ValueError(f"HYPOBOUND_FORMATS contains unknown formats: {sorted(unknown)}")
        return True

    def __repr__(self) -> str:
        return f"AppConfig(log_level={self.log_level}, jobs={self.jobs}, formats={self.default_formats})"


@lru_cache(maxsize=1)
def get_config() -> AppConfig:
    """
    Get the singleton AppConfig instance.

    Usage:
        from hypobound.configs.app_config import get_config
        config = get_config()
    """
    return AppConfig()
