"""Configuration management using environment variables.

Only process-level concerns (logging, environment label) are configured here.
Numerical settings travel with each call as pydantic models (see ``src.models.params``).
"""

import os

from dotenv import load_dotenv

# Load environment variables from .env file
load_dotenv()

VALID_LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL")


class Config:
    """Application configuration loaded from environment variables."""

    # Logging
    LOG_LEVEL: str
    LOG_FILE: str | None

    # Environment Settings
    ENVIRONMENT: str

    def __init__(self) -> None:
        """Initialize configuration from environment variables."""
        self.LOG_LEVEL = os.getenv("LOG_LEVEL", "INFO").upper()
        self.LOG_FILE = os.getenv("LOG_FILE") or None
        self.ENVIRONMENT = os.getenv("ENVIRONMENT", "development")

    def validate(self) -> None:
        """Validate the loaded configuration.

        Raises:
            ValueError: If LOG_LEVEL is not a standard logging level name
        """
        if self.LOG_LEVEL not in VALID_LOG_LEVELS:
            raise ValueError(
                f"LOG_LEVEL must be one of {', '.join(VALID_LOG_LEVELS)}, got '{self.LOG_LEVEL}'"
            )


# Global configuration instance
config = Config()
config.validate()
