"""Configuration management for tabgen."""

import os
from pydantic import BaseModel, Field, field_validator


class LoggingConfig(BaseModel):
    """Logging configuration."""

    log_level: str = "INFO"

    @field_validator("log_level")
    @classmethod
    def _known_level(cls, value: str) -> str:
        level = value.upper()
        if level not in {"DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"}:
            raise ValueError(f"Unknown log level: {value}")
        return level


class RuntimeConfig(BaseModel):
    """Process-level execution settings."""

    threads: int = Field(default=1, ge=1)  # caps evaluation parallelism


class ServerConfig(BaseModel):
    """FastMCP tool server configuration."""

    name: str = "tabgen"
    mask_error_details: bool = False  # True in production


class TabgenConfig(BaseModel):
    """Root configuration for tabgen."""

    logging: LoggingConfig = Field(default_factory=LoggingConfig)
    runtime: RuntimeConfig = Field(default_factory=RuntimeConfig)
    server: ServerConfig = Field(default_factory=ServerConfig)


def load_config_from_env() -> TabgenConfig:
    """
    Load configuration from environment variables.

    Environment Variables:
        TABGEN_LOG_LEVEL: Logging level (DEBUG, INFO, WARNING, ERROR)
        TABGEN_THREADS: Maximum worker threads for evaluation grids (default: 1)
        TABGEN_MASK_ERRORS: Mask error details in tool responses (true/false)

    Returns:
        TabgenConfig: Configuration object
    """
    logging_config = LoggingConfig(log_level=os.getenv("TABGEN_LOG_LEVEL", "INFO"))

    runtime_config = RuntimeConfig(threads=int(os.getenv("TABGEN_THREADS", "1")))

    server_config = ServerConfig(
        mask_error_details=os.getenv("TABGEN_MASK_ERRORS", "false").lower() == "true"
    )

    return TabgenConfig(
        logging=logging_config,
        runtime=runtime_config,
        server=server_config
    )
