"""Main entry point for the tabgen command line."""

import logging
import sys
from typing import List, Optional

from pydantic import ValidationError

from tabgen.cli import run
from tabgen.config import LoggingConfig, load_config_from_env


def setup_logging(log_level: str) -> None:
    """
    Configure logging.

    Args:
        log_level: Logging level (DEBUG, INFO, WARNING, ERROR)
    """
    logging.basicConfig(
        level=getattr(logging, log_level.upper()),
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s'
    )


def _requested_level(argv: List[str]) -> Optional[str]:
    for i, arg in enumerate(argv):
        if arg == "--log-level" and i + 1 < len(argv):
            return argv[i + 1]
        if arg.startswith("--log-level="):
            return arg.split("=", 1)[1]
    return None


def main(argv: Optional[List[str]] = None) -> int:
    """
    Run one tabgen command.

    Behavior:
        1. Load configuration from environment
        2. Initialize logging
        3. Dispatch the command and return its exit code

    Environment Variables:
        - TABGEN_LOG_LEVEL: Logging level (DEBUG, INFO, WARNING, ERROR)
        - TABGEN_THREADS: Worker threads for generation and evaluation
    """
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        config = load_config_from_env()
        requested = _requested_level(argv) or config.logging.log_level
        level = LoggingConfig(log_level=requested).log_level
    except (ValidationError, ValueError) as e:
        logging.basicConfig(level=logging.ERROR)
        logging.getLogger(__name__).error(f"Invalid environment configuration: {e}")
        return 2

    setup_logging(level)
    return run(argv, config)


def entry() -> None:
    """Console-script wrapper."""
    sys.exit(main())


if __name__ == "__main__":
    entry()
