"""FastMCP server initialization and tool registration."""

import logging

from fastmcp import FastMCP

from tabgen.config import TabgenConfig, load_config_from_env
from tabgen.tools import pipeline


def create_server(config: TabgenConfig) -> FastMCP:
    """
    Create and configure FastMCP server instance.

    Args:
        config: Server configuration

    Returns:
        Configured FastMCP instance
    """
    mcp_server = FastMCP(
        name=config.server.name,
        mask_error_details=config.server.mask_error_details,
    )

    mcp_server.tool(pipeline.create_benchmark)
    mcp_server.tool(pipeline.prepare_data)
    mcp_server.tool(pipeline.train_model)
    mcp_server.tool(pipeline.generate_records)
    mcp_server.tool(pipeline.evaluate_generator)
    mcp_server.tool(pipeline.describe_checkpoint)

    return mcp_server


def run_server() -> None:
    """
    Entry point of the ``tabgen-mcp`` tool server.

    Environment Variables:
        - TABGEN_LOG_LEVEL: Logging level (DEBUG, INFO, WARNING, ERROR)
        - TABGEN_MASK_ERRORS: Mask error details (true/false)
        - TABGEN_THREADS: Worker threads for generation and evaluation
    """
    from tabgen.__main__ import setup_logging

    config = load_config_from_env()
    setup_logging(config.logging.log_level)

    logger = logging.getLogger(__name__)
    logger.info("Starting tabgen MCP server...")
    logger.info(f"Log level: {config.logging.log_level}")

    try:
        create_server(config).run()
    except KeyboardInterrupt:
        logger.info("Server stopped by user")
    except Exception as e:
        logger.error(f"Server error: {str(e)}", exc_info=True)
        raise
