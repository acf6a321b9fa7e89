import logging
import os
import sys
from collections.abc import Sequence
from typing import Any

from dotenv import load_dotenv
from mcp.server import Server
from mcp.types import (
    EmbeddedResource,
    ImageContent,
    TextContent,
    Tool,
)

from .config import load_settings

load_dotenv()


def _log_level() -> str:
    """DEBUG unless FRONTLAB_LOG_LEVEL names a level; unknown names fall back to the settings default."""
    if not os.getenv("FRONTLAB_LOG_LEVEL", "").strip():
        return "DEBUG"
    return load_settings().log_level


logging.basicConfig(
    level=_log_level(),
    format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
    stream=sys.stderr,
)
logger = logging.getLogger("frontlab")

# Keep a log file in the user's cache directory as well
log_dir = os.path.expanduser("~/.cache/frontlab")
log_file = os.path.join(log_dir, "frontlab.log")
try:
    os.makedirs(log_dir, exist_ok=True)
    file_handler = logging.FileHandler(log_file)
    file_handler.setLevel(logging.DEBUG)
    file_handler.setFormatter(logging.Formatter("%(asctime)s - %(name)s - %(levelname)s - %(message)s"))
    logger.addHandler(file_handler)
    logger.debug(f"Logging to: {log_file}")
except OSError as e:
    logger.warning(f"Could not set up file logging: {e}")

from . import tools  # noqa: E402
from .errors import FrontLabError  # noqa: E402

config_file = os.getenv("FRONTLAB_CONFIG_FILE")
if config_file:
    logger.info(f"Default model descriptor: {config_file}")
else:
    logger.info("FRONTLAB_CONFIG_FILE not set; tools need an inline 'model' argument")

app = Server("frontlab")

tool_handlers: dict[str, tools.ToolHandler] = {}


def add_tool_handler(tool_class: tools.ToolHandler):
    logger.debug(f"Registering tool handler: {tool_class.name}")
    tool_handlers[tool_class.name] = tool_class


def get_tool_handler(name: str) -> tools.ToolHandler | None:
    handler = tool_handlers.get(name)
    if handler is None:
        logger.warning(f"Tool handler not found: {name}")
    return handler


for handler_class in (
    tools.ValidateModelToolHandler,
    tools.FastFrontToolHandler,
    tools.FindBranchesToolHandler,
    tools.FindFoldToolHandler,
    tools.EssentialSpectrumToolHandler,
    tools.EdgeEigenvalueToolHandler,
    tools.ClassifyDestabilizationToolHandler,
    tools.SimulateFrontToolHandler,
):
    add_tool_handler(handler_class())
logger.info(f"Registered {len(tool_handlers)} tool handlers")


@app.list_tools()
async def list_tools() -> list[Tool]:
    """List available tools."""
    return [th.get_tool_description() for th in tool_handlers.values()]


@app.call_tool()
async def call_tool(
    name: str, arguments: Any
) -> Sequence[TextContent | ImageContent | EmbeddedResource]:
    """Handle tool calls."""
    logger.info(f"Tool call: {name} with arguments {arguments}")

    if not isinstance(arguments, dict):
        logger.error("Arguments must be dictionary")
        raise RuntimeError("arguments must be dictionary")

    tool_handler = get_tool_handler(name)
    if not tool_handler:
        raise ValueError(f"Unknown tool: {name}")

    try:
        return tool_handler.run_tool(arguments)
    except FrontLabError as e:
        logger.warning(f"{name} failed ({type(e).__name__}): {e}")
        raise RuntimeError(f"Error ({type(e).__name__}): {e}") from e
    except Exception as e:
        logger.error(f"Error running tool {name}: {e}", exc_info=True)
        raise RuntimeError(f"Error: {e}") from e


async def main():
    logger.info("Starting frontlab MCP server")
    from mcp.server.stdio import stdio_server

    async with stdio_server() as (read_stream, write_stream):
        await app.run(read_stream, write_stream, app.create_initialization_options())
