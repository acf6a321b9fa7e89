import asyncio

__version__ = "0.3.0"


def main():
    """Entry point for the stdio MCP server."""
    from . import server

    asyncio.run(server.main())


__all__ = ["__version__", "main"]
