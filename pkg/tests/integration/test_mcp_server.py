import json
from unittest.mock import patch

import pytest
from mcp.types import TextContent, Tool

from frontlab.server import _log_level, call_tool, get_tool_handler, list_tools, tool_handlers

EXPECTED_TOOLS = [
    "validate_model",
    "fast_front",
    "find_branches",
    "find_fold",
    "essential_spectrum",
    "edge_eigenvalue",
    "classify_destabilization",
    "simulate_front",
]


class TestMCPServerIntegration:
    """Integration tests for the MCP server."""

    def test_tool_handlers_registration(self):
        """Test that all tool handlers are registered under their own names."""
        assert sorted(tool_handlers) == sorted(EXPECTED_TOOLS)
        for name in EXPECTED_TOOLS:
            handler = get_tool_handler(name)
            assert handler is not None
            assert handler.name == name

    def test_get_tool_handler_non_existing(self, caplog):
        assert get_tool_handler("non_existing_tool") is None
        assert "Tool handler not found" in caplog.text

    def test_tool_descriptions(self):
        """Every tool takes an optional model descriptor."""
        for handler in tool_handlers.values():
            tool = handler.get_tool_description()
            assert isinstance(tool, Tool)
            assert tool.name == handler.name
            assert tool.description
            assert tool.inputSchema["type"] == "object"
            assert "model" in tool.inputSchema["properties"]
            assert "model" not in tool.inputSchema["required"]

    @pytest.mark.asyncio
    async def test_list_tools(self):
        tools = await list_tools()
        assert [t.name for t in tools] == EXPECTED_TOOLS

    @pytest.mark.asyncio
    async def test_call_tool_success(self, superslow_descriptor):
        result = await call_tool("find_fold", {"model": superslow_descriptor})
        assert isinstance(result[0], TextContent)
        assert json.loads(result[0].text)["v_fold"] == pytest.approx(2.0, abs=1e-4)

    @pytest.mark.asyncio
    async def test_call_tool_unknown_tool(self):
        with pytest.raises(ValueError, match="Unknown tool: warp_drive"):
            await call_tool("warp_drive", {})

    @pytest.mark.asyncio
    async def test_call_tool_arguments_must_be_dict(self):
        with pytest.raises(RuntimeError, match="arguments must be dictionary"):
            await call_tool("find_fold", ["model"])

    @pytest.mark.asyncio
    async def test_call_tool_numerical_failure(self, superslow_descriptor):
        """Library errors surface as RuntimeError naming the error type."""
        superslow_descriptor["H"]["h0"] = -1.0
        with pytest.raises(RuntimeError, match=r"^Error \(NoFoldFound\): "):
            await call_tool("find_fold", {"model": superslow_descriptor})

    @pytest.mark.asyncio
    async def test_call_tool_missing_argument(self, superslow_descriptor):
        with pytest.raises(RuntimeError, match="^Error: v0 argument required"):
            await call_tool("fast_front", {"model": superslow_descriptor})

    @pytest.mark.asyncio
    @patch.dict("os.environ", {"FRONTLAB_CONFIG_FILE": ""})
    async def test_call_tool_without_model(self):
        with pytest.raises(RuntimeError, match="model argument required"):
            await call_tool("find_branches", {})

    @pytest.mark.asyncio
    async def test_call_tool_from_config_file(self, superslow_descriptor, write_config, monkeypatch):
        monkeypatch.setenv("FRONTLAB_CONFIG_FILE", str(write_config(superslow_descriptor, name="model.yaml")))
        result = await call_tool("find_branches", {})
        assert len(json.loads(result[0].text)["branches"]) == 2


class TestServerLogLevel:
    """FRONTLAB_LOG_LEVEL goes through the settings loader, which never raises."""

    @patch.dict("os.environ", {"FRONTLAB_LOG_LEVEL": "LOUD"})
    def test_unknown_level_falls_back(self, caplog):
        assert _log_level() == "INFO"
        assert "Ignoring unknown FRONTLAB_LOG_LEVEL='LOUD'" in caplog.text

    @patch.dict("os.environ", {"FRONTLAB_LOG_LEVEL": " warning "})
    def test_level_is_normalized(self):
        assert _log_level() == "WARNING"

    @patch.dict("os.environ", {"FRONTLAB_LOG_LEVEL": ""})
    def test_server_default_is_debug(self):
        assert _log_level() == "DEBUG"

    @patch.dict("os.environ", {"FRONTLAB_LOG_LEVEL": "LOUD"})
    def test_reimport_with_unknown_level(self):
        import importlib

        import frontlab.server

        importlib.reload(frontlab.server)
        assert sorted(frontlab.server.tool_handlers) == sorted(EXPECTED_TOOLS)
