"""Tool registry, geometry tools, and fixture-backed tool implementations."""

from .registry import (
    ArgumentError,
    DegenerateContour,
    DuplicateTool,
    FixtureMiss,
    ToolBinding,
    ToolDescriptor,
    ToolError,
    ToolParam,
    ToolRegistry,
    UnknownTool,
)
from .catalog import CATEGORIES, build_default_registry

__all__ = [
    "ArgumentError",
    "CATEGORIES",
    "DegenerateContour",
    "DuplicateTool",
    "FixtureMiss",
    "ToolBinding",
    "ToolDescriptor",
    "ToolError",
    "ToolParam",
    "ToolRegistry",
    "UnknownTool",
    "build_default_registry",
]
