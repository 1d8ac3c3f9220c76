from rpreact.toolkit.dispatch import ToolError, dispatch
from rpreact.toolkit.environment import DataPaths, ToolEnvironment

__all__ = ["DataPaths", "ToolEnvironment", "ToolError", "dispatch"]
