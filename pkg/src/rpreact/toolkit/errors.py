from __future__ import annotations


class ToolError(Exception):
    """Tool-level failure; rendered as an ``Error: ...`` observation."""


class UnknownVariable(ToolError):
    pass


class WorkerTimeout(ToolError):
    pass


class WorkerUnavailable(ToolError):
    pass
