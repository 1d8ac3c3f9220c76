"""Executes submitted Python snippets with injected variable bindings.

Protocol: UTF-8, one JSON object per line on stdin and stdout. A request
carries {id, code, variables, timeout_s}; the response echoes the id with
{status, stdout, result, error_text}. Each request runs in a fresh
namespace seeded with the variable bindings; nothing survives between
requests. The final statement's expression value, when there is one, is
rendered like a REPL echo (repr, None suppressed).

Wall-clock timeouts are the host's job: it kills this process and
respawns it, which is why no alarm is set here. Optional CPU-time and
address-space caps can be applied via environment variables as a
backstop. This is process isolation for a trusted local tool, not a
security boundary against hostile code.
"""

from __future__ import annotations

import ast
import io
import json
import os
import sys
import traceback
from contextlib import redirect_stdout

SHUTDOWN_CODE = "__shutdown__"
TRUNCATION_MARKER = "...[truncated]"

MAX_OUTPUT_BYTES = int(os.environ.get("CODEEXEC_MAX_OUTPUT_BYTES", str(64 * 1024)))


def apply_resource_limits() -> None:
    """Best-effort CPU and address-space caps from the environment."""
    try:
        import resource
    except ImportError:
        return
    cpu_s = os.environ.get("CODEEXEC_MAX_CPU_SECONDS")
    if cpu_s:
        limit = int(cpu_s)
        resource.setrlimit(resource.RLIMIT_CPU, (limit, limit))
    address_mb = os.environ.get("CODEEXEC_MAX_ADDRESS_SPACE_MB")
    if address_mb:
        limit = int(address_mb) * 1024 * 1024
        resource.setrlimit(resource.RLIMIT_AS, (limit, limit))


def _cap(text: str, limit: int | None = None) -> str:
    # late lookup so the cap stays tunable after import
    limit = MAX_OUTPUT_BYTES if limit is None else limit
    encoded = text.encode("utf-8")
    if len(encoded) <= limit:
        return text
    return encoded[:limit].decode("utf-8", errors="ignore") + TRUNCATION_MARKER


def run_code(code: str, variables: dict[str, str]) -> tuple[str, str]:
    """Run code in a fresh namespace; return (captured stdout, result text)."""
    tree = ast.parse(code)
    namespace: dict = {"__name__": "__codeexec__"}
    namespace.update(variables)
    last_expr = None
    if tree.body and isinstance(tree.body[-1], ast.Expr):
        last_expr = tree.body.pop()
    buffer = io.StringIO()
    with redirect_stdout(buffer):
        exec(compile(tree, "<request>", "exec"), namespace)
        value = None
        if last_expr is not None:
            value = eval(
                compile(ast.Expression(last_expr.value), "<request>", "eval"), namespace
            )
    result = "" if value is None else repr(value)
    return buffer.getvalue(), result


def handle_request(doc: dict) -> dict:
    request_id = str(doc.get("id", "unknown"))
    code = doc.get("code", "")
    variables = doc.get("variables") or {}
    try:
        stdout, result = run_code(code, dict(variables))
    except BaseException:
        return {
            "id": request_id,
            "status": "error",
            "stdout": "",
            "result": "",
            "error_text": _cap(traceback.format_exc(limit=8)),
        }
    return {
        "id": request_id,
        "status": "ok",
        "stdout": _cap(stdout),
        "result": _cap(result),
    }


def serve(stdin=None, stdout=None) -> int:
    stdin = stdin if stdin is not None else sys.stdin
    stdout = stdout if stdout is not None else sys.stdout

    def emit(doc: dict) -> None:
        stdout.write(json.dumps(doc) + "\n")
        stdout.flush()

    for line in stdin:
        if not line.strip():
            continue
        try:
            doc = json.loads(line)
            if not isinstance(doc, dict):
                raise ValueError("request must be a JSON object")
        except ValueError as exc:
            emit(
                {
                    "id": "unknown",
                    "status": "error",
                    "stdout": "",
                    "result": "",
                    "error_text": f"malformed request line: {exc}",
                }
            )
            continue
        if doc.get("code") == SHUTDOWN_CODE:
            emit({"id": str(doc.get("id", "unknown")), "status": "ok", "stdout": "", "result": ""})
            return 0
        emit(handle_request(doc))
    return 0
