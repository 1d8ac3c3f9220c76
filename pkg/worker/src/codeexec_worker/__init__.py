"""Code-execution worker: one JSON request per stdin line, one response per stdout line."""

from codeexec_worker.worker import handle_request, run_code, serve

__all__ = ["handle_request", "run_code", "serve"]
