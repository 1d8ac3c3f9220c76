"""Host-side bridge to the code-execution worker process.

The worker is a child process speaking one JSON object per line on
stdin/stdout (see the codeexec-worker package). The bridge enforces the
wall-clock timeout: when a request overruns, the worker is killed and the
next request transparently uses a fresh process. This is process
isolation for a trusted local tool, not a security boundary against a
hostile model.
"""

from __future__ import annotations

import json
import queue
import subprocess
import sys
import threading
import time
import uuid
from dataclasses import dataclass
from typing import Protocol, Sequence

from rpreact.context import VariableStore
from rpreact.toolkit.errors import UnknownVariable, WorkerTimeout, WorkerUnavailable

DEFAULT_TIMEOUT_S = 10.0
DEFAULT_OUTPUT_CAP_BYTES = 64 * 1024
TRUNCATION_MARKER = "...[truncated]"

DEFAULT_WORKER_CMD = (sys.executable, "-m", "codeexec_worker")


@dataclass(frozen=True)
class ExecOutcome:
    status: str  # "ok" | "error" | "timeout"
    stdout: str = ""
    result: str = ""
    error_text: str = ""


class CodeWorker(Protocol):
    def execute(self, code: str, variables: dict[str, str], timeout_s: float) -> ExecOutcome: ...


class SubprocessCodeWorker:
    """Owns one worker process; respawns it after a crash or a kill."""

    def __init__(self, command: Sequence[str] = DEFAULT_WORKER_CMD, grace_s: float = 0.5) -> None:
        self._command = list(command)
        self._grace_s = grace_s
        self._proc: subprocess.Popen | None = None
        self._lines: queue.Queue[str | None] = queue.Queue()

    def _spawn(self) -> None:
        try:
            self._proc = subprocess.Popen(
                self._command,
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                stderr=subprocess.DEVNULL,
                text=True,
                encoding="utf-8",
                bufsize=1,
            )
        except OSError as exc:
            self._proc = None
            raise WorkerUnavailable(f"could not start code worker: {exc}") from exc
        self._lines = queue.Queue()
        thread = threading.Thread(
            target=self._pump, args=(self._proc.stdout, self._lines), daemon=True
        )
        thread.start()

    @staticmethod
    def _pump(stream, sink: queue.Queue) -> None:
        for line in stream:
            sink.put(line)
        sink.put(None)

    def _ensure_alive(self) -> None:
        if self._proc is None or self._proc.poll() is not None:
            self._spawn()

    def _kill(self) -> None:
        if self._proc is not None:
            self._proc.kill()
            self._proc.wait()
            self._proc = None

    def execute(self, code: str, variables: dict[str, str], timeout_s: float) -> ExecOutcome:
        self._ensure_alive()
        assert self._proc is not None and self._proc.stdin is not None
        request_id = uuid.uuid4().hex
        request = {"id": request_id, "code": code, "variables": variables, "timeout_s": timeout_s}
        try:
            self._proc.stdin.write(json.dumps(request) + "\n")
            self._proc.stdin.flush()
        except (BrokenPipeError, OSError):
            self._kill()
            raise WorkerUnavailable("code worker pipe is broken") from None
        deadline = time.monotonic() + timeout_s + self._grace_s
        while True:
            remaining = deadline - time.monotonic()
            if remaining <= 0:
                self._kill()
                return ExecOutcome(status="timeout", error_text=f"execution exceeded {timeout_s:g}s")
            try:
                line = self._lines.get(timeout=remaining)
            except queue.Empty:
                self._kill()
                return ExecOutcome(status="timeout", error_text=f"execution exceeded {timeout_s:g}s")
            if line is None:
                self._kill()
                return ExecOutcome(status="error", error_text="code worker exited unexpectedly")
            try:
                response = json.loads(line)
            except ValueError:
                continue
            if response.get("id") != request_id:
                continue  # stale response from an earlier killed request
            return ExecOutcome(
                status=response.get("status", "error"),
                stdout=response.get("stdout", ""),
                result=response.get("result", ""),
                error_text=response.get("error_text", ""),
            )

    def close(self) -> None:
        if self._proc is not None and self._proc.poll() is None:
            try:
                assert self._proc.stdin is not None
                self._proc.stdin.write(json.dumps({"id": "shutdown", "code": "__shutdown__"}) + "\n")
                self._proc.stdin.flush()
                self._proc.wait(timeout=2)
            except (OSError, subprocess.TimeoutExpired):
                self._kill()
        self._proc = None


def _cap_bytes(text: str, cap: int) -> str:
    if len(text.encode("utf-8")) <= cap:
        return text
    encoded = text.encode("utf-8")[:cap]
    return encoded.decode("utf-8", errors="ignore") + TRUNCATION_MARKER


def compose_output(stdout: str, result: str) -> str:
    parts = []
    if stdout:
        parts.append(stdout.rstrip("\n"))
    if result:
        parts.append(result)
    return "\n".join(parts)


def code_interpreter(
    code: str,
    variables: Sequence[str],
    store: VariableStore,
    worker: CodeWorker | None,
    timeout_s: float = DEFAULT_TIMEOUT_S,
    output_cap: int = DEFAULT_OUTPUT_CAP_BYTES,
) -> str:
    """Run code with variable bindings resolved from the store.

    Returns captured stdout plus the final expression value. Worker-side
    exceptions come back as ``Error:`` text; timeouts and missing
    variables raise tool errors that the dispatcher renders the same way.
    """
    bindings: dict[str, str] = {}
    for name in variables:
        if name not in store:
            raise UnknownVariable(f"unknown variable: {name}")
        bindings[name] = store.get(name)
    if worker is None:
        raise WorkerUnavailable("no code execution worker is configured")
    outcome = worker.execute(code, bindings, timeout_s)
    if outcome.status == "timeout":
        raise WorkerTimeout(f"code execution timed out after {timeout_s:g}s")
    if outcome.status != "ok":
        return f"Error: {outcome.error_text}"
    return _cap_bytes(compose_output(outcome.stdout, outcome.result), output_cap)
