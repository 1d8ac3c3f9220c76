"""Completion backends: an OpenAI-compatible HTTP client and a scripted one.

The scripted backend replays canned completions keyed by (agent role,
per-role turn index), which makes whole trajectories bit-deterministic in
tests. Both backends truncate at the first stop sequence so the framework,
never the model, injects tool results.
"""

from __future__ import annotations

import os
import threading
import time
from dataclasses import dataclass, field
from typing import Protocol

import requests


class BackendError(Exception):
    """Transport or schema failure; distinct from content-level parse errors."""


class TranscriptMiss(BackendError):
    """Scripted transcript has no entry for the requested role/turn."""

    def __init__(self, role: str, turn_index: int) -> None:
        super().__init__(f"no scripted completion for role={role!r} turn={turn_index}")
        self.role = role
        self.turn_index = turn_index


@dataclass
class CompletionRequest:
    messages: list[dict[str, str]]
    role: str = "agent"
    temperature: float = 0.6
    top_p: float = 1.0
    stop_sequences: list[str] = field(default_factory=list)
    max_completion_tokens: int = 4096


class Backend(Protocol):
    def complete(self, request: CompletionRequest) -> str: ...


def truncate_at_stops(text: str, stops: list[str]) -> str:
    cut = len(text)
    for stop in stops:
        i = text.find(stop)
        if i >= 0:
            cut = min(cut, i)
    return text[:cut]


@dataclass
class ScriptedTranscript:
    """Canned completions for deterministic replay.

    ``entries`` maps (role, turn_index) to completion text. In strict mode
    any unmatched lookup raises, which catches trajectory drift early. In
    loose mode a per-role default can stand in for missing turns.
    """

    entries: dict[tuple[str, int], str] = field(default_factory=dict)
    strict: bool = True
    defaults: dict[str, str] = field(default_factory=dict)

    @classmethod
    def from_role_lists(
        cls,
        turns: dict[str, list[str]],
        strict: bool = True,
        defaults: dict[str, str] | None = None,
    ) -> "ScriptedTranscript":
        entries = {
            (role, i): text
            for role, texts in turns.items()
            for i, text in enumerate(texts)
        }
        return cls(entries=entries, strict=strict, defaults=dict(defaults or {}))


class ScriptedBackend:
    """Replays a transcript; one instance serves exactly one trajectory."""

    def __init__(self, transcript: ScriptedTranscript) -> None:
        self.transcript = transcript
        self._counters: dict[str, int] = {}

    def complete(self, request: CompletionRequest) -> str:
        turn = self._counters.get(request.role, 0)
        self._counters[request.role] = turn + 1
        text = self.transcript.entries.get((request.role, turn))
        if text is None:
            if self.transcript.strict:
                raise TranscriptMiss(request.role, turn)
            text = self.transcript.defaults.get(request.role)
            if text is None:
                raise TranscriptMiss(request.role, turn)
        return truncate_at_stops(text, request.stop_sequences)


class HttpBackend:
    """OpenAI-compatible chat-completions client.

    Shareable across concurrent trajectories: per-request state only, with
    usage accounting kept in a thread local. Transient transport failures
    retry with exponential backoff; schema problems fail immediately.
    """

    def __init__(
        self,
        base_url: str,
        model: str,
        api_key_env: str = "RPREACT_API_KEY",
        timeout_s: float = 120.0,
        retries: int = 3,
        backoff_s: float = 1.0,
    ) -> None:
        self.base_url = base_url.rstrip("/")
        self.model = model
        self.api_key_env = api_key_env
        self.timeout_s = timeout_s
        self.retries = retries
        self.backoff_s = backoff_s
        self._local = threading.local()

    def _headers(self) -> dict[str, str]:
        headers = {"Content-Type": "application/json"}
        key = os.environ.get(self.api_key_env, "")
        if key:
            headers["Authorization"] = f"Bearer {key}"
        return headers

    def complete(self, request: CompletionRequest) -> str:
        url = f"{self.base_url}/chat/completions"
        payload = {
            "model": self.model,
            "messages": request.messages,
            "temperature": request.temperature,
            "top_p": request.top_p,
            "max_tokens": request.max_completion_tokens,
        }
        if request.stop_sequences:
            payload["stop"] = request.stop_sequences
        last_error: Exception | None = None
        for attempt in range(self.retries):
            try:
                response = requests.post(
                    url, json=payload, headers=self._headers(), timeout=self.timeout_s
                )
                response.raise_for_status()
            except requests.RequestException as exc:
                last_error = exc
                if attempt + 1 < self.retries:
                    time.sleep(self.backoff_s * (2**attempt))
                continue
            try:
                data = response.json()
                content = data["choices"][0]["message"]["content"]
            except (ValueError, KeyError, IndexError, TypeError) as exc:
                raise BackendError(f"malformed completion response: {exc}") from exc
            usage = data.get("usage") or {}
            self._local.prompt_tokens = usage.get("prompt_tokens")
            return truncate_at_stops(content, request.stop_sequences)
        raise BackendError(f"completion failed after {self.retries} attempts: {last_error}")

    def last_prompt_tokens(self) -> int | None:
        return getattr(self._local, "prompt_tokens", None)
