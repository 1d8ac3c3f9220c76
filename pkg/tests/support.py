"""Shared test helpers (kept out of conftest so imports stay unambiguous)."""

from __future__ import annotations

import json
from pathlib import Path

from rpreact.llm_backend import ScriptedBackend, ScriptedTranscript
from rpreact.toolkit.codeexec import ExecOutcome

DATA_DIR = Path(__file__).resolve().parent.parent / "data"


class StubWorker:
    """Canned code-interpreter outcomes keyed by code text; no subprocess."""

    def __init__(self, outcomes: dict[str, ExecOutcome] | None = None,
                 default: ExecOutcome | None = None) -> None:
        self.outcomes = outcomes or {}
        self.default = default or ExecOutcome(status="ok", stdout="", result="stub")
        self.requests: list[tuple[str, dict[str, str], float]] = []

    def execute(self, code: str, variables: dict[str, str], timeout_s: float) -> ExecOutcome:
        self.requests.append((code, dict(variables), timeout_s))
        return self.outcomes.get(code, self.default)


def scripted_backend_for(qid: str) -> ScriptedBackend:
    doc = json.loads((DATA_DIR / "scripted_flights.json").read_text(encoding="utf-8"))
    turns = doc["transcripts"][qid]
    return ScriptedBackend(ScriptedTranscript.from_role_lists(turns))


def adversarial_backend(**defaults: str) -> ScriptedBackend:
    base = {
        "rpa": "<think>again</think><|begin_search_query|>keep going<|end_search_query|>",
        "pea": "Thought: one more step. Action: Calculate[1+1]",
        "react": "Thought: one more step. Action: Calculate[1+1]",
        "evaluator": "[FAILURE]",
        "refine": "Load the database before filtering it.",
    }
    base.update(defaults)
    return ScriptedBackend(ScriptedTranscript.from_role_lists({}, strict=False, defaults=base))
