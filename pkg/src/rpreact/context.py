"""Context-saving mechanism: threshold-gated previews plus a variable store.

Tool outputs longer than a token threshold are not shown to the agent in
full. The agent sees the first T tokens; the complete text is parked in a
per-trajectory variable (``value0``, ``value1``, ...) that the code
interpreter can load on demand.

Tokens here are whitespace-delimited words, not model tokens. That keeps
the gate deterministic across backends; swap ``tokenize_for_threshold``
for a model tokenizer if byte-accurate budgets ever matter.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable


class VariableStore:
    """Ordered, append-only map of generated variable names to full text."""

    def __init__(self) -> None:
        self._entries: dict[str, str] = {}
        self._counter = 0

    def add(self, text: str) -> str:
        name = f"value{self._counter}"
        self._counter += 1
        self._entries[name] = text
        return name

    def get(self, name: str) -> str:
        return self._entries[name]

    def __contains__(self, name: str) -> bool:
        return name in self._entries

    def __len__(self) -> int:
        return len(self._entries)

    def names(self) -> list[str]:
        return list(self._entries)


@dataclass(frozen=True)
class Observation:
    """What the agent gets to see of one tool output."""

    preview: str
    variable: str | None
    truncated: bool
    full_token_count: int


def tokenize_for_threshold(text: str) -> list[str]:
    """Split on runs of whitespace. Deterministic and model-independent."""
    return text.split()


def ingest_tool_output(
    text: str,
    threshold: int,
    store: VariableStore,
    tokenize: Callable[[str], list[str]] = tokenize_for_threshold,
) -> Observation:
    """Gate one tool output against the token threshold.

    At or under the threshold the text passes through byte-identical. Over
    it, the preview is the first ``threshold`` tokens rejoined with single
    spaces and the original text goes into a fresh variable. ``tokenize``
    is swappable for a model-tokenizer-based counter.
    """
    if threshold < 1:
        raise ValueError("threshold must be >= 1")
    tokens = tokenize(text)
    if len(tokens) <= threshold:
        return Observation(preview=text, variable=None, truncated=False, full_token_count=len(tokens))
    preview = " ".join(tokens[:threshold])
    name = store.add(text)
    return Observation(preview=preview, variable=name, truncated=True, full_token_count=len(tokens))


_NOTICE_TEMPLATE = (
    'The output for "{subquery}" is too large to return in full '
    "({count} tokens). Preview of the first {shown} tokens: {preview}\n"
    "The complete output is stored in the variable '{variable}'. "
    "Analyzing the full content requires running Python code on '{variable}'."
)


def compose_executor_notice(observation: Observation, subquery: str) -> str:
    """Render the fixed warning that travels with a truncated output.

    Pure function: identical inputs produce identical bytes. Requires a
    truncated observation (untruncated outputs are shown as-is).
    """
    if not observation.truncated or observation.variable is None:
        raise ValueError("notice only applies to truncated observations")
    return _NOTICE_TEMPLATE.format(
        subquery=subquery,
        count=observation.full_token_count,
        shown=len(observation.preview.split()),
        preview=observation.preview,
        variable=observation.variable,
    )
