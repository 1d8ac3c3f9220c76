"""Wire grammars spoken by the agents.

Two dialects live here: the planner's tagged query/result/finish protocol
and the executor's Thought/Action/Observation turns with the 13-way action
syntax. Everything is pure text manipulation; no state, safe to share
across threads.

Action payloads are extracted by bracket-depth counting, so code bodies
with nested ``[`` / ``]`` survive a round trip. Payloads whose brackets
are unbalanced at depth zero cannot be represented and raise.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum

BEGIN_SEARCH_QUERY = "<|begin_search_query|>"
END_SEARCH_QUERY = "<|end_search_query|>"
BEGIN_SEARCH_RESULT = "<|begin_search_result|>"
END_SEARCH_RESULT = "<|end_search_result|>"
FINISH_OPEN = "<Finish>"
FINISH_CLOSE = "</Finish>"
SUCCESS_TOKEN = "[SUCCESS]"
FAILURE_TOKEN = "[FAILURE]"

CALCULATE = "Calculate"
RETRIEVE_AGENDA = "RetrieveAgenda"
RETRIEVE_SCIREX = "RetrieveScirex"
LOAD_DB = "LoadDB"
FILTER_DB = "FilterDB"
GET_VALUE = "GetValue"
LOAD_GRAPH = "LoadGraph"
NEIGHBOUR_CHECK = "NeighbourCheck"
NODE_CHECK = "NodeCheck"
EDGE_CHECK = "EdgeCheck"
SQL_INTERPRETER = "SQLInterpreter"
PYTHON_INTERPRETER = "PythonInterpreter"
FINISH = "Finish"

ACTION_NAMES = (
    CALCULATE,
    RETRIEVE_AGENDA,
    RETRIEVE_SCIREX,
    LOAD_DB,
    FILTER_DB,
    GET_VALUE,
    LOAD_GRAPH,
    NEIGHBOUR_CHECK,
    NODE_CHECK,
    EDGE_CHECK,
    SQL_INTERPRETER,
    PYTHON_INTERPRETER,
    FINISH,
)

# Names are matched case-sensitively; longest first so no prefix ambiguity
# can ever bite if a name extending another is added later.
_NAMES_LONGEST_FIRST = tuple(sorted(ACTION_NAMES, key=len, reverse=True))

_THOUGHT_HEADER = re.compile(r"Thought(?:\s+\d+)?\s*:")
_ACTION_HEADER = re.compile(r"Action(?:\s+\d+)?\s*:")


class ProtocolError(Exception):
    """Base for content-level parse failures."""


class MalformedOutput(ProtocolError):
    """Completion does not contain the required structure; retryable."""


class UnknownAction(MalformedOutput):
    """Action name is not one of the 13 known tools."""


class UnbalancedBrackets(MalformedOutput):
    """Payload brackets never close at depth zero."""


class Verdict(Enum):
    SUCCESS = "success"
    FAILURE = "failure"


@dataclass(frozen=True)
class RpaTurn:
    """One planner completion: free-text reasoning plus one directive.

    Exactly one of ``query`` / ``finish`` is set; the other is None. The
    directive is the first complete tag pair in document order, so any
    later tags are treated as post-stop spillover and dropped.
    """

    think_text: str
    query: str | None = None
    finish: str | None = None


@dataclass(frozen=True)
class Action:
    kind: str
    payload: str
    variables: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if self.kind not in ACTION_NAMES:
            raise ValueError(f"unknown action kind: {self.kind!r}")
        if self.variables and self.kind != PYTHON_INTERPRETER:
            raise ValueError(f"{self.kind} takes no variables")


@dataclass(frozen=True)
class PeaTurn:
    thought: str
    action: Action


def _first_span(text: str, open_tok: str, close_tok: str, *, skip_blank: bool = False):
    """Return (start, inner) for the first complete open..close pair, else None."""
    pos = 0
    while True:
        i = text.find(open_tok, pos)
        if i < 0:
            return None
        j = text.find(close_tok, i + len(open_tok))
        if j < 0:
            return None
        inner = text[i + len(open_tok) : j]
        if skip_blank and not inner.strip():
            pos = i + len(open_tok)
            continue
        return i, j + len(close_tok), inner


def parse_rpa_output(text: str) -> RpaTurn:
    """Extract the effective directive from a raw planner completion.

    The first complete query span (with non-blank content) and the first
    complete finish span compete; whichever starts earlier wins. Raises
    MalformedOutput when neither exists.
    """
    q = _first_span(text, BEGIN_SEARCH_QUERY, END_SEARCH_QUERY, skip_blank=True)
    f = _first_span(text, FINISH_OPEN, FINISH_CLOSE)
    if q is None and f is None:
        raise MalformedOutput("no complete search-query or finish tag pair")
    if f is None or (q is not None and q[0] < f[0]):
        start, end, inner = q
        think = (text[:start] + text[end:]).strip()
        return RpaTurn(think_text=think, query=inner.strip())
    start, end, inner = f
    think = (text[:start] + text[end:]).strip()
    return RpaTurn(think_text=think, finish=inner.strip())


def render_search_result(content: str) -> str:
    """Wrap executor output in result tags, content byte-for-byte untouched."""
    return f"{BEGIN_SEARCH_RESULT}{content}{END_SEARCH_RESULT}"


def parse_action(text: str) -> Action:
    """Parse ``Name[payload]`` or ``PythonInterpreter(v1, v2)[payload]``.

    Payload extraction counts bracket depth, so nested brackets are kept
    intact. Trailing text after the matching close bracket is ignored.
    """
    s = text.lstrip()
    name = next((n for n in _NAMES_LONGEST_FIRST if s.startswith(n)), None)
    if name is None:
        head = s.split("[", 1)[0].strip() or s[:30]
        raise UnknownAction(f"unknown action name: {head!r}")
    i = len(name)
    while i < len(s) and s[i] in " \t":
        i += 1
    variables: tuple[str, ...] = ()
    if name == PYTHON_INTERPRETER and i < len(s) and s[i] == "(":
        j = s.find(")", i)
        if j < 0:
            raise UnbalancedBrackets("variable list never closes")
        variables = tuple(v.strip() for v in s[i + 1 : j].split(",") if v.strip())
        i = j + 1
        while i < len(s) and s[i] in " \t":
            i += 1
    if i >= len(s) or s[i] != "[":
        raise MalformedOutput(f"expected '[' after {name}")
    depth = 0
    for k in range(i, len(s)):
        if s[k] == "[":
            depth += 1
        elif s[k] == "]":
            depth -= 1
            if depth == 0:
                return Action(kind=name, payload=s[i + 1 : k], variables=variables)
    raise UnbalancedBrackets(f"payload of {name} never closes")


def render_action(action: Action) -> str:
    if action.variables:
        return f"{action.kind}({', '.join(action.variables)})[{action.payload}]"
    return f"{action.kind}[{action.payload}]"


def parse_pea_output(text: str) -> PeaTurn:
    """Split a raw executor completion at the first Action header.

    The action is parsed from everything after the header; the thought is
    whatever sits between the Thought header (when present) and the Action
    header. Raises MalformedOutput when no action can be parsed.
    """
    m_thought = _THOUGHT_HEADER.search(text)
    search_from = m_thought.end() if m_thought else 0
    m_action = _ACTION_HEADER.search(text, search_from)
    if m_action is None:
        raise MalformedOutput("no Action header in executor output")
    thought_start = m_thought.end() if m_thought else 0
    thought = text[thought_start : m_action.start()].strip()
    action = parse_action(text[m_action.end() :])
    return PeaTurn(thought=thought, action=action)


def parse_verdict(text: str) -> Verdict:
    """Leftmost [SUCCESS] / [FAILURE] token wins; anything else is Failure."""
    i = text.find(SUCCESS_TOKEN)
    j = text.find(FAILURE_TOKEN)
    if i < 0 and j < 0:
        return Verdict.FAILURE
    if j < 0 or (0 <= i < j):
        return Verdict.SUCCESS
    return Verdict.FAILURE
