"""Prompt templates and few-shot example assets.

Templates are plain-text files with ``{placeholder}`` slots; examples are
static per-domain assets selected by file name, never retrieved
dynamically.
"""

from __future__ import annotations

from functools import lru_cache
from importlib.resources import files

_ROOT = files("rpreact") / "prompts"


@lru_cache(maxsize=None)
def load_template(name: str) -> str:
    return (_ROOT / f"{name}.txt").read_text(encoding="utf-8")


@lru_cache(maxsize=None)
def load_examples(role: str, domain: str | None = None) -> str:
    if domain is not None:
        candidate = _ROOT / "examples" / f"{role}_{domain}.txt"
        try:
            return candidate.read_text(encoding="utf-8")
        except (FileNotFoundError, OSError):
            pass
    return (_ROOT / "examples" / f"{role}_default.txt").read_text(encoding="utf-8")


@lru_cache(maxsize=None)
def _react_default_examples() -> str:
    # React has no single default asset; the unified fallback concatenates
    # every per-domain example, mirroring the unified executor setup.
    names = ["flights", "coffee", "airbnb", "yelp", "scirex", "agenda"]
    parts = [(_ROOT / "examples" / f"react_{n}.txt").read_text(encoding="utf-8") for n in names]
    return "\n".join(parts)


def react_examples(domain: str | None = None) -> str:
    if domain is not None:
        candidate = _ROOT / "examples" / f"react_{domain}.txt"
        try:
            return candidate.read_text(encoding="utf-8")
        except (FileNotFoundError, OSError):
            pass
    return _react_default_examples()


def render_rpa(question: str, scratchpad: str, examples: str, max_search_limit: int) -> str:
    return load_template("rpa").format(
        MAX_SEARCH_LIMIT=max_search_limit,
        examples=examples,
        question=question,
        scratchpad=scratchpad,
    )


def render_pea(question: str, scratchpad: str, examples: str, prev_actions: str) -> str:
    return load_template("pea").format(
        examples=examples,
        prev_actions=prev_actions,
        question=question,
        scratchpad=scratchpad,
    )


def render_react(question: str, scratchpad: str, examples: str) -> str:
    return load_template("react").format(
        examples=examples, question=question, scratchpad=scratchpad
    )


def render_evaluator(question: str, trajectory: str) -> str:
    return load_template("reflexion_evaluator").format(
        question=question, trajectory=trajectory
    )


def render_refine(question: str, trajectory: str, prev_reflections: str) -> str:
    return load_template("reflexion_refine").format(
        question=question, trajectory=trajectory, prev_reflections=prev_reflections
    )
