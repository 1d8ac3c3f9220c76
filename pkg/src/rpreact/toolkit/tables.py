"""Tabular sessions over CSV files: LoadDB / FilterDB / GetValue.

A filter condition is ``column relation value``; several conditions joined
by commas form a conjunction. Values compare numerically when both sides
parse as numbers, otherwise as strings.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

from rpreact.toolkit.errors import ToolError

RELATIONS = ("=", ">", "<", ">=", "<=", "contains")


@dataclass(frozen=True)
class Condition:
    column: str
    relation: str
    value: str


@dataclass
class Table:
    columns: list[str]
    rows: list[tuple[str, ...]]


def load_csv(path: str | Path) -> Table:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = [tuple(row) for row in reader]
    return Table(columns=header, rows=rows)


def _as_number(s: str) -> float | None:
    t = s.strip()
    if not t:
        return None
    try:
        v = float(t)
    except ValueError:
        return None
    # float() also accepts nan/inf spellings, which are not tabular numbers
    if v != v or v in (float("inf"), float("-inf")):
        return None
    return v


def parse_condition(text: str) -> Condition:
    part = text.strip()
    if " contains " in part:
        col, val = part.split(" contains ", 1)
        return Condition(column=col.strip(), relation="contains", value=val.strip())
    for idx, ch in enumerate(part):
        if ch in "<>=":
            rel = ch
            if ch in "<>" and part[idx + 1 : idx + 2] == "=":
                rel = ch + "="
            col = part[:idx].strip()
            val = part[idx + len(rel) :].strip()
            if not col:
                break
            return Condition(column=col, relation=rel, value=val)
    raise ToolError(f"unknown relation in condition: {part!r}")


def parse_conditions(text: str) -> list[Condition]:
    parts = [p for p in text.split(",") if p.strip()]
    if not parts:
        raise ToolError("empty filter condition")
    return [parse_condition(p) for p in parts]


def condition_holds(cond: Condition, cell: str) -> bool:
    if cond.relation == "contains":
        return cond.value in cell
    a = _as_number(cell)
    b = _as_number(cond.value)
    if a is not None and b is not None:
        left: float | str = a
        right: float | str = b
    else:
        left, right = cell, cond.value
    if cond.relation == "=":
        return left == right
    if cond.relation == ">":
        return left > right
    if cond.relation == "<":
        return left < right
    if cond.relation == ">=":
        return left >= right
    if cond.relation == "<=":
        return left <= right
    raise ToolError(f"unknown relation: {cond.relation!r}")


@dataclass
class TabularSession:
    """One loaded database plus the stack of filters applied to it."""

    db_name: str
    table: Table
    active_rows: list[tuple[str, ...]] = field(default_factory=list)
    filter_stack: list[str] = field(default_factory=list)

    def __post_init__(self) -> None:
        if not self.active_rows:
            self.active_rows = list(self.table.rows)

    def column_index(self, name: str) -> int:
        try:
            return self.table.columns.index(name)
        except ValueError:
            raise ToolError(f"unknown column: {name}") from None

    def apply_filter(self, condition_text: str) -> int:
        conds = parse_conditions(condition_text)
        idx = {c.column: self.column_index(c.column) for c in conds}
        before = len(self.active_rows)
        self.active_rows = [
            row
            for row in self.active_rows
            if all(condition_holds(c, row[idx[c.column]]) for c in conds)
        ]
        assert len(self.active_rows) <= before
        self.filter_stack.append(condition_text)
        return len(self.active_rows)

    def column_values(self, name: str) -> list[str]:
        i = self.column_index(name)
        return [row[i] for row in self.active_rows]
