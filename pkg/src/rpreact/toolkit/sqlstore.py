"""Embedded relational store over the same CSVs the tabular sessions use.

Columns whose every non-empty value parses as a number get numeric
affinity so arithmetic comparisons behave the same as FilterDB's. Result
rows without an explicit ORDER BY are sorted on their rendered cells to
keep output deterministic.
"""

from __future__ import annotations

import re
import sqlite3

from rpreact.toolkit.errors import ToolError
from rpreact.toolkit.tables import Table, _as_number

_ORDER_BY = re.compile(r"\border\s+by\b", re.IGNORECASE)


def _column_type(values: list[str]) -> str:
    non_empty = [v for v in values if v.strip()]
    if not non_empty:
        return "TEXT"
    nums = [_as_number(v) for v in non_empty]
    if any(n is None for n in nums):
        return "TEXT"
    if all(float(n).is_integer() for n in nums if n is not None):
        return "INTEGER"
    return "REAL"


def _quote_ident(name: str) -> str:
    return '"' + name.replace('"', '""') + '"'


def render_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        if value.is_integer():
            return str(int(value))
        return format(value, ".12g")
    return str(value)


class SqlStore:
    """In-memory SQLite database with one table per registered CSV."""

    def __init__(self, tables: dict[str, Table]) -> None:
        self._conn = sqlite3.connect(":memory:")
        for name, table in tables.items():
            self._register(name, table)
        # agents only read; writes come back as error text
        self._conn.execute("PRAGMA query_only = ON")

    def _register(self, name: str, table: Table) -> None:
        types = [
            _column_type([row[i] for row in table.rows])
            for i in range(len(table.columns))
        ]
        cols = ", ".join(
            f"{_quote_ident(c)} {t}" for c, t in zip(table.columns, types)
        )
        self._conn.execute(f"CREATE TABLE {_quote_ident(name)} ({cols})")
        placeholders = ", ".join("?" for _ in table.columns)
        converted = []
        for row in table.rows:
            cells = []
            for value, ctype in zip(row, types):
                if ctype == "TEXT" or not value.strip():
                    cells.append(value if value.strip() else None)
                elif ctype == "INTEGER":
                    cells.append(int(float(value)))
                else:
                    cells.append(float(value))
            converted.append(tuple(cells))
        self._conn.executemany(
            f"INSERT INTO {_quote_ident(name)} VALUES ({placeholders})", converted
        )
        self._conn.commit()

    def execute(self, query: str) -> str:
        try:
            cursor = self._conn.execute(query)
            rows = cursor.fetchall()
        except sqlite3.Error as exc:
            raise ToolError(f"SQL: {exc}") from exc
        if cursor.description is None:
            return "OK"
        header = ",".join(col[0] for col in cursor.description)
        rendered = [[render_cell(v) for v in row] for row in rows]
        if _ORDER_BY.search(query) is None:
            rendered.sort()
        lines = [header] + [",".join(row) for row in rendered]
        return "\n".join(lines)

    def close(self) -> None:
        self._conn.close()
