"""Per-trajectory tool state: loaded session, graphs, corpora, SQL, worker."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

from rpreact.context import VariableStore
from rpreact.toolkit.codeexec import (
    DEFAULT_OUTPUT_CAP_BYTES,
    DEFAULT_TIMEOUT_S,
    CodeWorker,
)
from rpreact.toolkit.errors import ToolError
from rpreact.toolkit.graphs import GraphStore, load_graph_file
from rpreact.toolkit.retrieval import Corpus, load_corpus
from rpreact.toolkit.sqlstore import SqlStore
from rpreact.toolkit.tables import TabularSession, load_csv


@dataclass
class DataPaths:
    """Where each data backend loads from. All paths point at files on disk."""

    tables: dict[str, Path] = field(default_factory=dict)
    graphs: dict[str, Path] = field(default_factory=dict)
    corpora: dict[str, Path] = field(default_factory=dict)

    def validate(self) -> None:
        for group in (self.tables, self.graphs, self.corpora):
            for name, path in group.items():
                if not Path(path).exists():
                    raise FileNotFoundError(f"data path for {name!r} missing: {path}")


class ToolEnvironment:
    """Owned by exactly one trajectory; never shared across threads.

    State persists across executor invocations within a trajectory (load
    then filter works across sub-queries) and is wiped by ``reset()``
    between retry trials.
    """

    def __init__(self, paths: DataPaths, worker: CodeWorker | None = None) -> None:
        self.paths = paths
        self.worker = worker
        self.code_timeout_s = DEFAULT_TIMEOUT_S
        self.output_cap_bytes = DEFAULT_OUTPUT_CAP_BYTES
        self.store = VariableStore()
        self.session: TabularSession | None = None
        self.loaded_graphs: dict[str, GraphStore] = {}
        self._sql: SqlStore | None = None
        self._corpora: dict[str, Corpus] = {}

    def reset(self) -> None:
        self.store = VariableStore()
        self.session = None
        self.loaded_graphs = {}
        if self._sql is not None:
            self._sql.close()
        self._sql = None
        self._corpora = {}

    def load_db(self, name: str) -> TabularSession:
        if name not in self.paths.tables:
            known = "/".join(sorted(self.paths.tables)) or "none configured"
            raise ToolError(f"unknown database: {name} (available: {known})")
        table = load_csv(self.paths.tables[name])
        self.session = TabularSession(db_name=name, table=table)
        return self.session

    def require_session(self) -> TabularSession:
        if self.session is None:
            raise ToolError("no database loaded")
        return self.session

    def load_graph(self, name: str) -> GraphStore:
        if name not in self.paths.graphs:
            known = "/".join(sorted(self.paths.graphs)) or "none configured"
            raise ToolError(f"unknown graph: {name} (available: {known})")
        graph = load_graph_file(name, self.paths.graphs[name])
        self.loaded_graphs[name] = graph
        return graph

    def require_graph(self, name: str) -> GraphStore:
        if name not in self.loaded_graphs:
            raise ToolError(f"graph not loaded: {name}")
        return self.loaded_graphs[name]

    def sql(self) -> SqlStore:
        if self._sql is None:
            tables = {
                name: load_csv(path) for name, path in sorted(self.paths.tables.items())
            }
            if not tables:
                raise ToolError("no SQL tables configured")
            self._sql = SqlStore(tables)
        return self._sql

    def corpus(self, name: str) -> Corpus:
        if name not in self._corpora:
            if name not in self.paths.corpora:
                raise ToolError(f"no corpus configured for {name!r}")
            self._corpora[name] = load_corpus(name, self.paths.corpora[name])
        return self._corpora[name]
