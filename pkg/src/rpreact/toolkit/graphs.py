"""Graph stores behind LoadGraph / NeighbourCheck / NodeCheck / EdgeCheck.

File format: one JSON document with ``nodes`` (each an object carrying an
``id`` plus attributes), ``edges`` (``src``/``dst`` plus attributes) and a
``directed`` flag. Undirected graphs get symmetric adjacency and edge
lookup in either endpoint order.
"""

from __future__ import annotations

import json
from pathlib import Path

from rpreact.toolkit.errors import ToolError


class GraphStore:
    def __init__(self, name: str, directed: bool = False) -> None:
        self.name = name
        self.directed = directed
        self.nodes: dict[str, dict] = {}
        self.edges: dict[tuple[str, str], dict] = {}
        self.adjacency: dict[str, set[str]] = {}

    def add_node(self, node_id: str, attrs: dict | None = None) -> None:
        self.nodes[node_id] = dict(attrs or {})
        self.adjacency.setdefault(node_id, set())

    def add_edge(self, src: str, dst: str, attrs: dict | None = None) -> None:
        for endpoint in (src, dst):
            if endpoint not in self.nodes:
                raise ToolError(f"edge endpoint {endpoint!r} is not a node")
        self.edges[(src, dst)] = dict(attrs or {})
        self.adjacency[src].add(dst)
        if not self.directed:
            self.adjacency[dst].add(src)

    def edge_attrs(self, a: str, b: str) -> dict | None:
        if (a, b) in self.edges:
            return self.edges[(a, b)]
        if not self.directed and (b, a) in self.edges:
            return self.edges[(b, a)]
        return None


def load_graph_file(name: str, path: str | Path) -> GraphStore:
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    graph = GraphStore(name, directed=bool(doc.get("directed", False)))
    for node in doc.get("nodes", []):
        attrs = {k: v for k, v in node.items() if k != "id"}
        graph.add_node(str(node["id"]), attrs)
    for edge in doc.get("edges", []):
        attrs = {k: v for k, v in edge.items() if k not in ("src", "dst")}
        graph.add_edge(str(edge["src"]), str(edge["dst"]), attrs)
    return graph


def _attrs_text(attrs: dict) -> str:
    if not attrs:
        return "(no attributes)"
    return "\n".join(f"{k}: {attrs[k]}" for k in sorted(attrs))


def neighbour_check(graph: GraphStore, node: str) -> str:
    if node not in graph.nodes:
        raise ToolError("node not found")
    return ", ".join(sorted(graph.adjacency[node]))


def node_check(graph: GraphStore, node: str) -> str:
    if node not in graph.nodes:
        raise ToolError("node not found")
    return _attrs_text(graph.nodes[node])


def edge_check(graph: GraphStore, a: str, b: str) -> str:
    if a not in graph.nodes or b not in graph.nodes:
        raise ToolError("node not found")
    attrs = graph.edge_attrs(a, b)
    if attrs is None:
        raise ToolError(f"edge not found between {a} and {b}")
    return _attrs_text(attrs)
