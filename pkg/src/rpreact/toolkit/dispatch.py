"""Routes a parsed action to its tool. Every outcome is text.

Tool failures never escape: they are rendered as ``Error: ...``
observations so the agent can see them and re-plan.
"""

from __future__ import annotations

from rpreact import protocol
from rpreact.protocol import Action
from rpreact.toolkit import graphs as graph_ops
from rpreact.toolkit.calc import calculate
from rpreact.toolkit.codeexec import code_interpreter
from rpreact.toolkit.environment import ToolEnvironment
from rpreact.toolkit.errors import ToolError
from rpreact.toolkit.retrieval import retrieve


def _split_args(payload: str, expected: int) -> list[str]:
    parts = [p.strip() for p in payload.split(",")]
    if len(parts) != expected:
        raise ToolError(f"expected {expected} comma-separated arguments, got {len(parts)}")
    return parts


def _dispatch(action: Action, env: ToolEnvironment) -> str:
    kind, payload = action.kind, action.payload
    if kind == protocol.FINISH:
        return payload
    if kind == protocol.CALCULATE:
        return calculate(payload)
    if kind == protocol.RETRIEVE_AGENDA:
        return retrieve(env.corpus("agenda"), payload.strip())
    if kind == protocol.RETRIEVE_SCIREX:
        return retrieve(env.corpus("scirex"), payload.strip())
    if kind == protocol.LOAD_DB:
        session = env.load_db(payload.strip())
        table = session.table
        columns = ", ".join(table.columns)
        return (
            f"{session.db_name} loaded: {len(table.columns)} columns, "
            f"{len(table.rows)} rows. Columns: {columns}"
        )
    if kind == protocol.FILTER_DB:
        session = env.require_session()
        remaining = session.apply_filter(payload)
        return f"Filtered {session.db_name}: {remaining} rows remain."
    if kind == protocol.GET_VALUE:
        session = env.require_session()
        return ", ".join(session.column_values(payload.strip()))
    if kind == protocol.LOAD_GRAPH:
        graph = env.load_graph(payload.strip())
        return f"{graph.name} loaded: {len(graph.nodes)} nodes, {len(graph.edges)} edges"
    if kind == protocol.NEIGHBOUR_CHECK:
        name, node = _split_args(payload, 2)
        return graph_ops.neighbour_check(env.require_graph(name), node)
    if kind == protocol.NODE_CHECK:
        name, node = _split_args(payload, 2)
        return graph_ops.node_check(env.require_graph(name), node)
    if kind == protocol.EDGE_CHECK:
        name, a, b = _split_args(payload, 3)
        return graph_ops.edge_check(env.require_graph(name), a, b)
    if kind == protocol.SQL_INTERPRETER:
        return env.sql().execute(payload)
    if kind == protocol.PYTHON_INTERPRETER:
        return code_interpreter(
            payload,
            action.variables,
            env.store,
            env.worker,
            timeout_s=env.code_timeout_s,
            output_cap=env.output_cap_bytes,
        )
    raise ToolError(f"unhandled action kind: {kind}")


def dispatch(action: Action, env: ToolEnvironment) -> str:
    try:
        return _dispatch(action, env)
    except ToolError as exc:
        return f"Error: {exc}"
    except Exception as exc:  # tools must never abort a trajectory
        return f"Error: {type(exc).__name__}: {exc}"
