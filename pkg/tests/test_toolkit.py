from __future__ import annotations

import json
import random
from fractions import Fraction

import pytest

from rpreact import protocol
from rpreact.protocol import Action, parse_action
from rpreact.toolkit import dispatch
from rpreact.toolkit.calc import calculate, format_result
from rpreact.toolkit.errors import ToolError
from rpreact.toolkit.graphs import (
    GraphStore,
    edge_check,
    load_graph_file,
    neighbour_check,
    node_check,
)
from rpreact.toolkit.retrieval import Corpus, retrieve
from rpreact.toolkit.sqlstore import SqlStore
from rpreact.toolkit.tables import (
    Condition,
    TabularSession,
    condition_holds,
    load_csv,
    parse_condition,
    parse_conditions,
)

# --- calculator -----------------------------------------------------------

def test_calculate_precedence():
    assert calculate("2+3*4") == "14"


def test_calculate_fractional_digits():
    assert calculate("(900-800)/60") == "1.666667"


def test_calculate_mean():
    assert calculate("mean(1,2,3)") == "2"


def test_calculate_sqrt_and_unary():
    assert calculate("sqrt(4)") == "2"
    assert calculate("-3 + 5") == "2"


def test_calculate_errors():
    with pytest.raises(ToolError):
        calculate("1/0")
    with pytest.raises(ToolError):
        calculate("2 +")
    with pytest.raises(ToolError):
        calculate("__import__('os')")
    with pytest.raises(ToolError):
        calculate("pow(2, 3)")


def test_calculate_against_fraction_oracle():
    rng = random.Random(7)

    def build(depth):
        if depth == 0 or rng.random() < 0.3:
            n = rng.randint(-50, 50)
            return (str(n) if n >= 0 else f"({n})"), Fraction(n)
        op = rng.choice("+-*/")
        ltext, lval = build(depth - 1)
        rtext, rval = build(depth - 1)
        if op == "/" and rval == 0:
            rtext, rval = "1", Fraction(1)
        return f"({ltext} {op} {rtext})", {
            "+": lval + rval,
            "-": lval - rval,
            "*": lval * rval,
            "/": lval / rval if rval else Fraction(0),
        }[op]

    for _ in range(200):
        text, expected = build(3)
        got = float(calculate(text))
        assert got == pytest.approx(float(expected), abs=5e-7)


def test_format_result_trims_trailing_zeros():
    assert format_result(14.0) == "14"
    assert format_result(2.5) == "2.5"
    assert format_result(1.6666666666) == "1.666667"


# --- conditions -----------------------------------------------------------

def test_parse_condition_variants():
    assert parse_condition("DepTime>=1200") == Condition("DepTime", ">=", "1200")
    assert parse_condition("Origin = JFK") == Condition("Origin", "=", "JFK")
    assert parse_condition("name contains Grind") == Condition("name", "contains", "Grind")
    assert parse_condition("DepDelay<0") == Condition("DepDelay", "<", "0")


def test_parse_conditions_conjunction():
    conds = parse_conditions("a=1, b>2, c contains x")
    assert [c.relation for c in conds] == ["=", ">", "contains"]


def test_parse_condition_rejects_garbage():
    with pytest.raises(ToolError):
        parse_condition("no operator here")
    with pytest.raises(ToolError):
        parse_conditions("   ,  ")


def test_condition_numeric_vs_lexicographic():
    assert condition_holds(Condition("x", ">", "50"), "100")  # numeric, not lexicographic
    assert condition_holds(Condition("x", "=", "82"), "82.0")  # both parse as numbers
    assert condition_holds(Condition("x", ">", "2022-01-17"), "2022-01-18")  # lexicographic
    assert condition_holds(Condition("x", "contains", "L8"), "DL82")


def test_condition_oracle_random_rows():
    # independent oracle: structured comparison without the text grammar
    rng = random.Random(13)
    rows = [str(rng.randint(0, 500)) for _ in range(300)]
    for _ in range(100):
        value = str(rng.randint(0, 500))
        relation = rng.choice(["=", ">", "<", ">=", "<="])
        cond = parse_condition(f"col{relation}{value}")
        for cell in rows:
            expected = {
                "=": float(cell) == float(value),
                ">": float(cell) > float(value),
                "<": float(cell) < float(value),
                ">=": float(cell) >= float(value),
                "<=": float(cell) <= float(value),
            }[relation]
            assert condition_holds(cond, cell) == expected


# --- tabular sessions -----------------------------------------------------

def test_load_db_summary_and_session(env):
    out = dispatch(parse_action("LoadDB[flights]"), env)
    assert out.startswith("flights loaded: 11 columns, 10 rows.")
    assert "DepTime" in out
    assert env.session is not None
    assert len(env.session.active_rows) == 10


def test_filter_pipeline_flight_dl82(env):
    dispatch(parse_action("LoadDB[flights]"), env)
    out = dispatch(
        parse_action(
            "FilterDB[Flight_Number_Marketing_Airline=82, "
            "IATA_Code_Marketing_Airline=DL, FlightDate=2022-01-18]"
        ),
        env,
    )
    assert out == "Filtered flights: 1 rows remain."
    assert dispatch(parse_action("GetValue[DepTime]"), env) == "1425"


def test_filter_before_load_is_error_text(env):
    assert dispatch(parse_action("FilterDB[a=1]"), env) == "Error: no database loaded"


def test_filter_empty_result_reports_zero_rows(env):
    dispatch(parse_action("LoadDB[flights]"), env)
    out = dispatch(parse_action("FilterDB[Origin=ZZZ]"), env)
    assert "0 rows" in out


def test_unknown_column_and_db(env):
    dispatch(parse_action("LoadDB[flights]"), env)
    assert dispatch(parse_action("GetValue[NoSuchColumn]"), env).startswith(
        "Error: unknown column"
    )
    assert dispatch(parse_action("LoadDB[trains]"), env).startswith(
        "Error: unknown database"
    )


def test_load_db_resets_filters(env):
    dispatch(parse_action("LoadDB[flights]"), env)
    dispatch(parse_action("FilterDB[Origin=JFK]"), env)
    assert len(env.session.active_rows) == 2
    dispatch(parse_action("LoadDB[flights]"), env)
    assert len(env.session.active_rows) == 10
    assert env.session.filter_stack == []


def test_numeric_relation_filters(env):
    dispatch(parse_action("LoadDB[flights]"), env)
    dispatch(parse_action("FilterDB[CRSDepTime>1200]"), env)
    values = env.session.column_values("CRSDepTime")
    assert values and all(float(v) > 1200 for v in values)


def test_filter_monotonicity_random_sequences(data_paths):
    rng = random.Random(99)
    table = load_csv(data_paths.tables["flights"])
    for _ in range(30):
        session = TabularSession(db_name="flights", table=table)
        sizes = [len(session.active_rows)]
        for _ in range(4):
            column = rng.choice(table.columns)
            value = rng.choice([row[table.columns.index(column)] for row in table.rows])
            relation = rng.choice(["=", ">=", "<="])
            session.apply_filter(f"{column}{relation}{value}")
            sizes.append(len(session.active_rows))
        assert all(a >= b for a, b in zip(sizes, sizes[1:]))


# --- sql ------------------------------------------------------------------

def test_sql_count(env):
    out = dispatch(parse_action("SQLInterpreter[SELECT COUNT(*) FROM coffee]"), env)
    assert out.splitlines()[1] == "10"


def test_sql_matches_filter_pipeline(env):
    sql_out = dispatch(
        parse_action(
            "SQLInterpreter[SELECT DepTime FROM flights WHERE "
            "IATA_Code_Marketing_Airline='DL' AND Flight_Number_Marketing_Airline=82 "
            "AND FlightDate='2022-01-18']"
        ),
        env,
    )
    assert sql_out.splitlines() == ["DepTime", "1425"]


def test_sql_error_is_text(env):
    out = dispatch(parse_action("SQLInterpreter[SELEKT * FROM flights]"), env)
    assert out.startswith("Error: SQL:")


def test_sql_order_by_respected_and_default_sorted(env):
    ordered = dispatch(
        parse_action("SQLInterpreter[SELECT Origin FROM flights ORDER BY Origin DESC]"),
        env,
    ).splitlines()[1:]
    assert ordered == sorted(ordered, reverse=True)
    unordered = dispatch(
        parse_action("SQLInterpreter[SELECT Origin FROM flights]"), env
    ).splitlines()[1:]
    assert unordered == sorted(unordered)


def test_sql_store_renders_integral_reals_without_dot(data_paths):
    table = load_csv(data_paths.tables["coffee"])
    store = SqlStore({"coffee": table})
    out = store.execute("SELECT Close FROM coffee WHERE Date='2000-01-13'")
    assert out.splitlines()[1] == "122"


# --- retrieval ------------------------------------------------------------

def test_retrieve_unique_hit_first(env):
    out = dispatch(parse_action("RetrieveScirex[segment pooling CoNLL]"), env)
    assert out.startswith("[scirex-004]")


def test_retrieve_absent_keyword(env):
    assert dispatch(parse_action("RetrieveAgenda[zzzunseenword]"), env) == "No results found"


def test_retrieve_tie_breaks_on_doc_id():
    corpus = Corpus("t", {"doc-b": "alpha beta", "doc-a": "alpha gamma"})
    out = retrieve(corpus, "alpha")
    first, second = out.split("\n\n")
    assert first.startswith("[doc-a]") and second.startswith("[doc-b]")


def test_retrieve_scores_match_exhaustive_oracle(data_paths):
    corpus = Corpus(
        "agenda",
        {
            json.loads(line)["id"]: json.loads(line)["text"]
            for line in open(data_paths.corpora["agenda"], encoding="utf-8")
            if line.strip()
        },
    )
    import re as _re

    def oracle_top3(keyword):
        terms = _re.findall(r"[a-z0-9]+", keyword.lower())
        scored = []
        for doc_id, text in corpus.documents.items():
            doc_terms = _re.findall(r"[a-z0-9]+", text.lower())
            score = sum(doc_terms.count(t) for t in terms) / max(len(doc_terms), 1)
            if score > 0:
                scored.append((-score, doc_id))
        return [d for _, d in sorted(scored)[:3]]

    for keyword in ("meeting", "room A31", "Friday", "review", "the on-call"):
        got = [pair[0] for pair in corpus.search(keyword)]
        assert got == oracle_top3(keyword), keyword


def test_retrieval_is_deterministic(env):
    first = dispatch(parse_action("RetrieveAgenda[meeting room]"), env)
    second = dispatch(parse_action("RetrieveAgenda[meeting room]"), env)
    assert first == second


# --- graphs ---------------------------------------------------------------

@pytest.fixture
def path_graph(tmp_path):
    doc = {
        "directed": False,
        "nodes": [{"id": "A", "degree_hint": 1}, {"id": "B"}, {"id": "C"}],
        "edges": [
            {"src": "A", "dst": "B", "weight": 2},
            {"src": "B", "dst": "C", "weight": 5},
        ],
    }
    path = tmp_path / "g.json"
    path.write_text(json.dumps(doc), encoding="utf-8")
    return load_graph_file("TestNet", path)


def test_neighbour_check_sorted(path_graph):
    assert neighbour_check(path_graph, "B") == "A, C"


def test_edge_check_attrs(path_graph):
    assert edge_check(path_graph, "A", "B") == "weight: 2"
    assert edge_check(path_graph, "B", "A") == "weight: 2"  # undirected lookup


def test_edge_check_absent(path_graph):
    with pytest.raises(ToolError):
        edge_check(path_graph, "A", "C")


def test_node_check_lines_sorted(path_graph):
    assert node_check(path_graph, "A") == "degree_hint: 1"
    with pytest.raises(ToolError):
        node_check(path_graph, "Z")


def test_graph_adjacency_symmetric_for_undirected(path_graph):
    for (a, b) in list(path_graph.edges):
        assert b in path_graph.adjacency[a]
        assert a in path_graph.adjacency[b]


def test_directed_graph_adjacency_one_way():
    graph = GraphStore("d", directed=True)
    graph.add_node("A")
    graph.add_node("B")
    graph.add_edge("A", "B", {"w": 1})
    assert graph.adjacency["A"] == {"B"}
    assert graph.adjacency["B"] == set()


def test_graph_tools_via_dispatch(env):
    assert dispatch(parse_action("NeighbourCheck[AuthorNet, Ada Lovelace]"), env).startswith(
        "Error: graph not loaded"
    )
    out = dispatch(parse_action("LoadGraph[AuthorNet]"), env)
    assert out == "AuthorNet loaded: 5 nodes, 6 edges"
    neighbours = dispatch(parse_action("NeighbourCheck[AuthorNet, Ada Lovelace]"), env)
    assert neighbours == "Alan Turing, Grace Hopper"
    edge = dispatch(parse_action("EdgeCheck[AuthorNet, Ada Lovelace, Alan Turing]"), env)
    assert edge == "weight: 3"
    missing = dispatch(parse_action("EdgeCheck[AuthorNet, Ada Lovelace, Edsger Dijkstra]"), env)
    assert missing.startswith("Error: edge not found")


# --- dispatch totality ----------------------------------------------------

def test_dispatch_never_raises_on_valid_actions(env, stub_worker):
    env.worker = stub_worker
    samples = [
        "Calculate[1/0]",
        "Calculate[nonsense(]",
        "LoadDB[unknown]",
        "FilterDB[x=1]",
        "GetValue[x]",
        "LoadGraph[NoNet]",
        "NeighbourCheck[AuthorNet, A]",
        "NodeCheck[AuthorNet]",
        "EdgeCheck[AuthorNet, A, B]",
        "SQLInterpreter[DROP TABLE flights]",
        "RetrieveAgenda[x]",
        "RetrieveScirex[y]",
        "PythonInterpreter(missing)[print(missing)]",
        "Finish[done]",
    ]
    for text in samples:
        out = dispatch(parse_action(text), env)
        assert isinstance(out, str)


def test_dispatch_finish_returns_payload(env):
    assert dispatch(Action(protocol.FINISH, "the answer"), env) == "the answer"


def test_sql_store_rejects_writes(env):
    out = dispatch(parse_action("SQLInterpreter[DELETE FROM flights]"), env)
    assert out.startswith("Error: SQL:")
    count = dispatch(parse_action("SQLInterpreter[SELECT COUNT(*) FROM flights]"), env)
    assert count.splitlines()[1] == "10"
