import random

from sigmacode.frontend import generate_package, parse_method_text
from sigmacode.graphbuild import (
    NODE_TYPES,
    SIGMA0_EDGE_KINDS,
    SIGMA1_EDGE_KINDS,
    SigmaEdge,
    SigmaGraph,
    SigmaNode,
    build_sigma0,
    build_sigma1,
    call_feature,
    validate_graph,
)


def edge_set(g):
    return {(e.src, e.etype, e.dst) for e in g.edges}


def test_call_feature_format():
    assert call_feature("List", "get", ["int"]) == "List.get#int#"
    assert call_feature("Map", "clear", []) == "Map.clear#"
    assert call_feature("Exception", "new", []) == "Exception.new#"


def test_entry_exit_and_degrees():
    g = build_sigma0(parse_method_text("""int pick(List xs, int n) {
        int i = 0;
        if (i < n) {
            i = xs.get(n);
        }
        return i;
    }"""), "p/pick@0")
    entries = g.nodes_of_type("entry")
    exits = g.nodes_of_type("exit")
    assert len(entries) == 1 and len(exits) == 1
    assert entries[0].feature == "ENTRY" and exits[0].feature == "EXIT"
    assert len(g.out_edges(entries[0].id, "dep")) == 1
    if_nodes = [n for n in g.nodes if n.ntype == "control" and n.feature == "if"]
    assert len(if_nodes) == 1
    assert len(g.out_edges(if_nodes[0].id, "dep")) == 2


def test_data_features_are_types_not_names():
    g = build_sigma1(parse_method_text("""int tally(List items, int bound) {
        int total = 0;
        for (int k = 0; k < bound; k = k + 1) {
            total = total + items.get(k);
        }
        return total;
    }"""), "p/tally@0")
    var_names = {"items", "bound", "total", "k", "tally"}
    for n in g.nodes_of_type("data"):
        assert n.feature not in var_names
    assert {"List", "int"} <= {n.feature for n in g.nodes_of_type("data")}


def test_sigma1_is_superset_with_same_nodes():
    src = """void churn(Map m, String k) {
        if (m.isEmpty()) {
            m.put(k, k);
        }
        m.remove(k);
    }"""
    g0 = build_sigma0(parse_method_text(src), "p/churn@0")
    g1 = build_sigma1(parse_method_text(src), "p/churn@0")
    assert [(n.id, n.ntype, n.feature) for n in g0.nodes] == \
           [(n.id, n.ntype, n.feature) for n in g1.nodes]
    assert edge_set(g0) <= edge_set(g1)
    # core edges come first, so the two flavors share a common prefix
    assert g1.edges[: len(g0.edges)] == g0.edges
    extra = {e.etype for e in g1.edges[len(g0.edges):]}
    assert extra <= SIGMA1_EDGE_KINDS
    assert {n.ast_kind for n in g0.nodes} == {None}
    assert None not in {n.ast_kind for n in g1.nodes}


def test_throw_routes_to_catch_then_exit():
    g = build_sigma1(parse_method_text("""void work(Map m, String k) {
        try {
            m.remove(k);
        } catch (Exception e) {
            m.clear();
        }
    }"""), "p/work@0")
    catch = [n for n in g.nodes if n.feature == "catch"]
    assert len(catch) == 1
    throws = [e for e in g.edges if e.etype == "throw"]
    assert throws and all(e.dst == catch[0].id for e in throws)


def test_top_level_throw_reaches_exit():
    g = build_sigma0(parse_method_text("""void boom(int a) {
        if (a > 0) {
            throw new Exception();
        }
        a = a + 1;
    }"""), "p/boom@0")
    new_action = next(n for n in g.nodes if n.feature == "Exception.new#")
    exit_id = g.nodes_of_type("exit")[0].id
    assert SigmaEdge(new_action.id, "dep", exit_id) in g.edges


def test_condition_edges():
    g = build_sigma0(parse_method_text("""void spin(List xs, int n) {
        while (xs.size() < n) {
            xs.add(n);
        }
    }"""), "p/spin@0")
    while_node = next(n for n in g.nodes if n.feature == "while")
    conds = [e for e in g.edges if e.etype == "condition"]
    assert len(conds) == 1 and conds[0].dst == while_node.id


def test_control_dep_governs_branch_bodies():
    g = build_sigma1(parse_method_text("""void gate(Map m, String k) {
        if (m.isEmpty()) {
            m.put(k, k);
            m.remove(k);
        }
    }"""), "p/gate@0")
    if_id = next(n.id for n in g.nodes if n.feature == "if")
    governed = {e.dst for e in g.edges if e.etype == "control_dep" and e.src == if_id}
    put_id = next(n.id for n in g.nodes if n.feature.startswith("Map.put"))
    rem_id = next(n.id for n in g.nodes if n.feature.startswith("Map.remove"))
    assert {put_id, rem_id} <= governed


def test_alias_edges_symmetric_for_object_copies():
    g = build_sigma1(parse_method_text("""void link(List xs) {
        List ys = xs;
        ys.clear();
    }"""), "p/link@0")
    aliases = {(e.src, e.dst) for e in g.edges if e.etype == "alias"}
    assert aliases
    assert all((b, a) in aliases for a, b in aliases)
    # int copies never alias
    g2 = build_sigma1(parse_method_text("""void copy(int a) {
        int b = a;
        b = b + 1;
    }"""), "p/copy@0")
    assert not [e for e in g2.edges if e.etype == "alias"]


def test_first_and_last_use_edges_exist():
    g = build_sigma1(parse_method_text("""int f(List xs, int n) {
        int a = xs.get(n);
        int b = xs.get(a);
        return b;
    }"""), "p/f@0")
    kinds = {e.etype for e in g.edges}
    assert "first_use" in kinds and "last_use" in kinds


def test_validate_accepts_built_graphs():
    for seed in range(5):
        for _, text in generate_package(random.Random(seed), 6):
            ast = parse_method_text(text)
            for build in (build_sigma0, build_sigma1):
                g = build(ast, "p/m@0")
                assert validate_graph(g) == []


def test_validate_flags_broken_graphs():
    two_entries = SigmaGraph("x", "sigma0", [
        SigmaNode(0, "entry", "ENTRY"), SigmaNode(1, "entry", "ENTRY"),
        SigmaNode(2, "exit", "EXIT"),
    ], [SigmaEdge(0, "dep", 2), SigmaEdge(1, "dep", 2)])
    assert any("entry" in line.lower() for line in validate_graph(two_entries))

    bad_kind = SigmaGraph("x", "sigma0", [
        SigmaNode(0, "entry", "ENTRY"), SigmaNode(1, "exit", "EXIT"),
    ], [SigmaEdge(0, "zap", 1)])
    assert validate_graph(bad_kind)

    bad_ids = SigmaGraph("x", "sigma0", [
        SigmaNode(5, "entry", "ENTRY"), SigmaNode(6, "exit", "EXIT"),
    ], [])
    assert any("NodeIds" in line for line in validate_graph(bad_ids))


def test_node_types_and_edge_kind_constants():
    assert set(NODE_TYPES) == {"entry", "exit", "data", "action", "control"}
    assert "dep" in SIGMA0_EDGE_KINDS and "condition" in SIGMA0_EDGE_KINDS
    assert SIGMA1_EDGE_KINDS == {"first_use", "last_use", "alias", "control_dep"}
    assert not SIGMA0_EDGE_KINDS & SIGMA1_EDGE_KINDS
