import random

import pytest

from sigmacode.frontend import (
    Call,
    For,
    If,
    LexError,
    ParseError,
    Return,
    TryCatchFinally,
    UnresolvedVariable,
    VarDecl,
    While,
    expr_type,
    generate_package,
    parse_method_text,
    parse_source,
    print_method,
    split_methods,
    tokenize,
)


def test_tokenize_kinds():
    toks = tokenize("int x = a.get(3);")
    kinds = [t.kind for t in toks]
    values = [t.value for t in toks]
    assert values[:3] == ["int", "x", "="]
    assert kinds[-1] == "eof"
    # type names lex as plain identifiers, not keywords
    assert toks[0].kind == toks[1].kind == "ident"


def test_tokenize_rejects_unknown_character():
    with pytest.raises(LexError):
        tokenize("int x = 3 $ 4;")


def test_parse_basic_method():
    m = parse_method_text("""int addTwo(int a, int b) {
        int c = a + b;
        return c;
    }""")
    assert m.name == "addTwo"
    assert [p.name for p in m.params] == ["a", "b"]
    assert [p.var_type for p in m.params] == ["int", "int"]
    assert isinstance(m.body.stmts[0], VarDecl)
    assert isinstance(m.body.stmts[1], Return)


def test_parse_control_statements():
    m = parse_method_text("""void run(List xs, int n) {
        int i = 0;
        while (i < n) {
            i = i + 1;
        }
        if (i > 3) {
            xs.clear();
        } else {
            xs.add(i);
        }
        for (int k = 0; k < n; k = k + 1) {
            xs.add(k);
        }
    }""")
    kinds = [type(s).__name__ for s in m.body.stmts]
    assert kinds == ["VarDecl", "While", "If", "For"]


def test_parse_try_catch_finally():
    m = parse_method_text("""void guard(Map m, String k) {
        try {
            m.remove(k);
        } catch (Exception e) {
            m.clear();
        } finally {
            m.size();
        }
    }""")
    t = m.body.stmts[0]
    assert isinstance(t, TryCatchFinally)
    assert len(t.catches) == 1
    assert t.catches[0].exc_type == "Exception"
    assert t.finally_block is not None


def test_expr_types():
    m = parse_method_text("""boolean probe(int a, int b) {
        boolean ok = a < b;
        int c = a * b;
        return ok;
    }""")
    decl_ok = m.body.stmts[0]
    decl_c = m.body.stmts[1]
    assert expr_type(decl_ok.init) == "boolean"
    assert expr_type(decl_c.init) == "int"


def test_unresolved_variable_rejected():
    with pytest.raises(UnresolvedVariable):
        parse_method_text("int f() { return q; }")


def test_scope_does_not_leak_out_of_blocks():
    with pytest.raises(UnresolvedVariable):
        parse_method_text("""int f(int a) {
            if (a > 0) {
                int inner = a + 1;
            }
            return inner;
        }""")


def test_unreachable_statement_rejected():
    with pytest.raises(ParseError, match="unreachable"):
        parse_method_text("""int f(int a) {
            return a;
            int b = a + 1;
        }""")


def test_unreachable_after_if_both_arms_return():
    with pytest.raises(ParseError, match="unreachable"):
        parse_method_text("""int f(int a) {
            if (a > 0) {
                return a;
            } else {
                return a + 1;
            }
            int b = 2;
        }""")


def test_actionless_try_rejected():
    with pytest.raises(ParseError, match="no action"):
        parse_method_text("""int f(List a) {
            try {
                int b;
            } catch (Exception e) {
                a.size();
            }
            return 1;
        }""")
    # a declaration with an initializer is a copy action, so this try is fine
    parse_method_text("""int f(List a) {
        try {
            int b = a.size();
        } catch (Exception e) {
            a.clear();
        }
        return 1;
    }""")


def test_for_body_must_reach_update():
    with pytest.raises(ParseError, match="update"):
        parse_method_text("""int f(int n) {
            for (int i = 0; i < n; i = i + 1) {
                return i;
            }
            return n;
        }""")


def test_trailing_input_rejected():
    with pytest.raises(ParseError):
        parse_method_text("int f() { return 1; } int")


def test_split_methods():
    src = """int one() { return 1; }

    int two(int a) {
        if (a > 0) { return a; }
        return 0;
    }
    """
    texts = split_methods(src)
    assert len(texts) == 2
    assert texts[0].startswith("int one")
    assert texts[1].startswith("int two")
    methods = parse_source(src)
    assert [m.name for m in methods] == ["one", "two"]


def test_split_methods_unbalanced():
    with pytest.raises(ParseError):
        split_methods("int f() { return 1; ")


def test_print_parse_round_trip():
    src = """List build(Map m, int n) {
        List out = new List();
        for (int i = 0; i < n; i = i + 1) {
            String key = m.get(i);
            out.add(key);
        }
        return out;
    }"""
    m1 = parse_method_text(src)
    printed = print_method(m1)
    m2 = parse_method_text(printed)
    assert print_method(m2) == printed


def test_generate_package_deterministic_and_parseable():
    a = generate_package(random.Random(42), 10)
    b = generate_package(random.Random(42), 10)
    assert a == b
    for _, text in a:
        m = parse_method_text(text)
        assert m.name
    # different seeds differ
    c = generate_package(random.Random(43), 10)
    assert a != c
