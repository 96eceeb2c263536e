import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from alphahash.expr import (App, Lam, Name, ParseError, Var, all_names, alpha_equiv, binders,
                            depth, format_path, free_vars, node_paths, oracle_classes, parse,
                            parse_path, partition_of, replace_at, resolve, size,
                            subexpressions, to_text, uniquify)
from alphahash.lab import gen_unbalanced
from conftest import expressions


def nameless(e, env=()):
    """Independent reference: de Bruijn form as nested tuples, free names kept."""
    if isinstance(e, Var):
        for i, b in enumerate(reversed(env)):
            if b is e.name:
                return ("bound", i)
        return ("free", e.name.text)
    if isinstance(e, Lam):
        return ("lam", nameless(e.body, env + (e.binder,)))
    return ("app", nameless(e.fun, env), nameless(e.arg, env))


def has_lam(e):
    return any(isinstance(n, Lam) for _, n in subexpressions(e))


# -- names ------------------------------------------------------------------

def test_names_are_interned():
    assert Name("x") is Name("x")
    assert Name("x") != Name("y")
    assert Var("x").name is Name("x")


# -- parsing and printing -----------------------------------------------------

@pytest.mark.parametrize("text, expected", [
    ("x", Var("x")),
    ("(lam x (app x x))", Lam("x", App(Var("x"), Var("x")))),
    ("(lam x (app x (app x x)))", Lam("x", App(Var("x"), App(Var("x"), Var("x"))))),
    ("  ; comment\n(app f\n  x') ", App(Var("f"), Var("x'"))),
])
def test_parse_examples(text, expected):
    assert parse(text) == expected


@pytest.mark.parametrize("e, text", [
    (Var("x"), "x"),
    (Lam("x", Var("x")), "(lam x x)"),
    (App(Var("f"), Var("x")), "(app f x)"),
])
def test_print_examples(e, text):
    assert to_text(e) == text


@pytest.mark.parametrize("text, line, col", [
    ("(lam x)", 1, 7),
    ("(app x)", 1, 7),
    ("(app x y z)", 1, 10),
    ("(lam (app x x) x)", 1, 6),
    ("lam", 1, 1),
    ("(foo x)", 1, 2),
    ("x y", 1, 3),
    ("(lam x\n  x", 2, 4),
    ("(lam x #)", 1, 8),
    ("", 1, 1),
])
def test_parse_errors_carry_position(text, line, col):
    with pytest.raises(ParseError) as info:
        parse(text)
    assert (info.value.line, info.value.column) == (line, col)


@settings(max_examples=300)
@given(expressions())
def test_print_parse_roundtrip(e):
    assert parse(to_text(e)) == e


def test_deep_expressions_do_not_recurse():
    e = gen_unbalanced(1, 50_000)
    assert depth(e) >= 25_000
    assert parse(to_text(e)) == e
    assert alpha_equiv(e, uniquify(e, prefix="w"))


# -- uniquify ---------------------------------------------------------------

@pytest.mark.parametrize("src, out", [
    ("(lam x x)", "(lam v0 v0)"),
    ("(app (lam x x) (lam x x))", "(app (lam v0 v0) (lam v1 v1))"),
    ("(app y (lam x (app x y)))", "(app y (lam v0 (app v0 y)))"),
    ("(app v0 (lam x x))", "(app v0 (lam v1 v1))"),
])
def test_uniquify_examples(src, out):
    assert to_text(uniquify(parse(src))) == out


@settings(max_examples=300)
@given(expressions())
def test_uniquify_properties(e):
    u = uniquify(e)
    assert alpha_equiv(e, u)
    assert size(u) == size(e)
    assert free_vars(u) == free_vars(e)
    bs = binders(u)
    assert len(set(bs)) == len(bs)
    assert not set(bs) & free_vars(u)


# -- alpha equivalence ------------------------------------------------------

@pytest.mark.parametrize("a, b, expected", [
    ("(lam x (app (app add x) y))", "(lam p (app (app add p) y))", True),
    ("(lam x (app (app add x) y))", "(lam q (app (app add q) z))", False),
    ("(lam x (lam y x))", "(lam a (lam b a))", True),
    ("(lam x (lam y x))", "(lam a (lam b b))", False),
    ("(lam x (lam x x))", "(lam a (lam b b))", True),
    ("(lam x y)", "(lam y y)", False),
])
def test_alpha_equiv_examples(a, b, expected):
    assert alpha_equiv(parse(a), parse(b)) is expected


@settings(max_examples=500)
@given(expressions(12, ["x", "y"]), expressions(12, ["x", "y"]))
def test_alpha_equiv_matches_nameless_form(a, b):
    assert alpha_equiv(a, b) == (nameless(a) == nameless(b))


@settings(max_examples=200)
@given(expressions(8, ["x", "y"]), expressions(8, ["x", "y"]), expressions(8, ["x", "y"]))
def test_alpha_equiv_is_an_equivalence(a, b, c):
    assert alpha_equiv(a, a)
    assert alpha_equiv(a, b) == alpha_equiv(b, a)
    if alpha_equiv(a, b) and alpha_equiv(b, c):
        assert alpha_equiv(a, c)


@settings(max_examples=200)
@given(expressions(10), expressions(10))
def test_alpha_equiv_is_equality_without_lambdas(a, b):
    if not has_lam(a) and not has_lam(b):
        assert alpha_equiv(a, b) == (a == b)


# -- paths ------------------------------------------------------------------

def test_subexpression_paths():
    assert [p for p, _ in subexpressions(Var("x"))] == [""]
    assert [p for p, _ in subexpressions(parse("(lam x x)"))] == ["", "b"]
    assert node_paths(parse("(app (lam x x) y)")) == ["", "f", "fb", "a"]
    assert format_path("") == "-"
    assert parse_path("-") == parse_path("ε") == ""
    with pytest.raises(ValueError):
        parse_path("bx")


@settings(max_examples=200)
@given(expressions(), st.data())
def test_resolve_and_replace(e, data):
    paths = node_paths(e)
    assert len(paths) == size(e)
    p = data.draw(st.sampled_from(paths))
    new = replace_at(e, p, Var("fresh"))
    assert resolve(new, p) == Var("fresh")
    assert size(new) == size(e) - size(resolve(e, p)) + 1


def test_resolve_rejects_bad_paths():
    with pytest.raises(ValueError):
        resolve(parse("(lam x x)"), "f")
    with pytest.raises(ValueError):
        resolve(Var("x"), "b")


# -- oracle classes ---------------------------------------------------------

def test_oracle_classes_examples():
    # Taken in isolation the bodies are the distinct free variables x and y.
    got = partition_of(oracle_classes(parse("(app (lam x x) (lam y y))")))
    assert got == partition_of([[""], ["f", "a"], ["fb"], ["ab"]])
    got = partition_of(oracle_classes(parse("(lam x (app x x))")))
    assert got == partition_of([[""], ["b"], ["bf", "ba"]])
    e = parse("(lam t (app (app foo (lam x (app (app add x) t))) (lam y (lam x (app (app add x) t)))))")
    assert any({"bfa", "bab"} <= set(g) for g in oracle_classes(e))


@settings(max_examples=100)
@given(expressions(15))
def test_oracle_classes_agree_with_pairwise_check(e):
    e = uniquify(e)
    subs = dict(subexpressions(e))
    group_of = {p: i for i, g in enumerate(oracle_classes(e)) for p in g}
    for p in subs:
        for q in subs:
            assert (group_of[p] == group_of[q]) == (nameless(subs[p]) == nameless(subs[q]))


def test_all_names():
    e = parse("(app y (lam x (app x z)))")
    assert all_names(e) == {Name("x"), Name("y"), Name("z")}
