import pytest
from hypothesis import given

from fik.formula import (
    BOT, TOP, And, Atom, Box, Dia, Imp, Or, ParseError, atoms, formula_key, iff, modal_degree,
    neg, parse, render, size, subformulas,
)
from gen import formulas

p, q, r = Atom("p"), Atom("q"), Atom("r")


@pytest.mark.parametrize("text, expected", [
    ("p", p),
    ("bot", BOT),
    ("top", TOP),
    ("p -> q -> r", Imp(p, Imp(q, r))),
    ("p & q & r", And(And(p, q), r)),
    ("p \\/ q | r", Or(Or(p, q), r)),
    ("p & q \\/ r", Or(And(p, q), r)),
    ("p \\/ q -> r", Imp(Or(p, q), r)),
    ("~p", Imp(p, BOT)),
    ("~~p", neg(neg(p))),
    ("[]<>p", Box(Dia(p))),
    ("[]p -> q", Imp(Box(p), q)),
    ("p <-> q", iff(p, q)),
    ("[](p \\/ q) -> ((<>p -> []q) -> []q)",
     Imp(Box(Or(p, q)), Imp(Imp(Dia(p), Box(q)), Box(q)))),
    ("~[]bot -> []bot", Imp(neg(Box(BOT)), Box(BOT))),
    ("  ( p )  ", p),
    ("p_1 -> bot2", Imp(Atom("p_1"), Atom("bot2"))),
])
def test_parse(text, expected):
    assert parse(text) == expected


@pytest.mark.parametrize("text", [
    "p -> q -> p", "(p -> q) -> p", "p & q & r", "p & (q & r)", "~~p", "~(p & q)",
    "[](p \\/ q) -> (<>p -> []q) -> []q", "<>(p \\/ q) -> <>p \\/ <>q", "[]~p", "~[]bot -> []bot",
    "p \\/ q & r", "(p \\/ q) & r", "(p -> q) & r",
])
def test_render_is_canonical_text(text):
    assert render(parse(text)) == text


def test_negation_prints_as_tilde():
    assert render(Imp(Box(p), BOT)) == "~[]p"
    assert render(Imp(Imp(p, q), BOT)) == "~(p -> q)"


@given(formulas)
def test_render_parse_roundtrip(f):
    assert parse(render(f)) == f


@pytest.mark.parametrize("text, offset", [
    ("p & ", 4),
    ("p q", 2),
    ("(p", 2),
    ("p -> # q", 5),
    ("[] ", 3),
    ("→p", 0),
])
def test_parse_errors_carry_offset(text, offset):
    with pytest.raises(ParseError) as info:
        parse(text)
    assert info.value.offset == offset
    assert info.value.expected


def test_error_offset_is_in_bytes():
    with pytest.raises(ParseError) as info:
        parse("p & é")
    assert info.value.offset == 4
    with pytest.raises(ParseError) as info:
        parse("é")
    assert info.value.offset == 0
    with pytest.raises(ParseError) as info:
        parse("(p) é")
    assert info.value.offset == 4


def test_keywords_are_not_atoms():
    with pytest.raises(ValueError):
        Atom("bot")
    with pytest.raises(ValueError):
        Atom("P")


def test_modal_degree():
    assert modal_degree(p) == 0
    assert modal_degree(Box(p)) == 1
    assert modal_degree(Imp(Box(Dia(p)), Box(q))) == 2
    assert modal_degree(And(Box(p), Box(Box(q)))) == 2


def test_size_counts_nodes():
    assert size(p) == 1
    assert size(parse("~p")) == 3
    assert size(parse("[](p -> q)")) == 4


def test_subformulas_include_self():
    f = parse("[]p -> <>q")
    assert subformulas(f) == {f, Box(p), p, Dia(q), q}


@given(formulas)
def test_size_is_monotone_under_subformula(f):
    assert all(size(g) <= size(f) for g in subformulas(f))
    assert atoms(f) == {g.name for g in subformulas(f) if isinstance(g, Atom)}


def test_formula_key_orders_by_size_then_text():
    assert sorted([Box(p), q, p], key=formula_key) == [p, q, Box(p)]


def test_str_uses_renderer():
    assert str(parse("[](p -> q)")) == "[](p -> q)"
