import json
import random

import pytest
from hypothesis import given, settings

from fik.formula import BOT, TOP, Atom, Box, Dia, parse, subformulas
from fik.kripke import (
    Model, enumerate_models, find_countermodel_bruteforce, forces, forces_sequent, forces_succedent,
    generated_submodel, load_model, model_from_dict, model_to_dict, sequent_truth_set, truth_set, truth_tables,
    valid_in_model, validate_model,
)
from fik.sequent import parse_sequent
from gen import formula_suite, formulas, small_formulas

p = Atom("p")


def model(worlds, leq=(), acc=(), val=None):
    """Reflexive pairs are added; everything else is taken as written."""
    worlds = tuple(worlds)
    return Model(worlds, frozenset(leq) | {(w, w) for w in worlds}, frozenset(acc), val or {})


# the two appendix models
MODEL_1 = model("abcd", {("a", "c"), ("b", "d")}, {("a", "b"), ("a", "d"), ("c", "d")}, {"d": {"p"}})
MODEL_2 = model("abcd", {("a", "c"), ("b", "d")}, {("a", "b"), ("c", "b"), ("c", "d")}, {"d": {"p"}})

# Not forward-confluent: x <= y and R x z, but y has no R-successor above z.
# x forces <>p through z, y does not; this is the monotonicity failure that
# forward confluence rules out.
NON_FC = model("xyz", {("x", "y")}, {("x", "z")}, {"z": {"p"}})


# validate_model ----------------------------------------------------------------

def test_single_world_is_valid():
    assert validate_model(model("w")) == []


def test_appendix_models_are_valid():
    assert validate_model(MODEL_1) == []
    assert validate_model(MODEL_2) == []


def test_minimal_fc_failure():
    m = model("xyz", {("z", "x")}, {("z", "y")})
    report = validate_model(m)
    assert [v.condition for v in report] == ["forward-confluence"]
    assert report[0].witness == ("x", "y", "z")


def test_reflexivity_transitivity_and_heredity_are_reported():
    m = Model(("a", "b", "c"), frozenset({("a", "b"), ("b", "c"), ("b", "b"), ("c", "c")}), frozenset(),
              {"a": {"p"}})
    conditions = {v.condition: v.witness for v in validate_model(m)}
    assert conditions["reflexivity"] == ("a",)
    assert conditions["transitivity"] == ("a", "b", "c")
    assert conditions["hereditary"] == ("a", "b", "p")


def test_unknown_world_in_relation():
    m = Model(("a",), frozenset({("a", "a"), ("a", "z")}), frozenset(), {})
    assert validate_model(m)[0].condition == "unknown-world"


def test_non_fc_witness_breaks_monotonicity():
    assert [v.condition for v in validate_model(NON_FC)] == ["forward-confluence"]
    assert forces(NON_FC, "x", Dia(p))
    assert not forces(NON_FC, "y", Dia(p))


# forcing -----------------------------------------------------------------------

def test_appendix_model_box():
    assert not forces(MODEL_1, "a", Box(p))
    assert forces(MODEL_1, "c", Box(p))


def test_appendix_model_diamond():
    assert not forces(MODEL_2, "a", Dia(p))
    assert forces(MODEL_2, "c", Dia(p))


def test_top_and_bot():
    for m in (MODEL_1, MODEL_2, model("w")):
        for w in m.worlds:
            assert forces(m, w, TOP)
            assert not forces(m, w, BOT)


def test_unknown_world_raises():
    with pytest.raises(KeyError):
        forces(MODEL_1, "zz", p)
    with pytest.raises(KeyError):
        forces_sequent(MODEL_1, "zz", parse_sequent("p => p"))


def test_valid_in_model():
    assert valid_in_model(MODEL_1, TOP)
    assert not valid_in_model(MODEL_1, Box(p))


def test_wcd_instance_holds_in_valid_models():
    wcd = parse("[](p \\/ q) -> (<>p -> []q) -> []q")
    for m in enumerate_models(2, ["p", "q"]):
        assert valid_in_model(m, wcd)


def test_sequent_forcing_examples():
    for m in (MODEL_1, MODEL_2):
        for w in m.worlds:
            assert forces_sequent(m, w, parse_sequent("p => p"))
    assert not forces_sequent(MODEL_1, "a", parse_sequent("=> []p"))
    assert not forces_sequent(MODEL_1, "a", parse_sequent("=>"))


@pytest.mark.parametrize("acc, expected", [((), True), ({("w", "w")}, False)])
def test_empty_box_block_on_one_world(acc, expected):
    m = model("w", acc=acc)
    assert forces_sequent(m, "w", parse_sequent("=> [=> bot]")) is expected


def test_blocks_quantify_over_the_right_relation():
    # <p =>> at a: a and c both refute p; at b the upper world d forces p
    assert forces_sequent(MODEL_1, "a", parse_sequent("=> <p =>>"))
    assert not forces_sequent(MODEL_1, "b", parse_sequent("=> <p =>>"))
    assert not forces_sequent(MODEL_1, "a", parse_sequent("=> [p =>]"))
    assert forces_succedent(MODEL_1, "c", parse_sequent("=> [=> p]"))


@settings(max_examples=200, deadline=None)
@given(formulas)
def test_sequent_with_one_succedent_formula_is_the_formula(a):
    s = parse_sequent(f"=> {a}")
    for m in (MODEL_1, MODEL_2):
        for w in m.worlds:
            assert forces_sequent(m, w, s) == forces(m, w, a)


def test_sequent_truth_set_agrees_with_forcing():
    s = parse_sequent("=> []p, <p => [=> p]>")
    assert sequent_truth_set(MODEL_1, s) == {w for w in MODEL_1.worlds if forces_sequent(MODEL_1, w, s)}


def test_generated_submodel_keeps_truth():
    sub = generated_submodel(MODEL_1, "c")
    assert sub.worlds == ("c", "d")
    for f in formula_suite(100, seed=3, atoms=("p",)):
        assert forces(sub, "c", f) == forces(MODEL_1, "c", f)


# enumeration -------------------------------------------------------------------

# Census fixtures computed by hand before implementation.
# One world: R is empty or {(w,w)}; p is on or off.  2 and 4 models.
# Exactly two worlds, by pre-order (R ranges over the 16 relations):
#   discrete        all 16 R are FC; 4 valuations for p        16 / 64
#   w0 <= w1        FC asks succ(w0) to sit below succ(w1):
#                   succ(w1) empty 1, {w0} 2, {w1} 4, both 4   11 / 33 (3 valuations)
#   w1 <= w0        symmetric                                  11 / 33
#   cluster         both or neither have successors: 1 + 9     10 / 20 (2 valuations)
#   total                                                      48 / 150
CENSUS = {
    (1, ()): 2,
    (1, ("p",)): 4,
    (2, ()): 50,
    (2, ("p",)): 154,
}


@pytest.mark.parametrize("n, atoms", list(CENSUS))
def test_enumeration_census(n, atoms):
    assert sum(1 for _ in enumerate_models(n, atoms)) == CENSUS[(n, atoms)]


def test_exactly_two_worlds_census():
    two = [m for m in enumerate_models(2, ()) if len(m.worlds) == 2]
    assert len(two) == 48
    two_p = [m for m in enumerate_models(2, ("p",)) if len(m.worlds) == 2]
    assert len(two_p) == 150


def test_enumeration_yields_valid_distinct_models():
    seen = set()
    for m in enumerate_models(2, ("p",)):
        assert validate_model(m) == []
        assert m not in seen
        seen.add(m)


def test_enumeration_is_deterministic():
    assert list(enumerate_models(2, ("p",))) == list(enumerate_models(2, ("p",)))


def test_oracle_examples():
    found = find_countermodel_bruteforce(Box(BOT), 1)
    assert found is not None
    m, w = found
    assert m.acc == {(w, w)}
    assert find_countermodel_bruteforce(TOP, 3) is None
    assert find_countermodel_bruteforce(parse("(<>p -> []q) -> [](p -> q)"), 4) is not None


def test_oracle_rejects_zero_worlds():
    with pytest.raises(ValueError):
        find_countermodel_bruteforce(p, 0)


def test_oracle_result_is_a_real_countermodel():
    for f in formula_suite(150, seed=11):
        found = find_countermodel_bruteforce(f, 2)
        if found is None:
            continue
        m, w = found
        assert validate_model(m) == []
        assert not forces(m, w, f)


def test_vectorised_evaluation_matches_clauses():
    # the batched evaluator against the straight recursive definition
    rng = random.Random(5)
    fs = formula_suite(40, seed=5, max_size=7)
    checked = 0
    for n, _, tables, model_at in truth_tables(fs, 2):
        for i in rng.sample(range(len(tables[fs[0]])), min(3, len(tables[fs[0]]))):
            m = model_at(i)
            for f in fs:
                mask = int(tables[f][i])
                expected = truth_set(m, f)
                assert {f"w{j}" for j in range(n) if mask >> j & 1} == expected
                checked += 1
    assert checked > 100


@settings(max_examples=60, deadline=None)
@given(small_formulas)
def test_monotonicity_on_two_world_models(a):
    for m in enumerate_models(2, sorted({"p", "q"})):
        ts = truth_set(m, a)
        for x, y in m.leq:
            assert x not in ts or y in ts


def test_subformulas_evaluated_together():
    f = parse("[]p -> <>q")
    tables = next(truth_tables(subformulas(f), 1))[2]
    assert set(tables) == subformulas(f)


# documents ---------------------------------------------------------------------

def test_json_roundtrip(tmp_path):
    doc = model_to_dict(MODEL_1)
    assert model_from_dict(doc) == MODEL_1
    path = tmp_path / "m.json"
    path.write_text(json.dumps(doc))
    assert load_model(path) == MODEL_1


def test_close_leq_adds_reflexive_pairs():
    doc = {"worlds": ["a", "b"], "leq": [["a", "b"]], "r": [], "val": {"b": ["p"]}}
    bare = model_from_dict(doc)
    assert [v.condition for v in validate_model(bare)] == ["reflexivity", "reflexivity"]
    closed = model_from_dict(doc, close_leq=True)
    assert validate_model(closed) == []


def test_close_leq_does_not_repair_transitivity():
    doc = {"worlds": ["a", "b", "c"], "leq": [["a", "b"], ["b", "c"]], "r": [], "val": {}}
    conditions = {v.condition for v in validate_model(model_from_dict(doc, close_leq=True))}
    assert conditions == {"transitivity"}


@pytest.mark.parametrize("doc", [
    {"leq": []},
    {"worlds": ["a", "a"]},
    {"worlds": ["a"], "val": {"b": ["p"]}},
])
def test_malformed_documents(doc):
    with pytest.raises(ValueError):
        model_from_dict(doc)


def test_model_str_is_compact():
    assert "R[ab, ad, cd]" in str(MODEL_1)
