import dataclasses

import pytest

from fik.calculus import prove
from fik.countermodel import (
    NotSaturatedError, annotated_dict, extract_model, goal_report, to_dot, verify_countermodel,
)
from fik.formula import parse
from fik.kripke import Model
from fik.sequent import IMP, nested_occurrences, parse_sequent, structurally_included
from gen import formula_suite

BOX_GOAL = parse("(<>p -> []q) -> [](p -> q)")
NEG_GOAL = parse("~~[]~p -> []~p")


def closure(worlds, pairs):
    leq = {(w, w) for w in worlds} | set(pairs)
    while True:
        extra = {(a, d) for a, b in leq for c, d in leq if b == c} - leq
        if not extra:
            return leq
        leq |= extra


def test_four_world_example():
    result = prove(BOX_GOAL)
    m = result.model
    assert len(m.worlds) == 4 and result.root_world == "x0"
    # x_Si is xi here
    assert m.leq == closure(m.worlds, {("x0", "x1"), ("x2", "x0"), ("x2", "x3")})
    assert m.acc == {("x1", "x2")}
    assert {w: set(v) for w, v in m.val.items() if v} == {"x3": {"p"}}
    assert verify_countermodel(result.report, BOX_GOAL).ok


def test_seven_world_example():
    result = prove(NEG_GOAL)
    m = result.model
    assert len(m.worlds) == 7
    # names of the example's S0..S6 in our extraction
    s = {0: "x0", 1: "x2", 2: "x3", 3: "x4", 4: "x5", 5: "x6", 6: "x1"}
    assert str(result.report.sequent_of[s[3]]) == "p => bot"
    assert str(result.report.sequent_of[s[5]]) == "~p => p"
    edges = [(0, 1), (0, 6), (1, 4), (6, 4), (2, 3), (2, 5), (2, 0)]
    assert m.leq == closure(m.worlds, {(s[a], s[b]) for a, b in edges})
    assert m.acc == {(s[1], s[2]), (s[4], s[5])}
    assert {w: set(v) for w, v in m.val.items() if v} == {s[3]: {"p"}}
    check = verify_countermodel(result.report, NEG_GOAL)
    assert check.ok
    assert [name for name, _, _ in check.checks] == [
        "pre-order", "hereditary", "forward-confluence", "truth-lemma", "goal-refuted"]


def test_single_world_leaf():
    report = extract_model(parse_sequent("=> p"))
    assert report.model.worlds == ("x0",) and report.model.val["x0"] == set()
    assert verify_countermodel(report, parse("p")).ok


def test_unsaturated_leaf_is_rejected():
    with pytest.raises(NotSaturatedError):
        extract_model(parse_sequent("a & b =>"))
    with pytest.raises(NotSaturatedError):
        extract_model(parse_sequent("p => p"))


def _with_leq(report, leq):
    m = report.model
    return dataclasses.replace(report, model=Model(m.worlds, frozenset(leq), m.acc, m.val))


def test_broken_model_fails_with_fc_witness():
    report = prove(BOX_GOAL).report
    broken = _with_leq(report, report.model.leq | {("x1", "x0")})
    check = verify_countermodel(broken, BOX_GOAL)
    assert not check.ok
    failed = {name: info for name, ok, info in check.checks if not ok}
    assert "forward-confluence" in failed
    assert "('x0', 'x2', 'x1')" in failed["forward-confluence"]


def test_dropping_an_edge_below_the_p_world_keeps_fc():
    # removing x2 <= x3 leaves FC intact (the only R edge starts at x1, which
    # has no strict upper world); the truth lemma is what breaks
    report = prove(BOX_GOAL).report
    broken = _with_leq(report, report.model.leq - {("x2", "x3")})
    check = verify_countermodel(broken, BOX_GOAL)
    status = {name: ok for name, ok, _ in check.checks}
    assert status["forward-confluence"] and status["pre-order"]
    assert not status["truth-lemma"]


def test_goal_report_falls_back_to_the_whole_leaf():
    result = prove(parse("p"))
    assert result.model.worlds == ("x0",)
    leaf = prove(BOX_GOAL).leaf
    assert len(goal_report(leaf, parse("q")).model.worlds) == len(extract_model(leaf).model.worlds)


def test_extracted_relations_follow_the_definition():
    for f in formula_suite(200, seed=13):
        result = prove(f)
        if result.verdict != "UNPROVABLE":
            continue
        report = extract_model(result.leaf)
        m, names = report.model, report.world_index
        seq = report.sequent_of
        assert set(names.values()) == set(m.worlds)
        for x in m.worlds:
            for y in m.worlds:
                assert ((x, y) in m.leq) == structurally_included(seq[x], seq[y])
        # every implication block is a world above its parent
        for addr, t, kind in nested_occurrences(result.leaf):
            if kind == IMP:
                assert (names[addr[:-1]], names[addr]) in m.leq
        assert report.checks.ok
        assert verify_countermodel(result.report, f).ok


def test_documents():
    result = prove(BOX_GOAL)
    doc = annotated_dict(result.model, result.report.sequent_of)
    assert doc["sequents"]["x3"] == "p => q"
    assert doc["val"]["x3"] == ["p"]
    dot = to_dot(result.model, result.report.sequent_of)
    assert '"x1" -> "x2" [label="R"];' in dot
    assert '"x2" -> "x1" [style=dashed];' in dot
    elided = to_dot(result.model, elide_preorder_closure=True)
    assert '"x2" -> "x1"' not in elided and '"x0" -> "x0"' not in elided
    assert '"x2" -> "x0" [style=dashed];' in elided
