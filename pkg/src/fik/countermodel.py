"""Countermodels read off a saturated leaf, and their independent re-check.

Every nested occurrence of the leaf becomes a world (identical contents
share one).  ``x <= y`` when x's sequent is structurally included in y's,
``R x y`` when y's sequent is a modal block directly inside x's, and the
atoms true at x are the atoms in its antecedent.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .formula import Atom, Formula, Imp, render
from .kripke import Model, model_to_dict, truth_set, validate_model
from .sequent import Sequent, nested_occurrences, structurally_included

__all__ = [
    "NotSaturatedError", "ExtractionReport", "CheckResult", "extract_model",
    "verify_countermodel", "goal_report", "annotated_dict", "to_dot",
]


class NotSaturatedError(ValueError):
    pass


@dataclass
class CheckResult:
    ok: bool
    checks: list = field(default_factory=list)  # (name, passed, detail)

    @property
    def detail(self) -> str:
        return "; ".join(f"{name}: {info}" for name, ok, info in self.checks if not ok)


@dataclass
class ExtractionReport:
    model: Model
    world_index: dict   # address -> world name
    sequent_of: dict    # world name -> sequent
    root_world: str
    checks: CheckResult


def _frame_checks(m: Model) -> list:
    violations = validate_model(m)
    out = []
    for name, conds in (("pre-order", ("reflexivity", "transitivity", "unknown-world")),
                        ("hereditary", ("hereditary",)),
                        ("forward-confluence", ("forward-confluence",))):
        bad = [v for v in violations if v.condition in conds]
        out.append((name, not bad, ", ".join(f"{v.condition}{v.witness}" for v in bad[:5])))
    return out


def _truth_lemma(m: Model, sequent_of: dict) -> tuple:
    memo = {}
    problems = []
    for w, s in sequent_of.items():
        for f in s.ante:
            if w not in truth_set(m, f, memo):
                problems.append(f"{w} does not force antecedent {render(f)}")
        for f in s.succ:
            if w in truth_set(m, f, memo):
                problems.append(f"{w} forces succedent {render(f)}")
    return ("truth-lemma", not problems, "; ".join(problems[:5]))


def _build(leaf: Sequent) -> tuple:
    occs = nested_occurrences(leaf)
    names, sequent_of, world_index = {}, {}, {}
    for addr, t, _ in occs:
        if t not in names:
            names[t] = f"x{len(names)}"
            sequent_of[names[t]] = t
        world_index[addr] = names[t]
    seqs = list(names)
    leq = {(names[a], names[b]) for a in seqs for b in seqs if structurally_included(a, b)}
    acc = {(names[a], names[b]) for a in seqs for b in a.boxes}
    val = {names[t]: frozenset(f.name for f in t.ante if isinstance(f, Atom)) for t in seqs}
    model = Model(tuple(names.values()), frozenset(leq), frozenset(acc), val)
    return model, world_index, sequent_of


def extract_model(leaf: Sequent, check_saturation: bool = True) -> ExtractionReport:
    """Build the model of a global-saturated leaf and run the frame and truth checks."""
    if check_saturation:
        from .calculus import global_saturated, is_axiomatic

        if is_axiomatic(leaf) or not global_saturated(leaf):
            raise NotSaturatedError(f"not a global-saturated leaf: {leaf}")
    model, world_index, sequent_of = _build(leaf)
    checks = _frame_checks(model) + [_truth_lemma(model, sequent_of)]
    return ExtractionReport(model, world_index, sequent_of, world_index[()],
                            CheckResult(all(ok for _, ok, _ in checks), checks))


def verify_countermodel(report: ExtractionReport, goal: Optional[Formula]) -> CheckResult:
    """Re-check pre-order, heredity, FC, the truth lemma and refutation of ``goal``.

    Everything is recomputed from ``report.model``; the checks stored in the
    report are not trusted.
    """
    m = report.model
    checks = _frame_checks(m) + [_truth_lemma(m, report.sequent_of)]
    if goal is not None:
        refuted = report.root_world not in truth_set(m, goal)
        checks.append(("goal-refuted", refuted, "" if refuted else f"{report.root_world} forces the goal"))
    return CheckResult(all(ok for _, ok, _ in checks), checks)


def goal_report(leaf: Sequent, goal: Formula) -> ExtractionReport:
    """The countermodel reported for ``goal`` from its saturated leaf.

    Search starts from ``=> B -> C`` and its first step opens ``<B => C>``;
    after that the root never changes and the search inside the block is
    the search for ``B => C``.  When that block is present its model is
    reported, provided it passes every check; otherwise the whole leaf's.
    """
    if isinstance(goal, Imp) and len(leaf.imps) == 1 and not leaf.boxes:
        (block,) = leaf.imps
        if goal.left in block.ante and goal.right in block.succ:
            report = extract_model(block, check_saturation=False)
            if verify_countermodel(report, goal).ok:
                return report
    return extract_model(leaf, check_saturation=False)


def annotated_dict(m: Model, sequent_of: dict) -> dict:
    """The model document plus the sequent each world was read off."""
    doc = model_to_dict(m)
    doc["sequents"] = {w: str(sequent_of[w]) for w in m.worlds if w in sequent_of}
    return doc


def _elided(m: Model) -> set:
    keep = set()
    for a, c in m.leq:
        if a == c:
            continue
        if any(b not in (a, c) and (a, b) in m.leq and (b, c) in m.leq for b in m.worlds):
            continue
        keep.add((a, c))
    return keep


def to_dot(m: Model, sequent_of: Optional[dict] = None, elide_preorder_closure: bool = False) -> str:
    """Graphviz text: solid arrows for R, dashed for the pre-order."""
    lines = ["digraph countermodel {", "  node [shape=box];"]
    for w in m.worlds:
        atoms = ",".join(sorted(m.val[w]))
        label = f"{w}\\n{{{atoms}}}"
        if sequent_of and w in sequent_of:
            label += "\\n" + str(sequent_of[w]).replace('"', '\\"')
        lines.append(f'  "{w}" [label="{label}"];')
    order = {w: i for i, w in enumerate(m.worlds)}
    for a, b in sorted(m.acc, key=lambda p: (order[p[0]], order[p[1]])):
        lines.append(f'  "{a}" -> "{b}" [label="R"];')
    leq = _elided(m) if elide_preorder_closure else m.leq
    for a, b in sorted(leq, key=lambda p: (order[p[0]], order[p[1]])):
        lines.append(f'  "{a}" -> "{b}" [style=dashed];')
    lines.append("}")
    return "\n".join(lines) + "\n"
