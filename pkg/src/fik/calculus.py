"""The cumulative set-based calculus and its terminating proof search.

Rules keep their principal formulas, and a rule is only applied where its
saturation condition fails.  Rules fall into three groups:

    R1  and, or, implication-left, box-left, diamond-left/right
    R2  trans, inter
    R3  box-right, implication-right (the two rules that open new <.> blocks)

``prove`` grows a derivation depth-first, left premise first.  For each open
leaf it expands one nested occurrence T per round, with the highest group
that is due:

    every occurrence R2-saturated or blocked  ->  R3 on an outermost T
    every occurrence R1-saturated or blocked  ->  R2 on T
    otherwise                                 ->  R1 on T (and its modal blocks)

An occurrence is blocked when an R3-saturated sequent that contains it
through implication blocks only has the same antecedent and the same
succedent once implication blocks are erased.  Blocking is recomputed from
the leaf each round.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Optional

from .formula import BOT, TOP, And, Box, Dia, Formula, Imp, Or, formula_key, render
from .sequent import (
    IMP, MODAL, Address, Sequent, block_equivalent, imp_suffix, nested_occurrences,
    replace, resolve, sequent_size, star, structurally_included,
)

__all__ = [
    "RuleId", "RuleInstance", "DerivationTree", "Provable", "Unprovable", "BudgetExceeded",
    "Stats", "is_axiomatic", "applicable", "apply", "r1_saturated", "r2_saturated",
    "r3_saturated", "blocked", "global_r1", "global_r2", "global_saturated", "exp1",
    "exp2", "exp3", "prove", "prove_sequent", "R1_RULES", "R2_RULES", "R3_RULES",
]


class RuleId(enum.Enum):
    BotL = "botL"
    TopR = "topR"
    Id = "id"
    AndL = "andL"
    AndR = "andR"
    OrL = "orL"
    OrR = "orR"
    ImpL = "impL"
    ImpR1 = "impR1"
    ImpR2 = "impR2"
    BoxL = "boxL"
    BoxR = "boxR"
    DiaL = "diaL"
    DiaR = "diaR"
    Trans = "trans"
    Inter = "inter"

    def __str__(self):
        return self.value


# Unary rules before branching ones inside R1.
R1_RULES = (RuleId.AndL, RuleId.OrR, RuleId.DiaL, RuleId.BoxL, RuleId.DiaR,
            RuleId.AndR, RuleId.OrL, RuleId.ImpL)
R2_RULES = (RuleId.Trans, RuleId.Inter)
R3_RULES = (RuleId.BoxR, RuleId.ImpR1, RuleId.ImpR2)


@dataclass(frozen=True)
class RuleInstance:
    rule: RuleId
    at: Address
    principal: tuple  # formulas and/or blocks, e.g. (box formula, target block)

    def describe(self) -> str:
        # a block in first position is an implication block, in second a modal one
        parts = [f"[{p}]" if i else f"<{p}>" if isinstance(p, Sequent) else render(p)
                 for i, p in enumerate(self.principal)]
        depth = f" @depth {len(self.at)}" if self.at else ""
        return f"{self.rule}{depth}: {'; '.join(parts)}"


# --------------------------------------------------------------------------
# Axioms and saturation conditions
# --------------------------------------------------------------------------


def _axiom_here(t: Sequent) -> Optional[str]:
    if BOT in t.ante:
        return "botL"
    if TOP in t.succ:
        return "topR"
    if t.ante & t.succ:
        return "id"
    return None


@lru_cache(maxsize=1 << 16)
def is_axiomatic(s: Sequent) -> Optional[tuple]:
    """``(address, axiom)`` for the first occurrence closing ``s``, or None."""
    for addr, t, _ in nested_occurrences(s):
        kind = _axiom_here(t)
        if kind:
            return addr, kind
    return None


def _r1_violations(t: Sequent) -> list:
    """R1 instances violated at ``t`` itself, as ``(rule, principal)``."""
    out = []
    ante, succ = t.ante, t.succ
    for f in sorted(ante, key=formula_key):
        if isinstance(f, And) and not (f.left in ante and f.right in ante):
            out.append((RuleId.AndL, (f,)))
        elif isinstance(f, Or) and f.left not in ante and f.right not in ante:
            out.append((RuleId.OrL, (f,)))
        elif isinstance(f, Imp) and f.left not in succ and f.right not in ante:
            out.append((RuleId.ImpL, (f,)))
        elif isinstance(f, Box):
            for b in sorted(t.boxes, key=str):
                if f.body not in b.ante:
                    out.append((RuleId.BoxL, (f, b)))
        elif isinstance(f, Dia) and not any(f.body in b.ante for b in t.boxes):
            out.append((RuleId.DiaL, (f,)))
    for f in sorted(succ, key=formula_key):
        if isinstance(f, And) and f.left not in succ and f.right not in succ:
            out.append((RuleId.AndR, (f,)))
        elif isinstance(f, Or) and not (f.left in succ and f.right in succ):
            out.append((RuleId.OrR, (f,)))
        elif isinstance(f, Dia):
            for b in sorted(t.boxes, key=str):
                if f.body not in b.succ:
                    out.append((RuleId.DiaR, (f, b)))
    order = {r: i for i, r in enumerate(R1_RULES)}
    return sorted(out, key=lambda v: order[v[0]])


def _r2_violations(t: Sequent) -> list:
    out = []
    for i in sorted(t.imps, key=str):
        if not t.ante <= i.ante:
            out.append((RuleId.Trans, (i,)))
    for i in sorted(t.imps, key=str):
        for b in sorted(t.boxes, key=str):
            if not any(structurally_included(b, c) for c in i.boxes):
                out.append((RuleId.Inter, (i, b)))
    return out


def _box_r_ok(t: Sequent, a: Formula) -> bool:
    return (any(a in b.succ for b in t.boxes)
            or any(a in b.succ for i in t.imps for b in i.boxes))


def _imp_r_ok(t: Sequent, f: Imp) -> bool:
    return ((f.left in t.ante and f.right in t.succ)
            or any(f.left in i.ante and f.right in i.succ for i in t.imps))


def _r3_violations(t: Sequent) -> list:
    out = []
    for f in sorted(t.succ, key=formula_key):
        if isinstance(f, Box) and not _box_r_ok(t, f.body):
            out.append((RuleId.BoxR, (f,)))
        elif isinstance(f, Imp) and not _imp_r_ok(t, f):
            out.append((RuleId.ImpR1 if f.left in t.ante else RuleId.ImpR2, (f,)))
    return out


def _sharp_tree(t: Sequent, addr: Address = ()):
    """``t`` and its modal descendants reached through modal blocks only."""
    stack = [(addr, t)]
    while stack:
        a, u = stack.pop()
        yield a, u
        for b in sorted(u.boxes, key=str, reverse=True):
            stack.append((a + ((MODAL, b),), b))


@lru_cache(maxsize=1 << 16)
def r1_saturated(t: Sequent) -> bool:
    """R1 conditions hold on ``t`` with implication blocks erased, at every depth."""
    return all(not _r1_violations(u) for _, u in _sharp_tree(t))


@lru_cache(maxsize=1 << 16)
def r2_saturated(t: Sequent) -> bool:
    return r1_saturated(t) and not _r2_violations(t)


@lru_cache(maxsize=1 << 16)
def r3_saturated(t: Sequent) -> bool:
    return r2_saturated(t) and not _r3_violations(t)


def applicable(rule: RuleId, s: Sequent) -> list:
    """Every non-redundant instance of ``rule`` anywhere in ``s``."""
    if rule in (RuleId.BotL, RuleId.TopR, RuleId.Id):
        return []
    finder = (_r1_violations if rule in R1_RULES
              else _r2_violations if rule in R2_RULES else _r3_violations)
    return [RuleInstance(r, addr, principal)
            for addr, t, _ in nested_occurrences(s)
            for r, principal in finder(t) if r is rule]


def _premises_here(rule: RuleId, principal: tuple, t: Sequent) -> list:
    """Premises of one rule applied at ``t`` (the hole of the context)."""
    if rule is RuleId.AndL:
        f = principal[0]
        return [t.add_ante(f.left, f.right)]
    if rule is RuleId.AndR:
        f = principal[0]
        return [t.add_succ(f.left), t.add_succ(f.right)]
    if rule is RuleId.OrL:
        f = principal[0]
        return [t.add_ante(f.left), t.add_ante(f.right)]
    if rule is RuleId.OrR:
        f = principal[0]
        return [t.add_succ(f.left, f.right)]
    if rule is RuleId.ImpL:
        f = principal[0]
        return [t.add_succ(f.left), t.add_ante(f.right)]
    if rule is RuleId.BoxL:
        f, b = principal
        return [t.swap_block(MODAL, b, b.add_ante(f.body))]
    if rule is RuleId.DiaR:
        f, b = principal
        return [t.swap_block(MODAL, b, b.add_succ(f.body))]
    if rule is RuleId.DiaL:
        return [t.add_box(Sequent(ante=[principal[0].body]))]
    if rule is RuleId.BoxR:
        return [t.add_imp(Sequent(boxes=[Sequent(succ=[principal[0].body])]))]
    if rule is RuleId.ImpR1:
        return [t.add_succ(principal[0].right)]
    if rule is RuleId.ImpR2:
        f = principal[0]
        return [t.add_imp(Sequent(ante=[f.left], succ=[f.right]))]
    if rule is RuleId.Trans:
        i = principal[0]
        return [t.swap_block(IMP, i, i.add_ante(*t.ante))]
    if rule is RuleId.Inter:
        i, b = principal
        return [t.swap_block(IMP, i, i.add_box(star(b)))]
    raise ValueError(f"{rule} has no premises")


_FINDERS = {**{r: _r1_violations for r in R1_RULES}, **{r: _r2_violations for r in R2_RULES},
            **{r: _r3_violations for r in R3_RULES}}


def _apply_tracked(inst: RuleInstance, s: Sequent) -> list:
    """Premises of ``inst`` as ``(host, address of the rewritten occurrence)``."""
    t = resolve(s, inst.at)
    if inst.rule not in _FINDERS:
        raise ValueError(f"{inst.rule} is an axiom, not a rule")
    if (inst.rule, inst.principal) not in _FINDERS[inst.rule](t):
        raise ValueError(f"redundant or ill-formed instance {inst.describe()}")
    return [replace(s, inst.at, p) for p in _premises_here(inst.rule, inst.principal, t)]


def apply(inst: RuleInstance, s: Sequent) -> list:
    """The one or two premises of applying ``inst`` backwards to ``s``."""
    return [host for host, _ in _apply_tracked(inst, s)]


# --------------------------------------------------------------------------
# Blocking and global saturation
# --------------------------------------------------------------------------


def blocked(t_addr: Address, s: Sequent) -> Optional[Address]:
    """Address of an occurrence blocking the one at ``t_addr``, if any.

    Candidates are the occurrences from which ``t`` is reached through
    implication blocks only, outermost first.
    """
    t = resolve(s, t_addr)
    k = imp_suffix(t_addr)
    for cut in range(len(t_addr) - k, len(t_addr)):
        s1 = resolve(s, t_addr[:cut])
        if block_equivalent(s1, t) and r3_saturated(s1):
            return t_addr[:cut]
    return None


def _global(level: Callable, s: Sequent) -> bool:
    return all(level(t) or blocked(addr, s) is not None for addr, t, _ in nested_occurrences(s))


def global_r1(s: Sequent) -> bool:
    return _global(r1_saturated, s)


def global_r2(s: Sequent) -> bool:
    return _global(r2_saturated, s)


def global_saturated(s: Sequent) -> bool:
    return _global(r3_saturated, s)


# --------------------------------------------------------------------------
# Derivations
# --------------------------------------------------------------------------


@dataclass
class DerivationTree:
    sequent: Sequent
    applied: Optional[RuleInstance] = None
    children: list = field(default_factory=list)
    status: str = "open"  # axiomatic | saturated | open, meaningful on leaves

    def leaves(self):
        stack = [self]
        while stack:
            node = stack.pop()
            if node.children:
                stack.extend(reversed(node.children))
            else:
                yield node

    def size(self) -> int:
        return sum(1 for _ in self.nodes())

    def nodes(self):
        stack = [self]
        while stack:
            node = stack.pop()
            yield node
            stack.extend(reversed(node.children))

    def render(self) -> str:
        """Indented text, one sequent per line; the rule sits on the edge below it."""
        lines = []
        stack = [(self, 0)]
        while stack:
            node, depth = stack.pop()
            pad = "  " * depth
            mark = {"axiomatic": "  [axiom]", "saturated": "  [saturated]"}.get(node.status, "") \
                if not node.children else ""
            lines.append(f"{pad}{node.sequent}{mark}")
            if node.applied is not None:
                lines.append(f"{pad}  -- {node.applied.describe()}")
            for child in reversed(node.children):
                stack.append((child, depth + 1))
        return "\n".join(lines)

    def to_dict(self) -> dict:
        def conv(node):
            return {
                "sequent": str(node.sequent),
                "applied": None if node.applied is None else {
                    "rule": str(node.applied.rule),
                    "at": [[k, str(c)] for k, c in node.applied.at],
                    "principal": [str(p) for p in node.applied.principal],
                },
                "children": [],
                "status": node.status,
            }
        root = conv(self)
        stack = [(self, root)]
        while stack:
            node, doc = stack.pop()
            for child in node.children:
                cdoc = conv(child)
                doc["children"].append(cdoc)
                stack.append((child, cdoc))
        return root


@dataclass
class Stats:
    rule_counts: dict = field(default_factory=dict)
    steps: int = 0
    rounds: int = 0
    max_sequent_size: int = 0
    blocked_hits: int = 0
    invariant_checks: int = 0

    def as_dict(self) -> dict:
        return {
            "steps": self.steps,
            "rounds": self.rounds,
            "max_sequent_size": self.max_sequent_size,
            "blocked_hits": self.blocked_hits,
            "rule_counts": {str(k): v for k, v in sorted(self.rule_counts.items(), key=lambda kv: kv[0].value)},
        }


@dataclass
class Provable:
    tree: DerivationTree
    stats: Stats

    verdict = "PROVABLE"


@dataclass
class Unprovable:
    tree: DerivationTree
    leaf: Sequent
    model: object
    root_world: str
    report: object
    stats: Stats

    verdict = "UNPROVABLE"


class BudgetExceeded(RuntimeError):
    def __init__(self, budget: int, stats: Stats):
        super().__init__(f"step budget of {budget} rule applications exceeded")
        self.budget = budget
        self.stats = stats


def _condition(violation: tuple) -> tuple:
    # impR1 and impR2 are one condition; which applies depends on the antecedent
    rule, principal = violation
    return (RuleId.ImpR2 if rule is RuleId.ImpR1 else rule), principal


_LEFT_RULES = frozenset({RuleId.AndL, RuleId.OrL, RuleId.ImpL, RuleId.BoxL, RuleId.DiaL})


def _existed(violation: tuple, t: Sequent) -> bool:
    """Whether the principal formula (on its side) and any target block were already in ``t``."""
    rule, (f, *blocks) = violation
    side = t.ante if rule in _LEFT_RULES else t.succ
    return f in side and all(b in t.boxes for b in blocks)


class _Search:
    def __init__(self, budget: Optional[int], debug: bool):
        self.budget = budget
        self.debug = debug
        self.stats = Stats()

    def step(self, node: DerivationTree, inst: RuleInstance) -> list:
        """Apply ``inst`` at ``node``; returns child nodes with tracked addresses."""
        if self.budget is not None and self.stats.steps >= self.budget:
            raise BudgetExceeded(self.budget, self.stats)
        self.stats.steps += 1
        self.stats.rule_counts[inst.rule] = self.stats.rule_counts.get(inst.rule, 0) + 1
        node.applied = inst
        out = []
        for host, addr in _apply_tracked(inst, node.sequent):
            child = DerivationTree(host)
            node.children.append(child)
            self.stats.max_sequent_size = max(self.stats.max_sequent_size, sequent_size(host))
            if self.debug:
                self.check_invariant(node.sequent, inst.at, host, addr)
            out.append((child, addr))
        return out

    def check_invariant(self, before: Sequent, at: Address, after: Sequent, new_at: Address) -> None:
        """Conditions satisfied before a step stay satisfied after it.

        Checked for every occurrence on the path from the root to the
        rewritten one (the only occurrences a step changes): no formula is
        dropped, and no R1 or R3 condition on formulas and blocks already
        present starts failing.
        """
        for cut in range(len(at) + 1):
            self.stats.invariant_checks += 1
            old_t, new_t = resolve(before, at[:cut]), resolve(after, new_at[:cut])
            lost = (old_t.ante - new_t.ante) | (old_t.succ - new_t.succ)
            assert not lost, f"saturated condition undone at depth {cut}: formulas dropped {lost}"
            for finder in (_r1_violations, _r3_violations):
                old = {_condition(v) for v in finder(old_t)}
                fresh = [v for v in finder(new_t) if _condition(v) not in old and _existed(v, old_t)]
                assert not fresh, f"saturated condition undone at depth {cut}: {fresh}"


def _expand(search: _Search, node: DerivationTree, t_addr: Address, pick) -> list:
    """Apply ``pick`` repeatedly below ``node``; returns the open leaves made.

    ``pick(host, t_addr)`` returns the next instance or None when done.
    Axiomatic premises are closed on the spot.
    """
    leaves = []
    stack = [(node, t_addr)]
    while stack:
        cur, addr = stack.pop()
        if cur is not node and is_axiomatic(cur.sequent):
            cur.status = "axiomatic"
            continue
        inst = pick(cur.sequent, addr)
        if inst is None:
            if cur is not node:
                leaves.append(cur)
            continue
        children = search.step(cur, inst)
        for child, new_addr in reversed(children):
            stack.append((child, new_addr[:len(addr)]))
    return leaves


def _pick_r1(host: Sequent, t_addr: Address) -> Optional[RuleInstance]:
    t = resolve(host, t_addr)
    for sub, u in _sharp_tree(t):
        v = _r1_violations(u)
        if v:
            rule, principal = v[0]
            return RuleInstance(rule, t_addr + sub, principal)
    return None


def _pick_r2(host: Sequent, t_addr: Address) -> Optional[RuleInstance]:
    v = _r2_violations(resolve(host, t_addr))
    return RuleInstance(v[0][0], t_addr, v[0][1]) if v else None


def exp1(search: _Search, node: DerivationTree, t_addr: Address) -> list:
    """Exhaust R1 rules on the occurrence and its modal blocks."""
    return _expand(search, node, t_addr, _pick_r1)


def exp2(search: _Search, node: DerivationTree, t_addr: Address) -> list:
    """Apply trans and inter to the occurrence's direct blocks until saturated."""
    return _expand(search, node, t_addr, _pick_r2)


def exp3(search: _Search, node: DerivationTree, t_addr: Address) -> list:
    """One box-right or implication-right step per formula violating its condition."""
    pending = [f for _, (f,) in _r3_violations(resolve(node.sequent, t_addr))]

    def pick(host, addr):
        t = resolve(host, addr)
        while pending:
            f = pending.pop(0)
            for rule, principal in _r3_violations(t):
                if principal[0] == f:
                    return RuleInstance(rule, addr, principal)
        return None

    return _expand(search, node, t_addr, pick)


def _choose(search: _Search, s: Sequent):
    """The expansion due for leaf ``s`` as ``(procedure, address)``, or None if saturated."""
    occs = nested_occurrences(s)
    block_memo = {}

    def is_blocked(addr):
        if addr not in block_memo:
            block_memo[addr] = blocked(addr, s) is not None
        return block_memo[addr]

    def first_unsat(level):
        for addr, t, _ in occs:
            if not level(t):
                if is_blocked(addr):
                    search.stats.blocked_hits += 1
                    continue
                return addr
        return None

    addr = first_unsat(r1_saturated)
    if addr is not None:
        return exp1, addr
    addr = first_unsat(r2_saturated)
    if addr is not None:
        return exp2, addr
    unsat = {a for a, t, _ in occs if not r3_saturated(t)}
    if not unsat:
        return None
    for addr, t, _ in occs:
        if addr not in unsat:
            continue
        k = imp_suffix(addr)
        if any(addr[:cut] in unsat for cut in range(len(addr) - k, len(addr))):
            continue  # an outer occurrence on the implication path comes first
        if is_blocked(addr):
            search.stats.blocked_hits += 1
            continue
        return exp3, addr
    if all(is_blocked(a) for a in unsat):
        return None
    raise AssertionError(f"no expandable occurrence in a leaf that is not global-saturated: {s}")


def prove_sequent(s: Sequent, budget: Optional[int] = None, debug: bool = False,
                  goal: Optional[Formula] = None):
    """Run the search from ``s``; see ``prove``."""
    search = _Search(budget, debug)
    root = DerivationTree(s)
    search.stats.max_sequent_size = sequent_size(s)
    stack = [root]
    while stack:
        leaf = stack.pop()
        if is_axiomatic(leaf.sequent):
            leaf.status = "axiomatic"
            continue
        search.stats.rounds += 1
        choice = _choose(search, leaf.sequent)
        if choice is None:
            leaf.status = "saturated"
            return _refuted(root, leaf.sequent, goal, search.stats)
        procedure, addr = choice
        new_leaves = procedure(search, leaf, addr)
        stack.extend(reversed(new_leaves))
    return Provable(root, search.stats)


def _refuted(root: DerivationTree, leaf: Sequent, goal: Optional[Formula], stats: Stats) -> Unprovable:
    from .countermodel import extract_model, goal_report, verify_countermodel

    report = extract_model(leaf)
    if goal is not None:
        report = goal_report(leaf, goal)
    check = verify_countermodel(report, goal)
    if not check.ok:
        raise AssertionError(f"extracted model failed verification: {check.detail}")
    return Unprovable(root, leaf, report.model, report.root_world, report, stats)


def prove(a: Formula, budget: Optional[int] = None, debug: bool = False):
    """Decide ``a``: Provable with a closed derivation or Unprovable with a countermodel.

    On failure the first saturated leaf in depth-first order is reported,
    with its countermodel (see ``countermodel.goal_report``).
    """
    return prove_sequent(Sequent(succ=[a]), budget=budget, debug=debug, goal=a)
