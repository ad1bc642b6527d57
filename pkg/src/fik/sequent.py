"""Set-based bi-nested sequents and the structural operators on them.

A sequent ``G => D`` has a set of antecedent formulas and a succedent made
of formulas, modal blocks ``[T]`` and implication blocks ``<T>``.  Sequents
are immutable and compare by content, so two rule applications that build
the same block produce one block.

An address is a tuple of ``(kind, child)`` steps from the root, where kind
is ``"modal"`` or ``"imp"`` and child is the block's content.  Content keys
stay valid while siblings change, which positional indices would not.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Iterator

from .formula import Formula, FormulaParser, formula_key, modal_degree, render, size, tokenize

__all__ = [
    "Sequent", "Address", "MODAL", "IMP", "parse_sequent", "star", "sharp",
    "structurally_included", "block_equivalent", "nested_occurrences", "resolve",
    "replace", "seq_modal_degree", "modal_tree", "ModalTree", "sequent_size",
    "all_formulas", "imp_suffix",
]

MODAL = "modal"
IMP = "imp"


class Sequent:
    __slots__ = ("ante", "succ", "boxes", "imps", "_hash", "_text")

    def __init__(self, ante: Iterable[Formula] = (), succ: Iterable[Formula] = (),
                 boxes: Iterable["Sequent"] = (), imps: Iterable["Sequent"] = ()):
        self.ante = frozenset(ante)
        self.succ = frozenset(succ)
        self.boxes = frozenset(boxes)
        self.imps = frozenset(imps)
        self._hash = hash((self.ante, self.succ, self.boxes, self.imps))
        self._text = None

    def __hash__(self):
        return self._hash

    def __eq__(self, other):
        if self is other:
            return True
        if not isinstance(other, Sequent) or self._hash != other._hash:
            return False
        return (self.ante == other.ante and self.succ == other.succ
                and self.boxes == other.boxes and self.imps == other.imps)

    def __reduce__(self):
        return (Sequent, (self.ante, self.succ, self.boxes, self.imps))

    def __str__(self):
        if self._text is None:
            self._text = _render(self)
        return self._text

    def __repr__(self):
        return f"Sequent({str(self)!r})"

    # builders; each returns a new sequent

    def add_ante(self, *fs: Formula) -> "Sequent":
        return Sequent(self.ante | set(fs), self.succ, self.boxes, self.imps)

    def add_succ(self, *fs: Formula) -> "Sequent":
        return Sequent(self.ante, self.succ | set(fs), self.boxes, self.imps)

    def add_box(self, t: "Sequent") -> "Sequent":
        return Sequent(self.ante, self.succ, self.boxes | {t}, self.imps)

    def add_imp(self, t: "Sequent") -> "Sequent":
        return Sequent(self.ante, self.succ, self.boxes, self.imps | {t})

    def swap_block(self, kind: str, old: "Sequent", new: "Sequent") -> "Sequent":
        if kind == MODAL:
            return Sequent(self.ante, self.succ, (self.boxes - {old}) | {new}, self.imps)
        return Sequent(self.ante, self.succ, self.boxes, (self.imps - {old}) | {new})

    def children(self) -> list:
        """Direct blocks as ``(kind, child)`` in canonical order: modal first."""
        return ([(MODAL, b) for b in sorted(self.boxes, key=str)]
                + [(IMP, b) for b in sorted(self.imps, key=str)])

    @property
    def is_block_free(self) -> bool:
        return not self.boxes and not self.imps


Address = tuple


def _sorted_formulas(fs) -> list:
    return sorted(fs, key=formula_key)


def _render(s: Sequent) -> str:
    left = ", ".join(render(f) for f in _sorted_formulas(s.ante))
    right = [render(f) for f in _sorted_formulas(s.succ)]
    right += [f"[{b}]" for b in sorted(s.boxes, key=str)]
    right += [f"<{b}>" for b in sorted(s.imps, key=str)]
    text = f"{left} =>" if left else "=>"
    return f"{text} {', '.join(right)}" if right else text


# --------------------------------------------------------------------------
# Parsing
# --------------------------------------------------------------------------


class _SequentParser(FormulaParser):
    def sequent(self) -> Sequent:
        ante = []
        if self.peek.kind != "=>":
            ante.append(self.formula())
            while self.peek.kind == ",":
                self.advance()
                ante.append(self.formula())
        self.expect("=>")
        succ, boxes, imps = [], [], []
        if self.peek.kind not in ("EOF", "]", ">"):
            self._entry(succ, boxes, imps)
            while self.peek.kind == ",":
                self.advance()
                self._entry(succ, boxes, imps)
        return Sequent(ante, succ, boxes, imps)

    def _entry(self, succ, boxes, imps):
        if self.peek.kind == "[":
            self.advance()
            boxes.append(self.sequent())
            self.expect("]")
        elif self.peek.kind == "<":
            self.advance()
            imps.append(self.sequent())
            self.expect(">")
        else:
            succ.append(self.formula())


def parse_sequent(text: str) -> Sequent:
    """Parse ``G => D`` with ``[..]`` modal and ``<..>`` implication blocks."""
    parser = _SequentParser(text, tokenize(text, sequent=True))
    result = parser.sequent()
    if parser.peek.kind != "EOF":
        raise parser.error({",", "EOF"})
    return result


# --------------------------------------------------------------------------
# Operators
# --------------------------------------------------------------------------


@lru_cache(maxsize=1 << 16)
def star(s: Sequent) -> Sequent:
    """Keep the antecedent; the succedent becomes its starred modal blocks only."""
    return Sequent(s.ante, (), (star(b) for b in s.boxes), ())


@lru_cache(maxsize=1 << 16)
def sharp(s: Sequent) -> Sequent:
    """Drop implication blocks at every depth."""
    return Sequent(s.ante, s.succ, (sharp(b) for b in s.boxes), ())


@lru_cache(maxsize=1 << 18)
def structurally_included(s1: Sequent, s2: Sequent) -> bool:
    if s1 is s2:
        return True
    if not s1.ante <= s2.ante:
        return False
    return all(any(structurally_included(b1, b2) for b2 in s2.boxes) for b1 in s1.boxes)


def block_equivalent(s1: Sequent, s2: Sequent) -> bool:
    return s1.ante == s2.ante and sharp(s1) == sharp(s2)


# --------------------------------------------------------------------------
# Occurrences and addresses
# --------------------------------------------------------------------------


def nested_occurrences(s: Sequent) -> list:
    """Every ``(address, sequent, kind)`` with the sequent nested in ``s``.

    Pre-order, children in canonical order; the root comes first with kind
    ``"root"``.
    """
    out = []
    stack = [((), s, "root")]
    while stack:
        addr, t, kind = stack.pop()
        out.append((addr, t, kind))
        for k, child in reversed(t.children()):
            stack.append((addr + ((k, child),), child, k))
    return out


def resolve(host: Sequent, addr: Address) -> Sequent:
    t = host
    for kind, child in addr:
        blocks = t.boxes if kind == MODAL else t.imps
        if child not in blocks:
            raise KeyError(f"address step {kind}:{child} does not resolve")
        t = child
    return t


def replace(host: Sequent, addr: Address, new: Sequent) -> tuple:
    """Put ``new`` at ``addr``; returns the new host and the updated address."""
    if not addr:
        return new, ()
    (kind, child), rest = addr[0], addr[1:]
    blocks = host.boxes if kind == MODAL else host.imps
    if child not in blocks:
        raise KeyError(f"address step {kind}:{child} does not resolve")
    new_child, new_rest = replace(child, rest, new)
    return host.swap_block(kind, child, new_child), ((kind, new_child),) + new_rest


def imp_suffix(addr: Address) -> int:
    """Length of the trailing run of implication steps in ``addr``."""
    n = 0
    for kind, _ in reversed(addr):
        if kind != IMP:
            break
        n += 1
    return n


# --------------------------------------------------------------------------
# Measures
# --------------------------------------------------------------------------


@lru_cache(maxsize=1 << 16)
def seq_modal_degree(s: Sequent) -> int:
    return max(
        [modal_degree(f) for f in s.ante | s.succ]
        + [seq_modal_degree(b) + 1 for b in s.boxes]
        + [seq_modal_degree(b) for b in s.imps]
        + [0]
    )


@dataclass(frozen=True)
class ModalTree:
    node: Sequent
    children: tuple = field(default=())

    def height(self) -> int:
        """Edges on the longest root-to-leaf path; a single node has height 0."""
        return max((1 + c.height() for c in self.children), default=0)

    def __len__(self):
        return 1 + sum(len(c) for c in self.children)


def modal_tree(s: Sequent) -> ModalTree:
    """Tree whose children are the top-level modal blocks, recursively."""
    return ModalTree(s, tuple(modal_tree(b) for b in sorted(s.boxes, key=str)))


@lru_cache(maxsize=1 << 16)
def sequent_size(s: Sequent) -> int:
    """Formula sizes plus one per block."""
    return (sum(size(f) for f in s.ante) + sum(size(f) for f in s.succ)
            + sum(1 + sequent_size(b) for b in s.boxes | s.imps))


def all_formulas(s: Sequent) -> Iterator[Formula]:
    for _, t, _ in nested_occurrences(s):
        yield from t.ante
        yield from t.succ
