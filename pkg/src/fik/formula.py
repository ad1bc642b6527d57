"""Formulas of the propositional modal language: AST, parser, printer, measures.

Concrete syntax::

    atoms      [a-z][a-z0-9_]*        (except the keywords bot, top)
    constants  bot  top
    prefix     ~A   []A   <>A         (bind tightest, stack to the right)
    infix      A & B    A \\/ B (or A | B)    A -> B    A <-> B

``&`` binds tighter than ``\\/``, which binds tighter than ``->``; ``<->`` is
the weakest.  ``&`` and ``\\/`` associate to the left, ``->`` and ``<->`` to
the right.  ``~A`` is read as ``A -> bot`` and ``A <-> B`` as
``(A -> B) & (B -> A)``; neither survives into the AST.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator, Union

__all__ = [
    "Atom", "Bot", "Top", "And", "Or", "Imp", "Box", "Dia", "Formula",
    "BOT", "TOP", "neg", "iff", "ParseError", "parse", "render",
    "modal_degree", "subformulas", "size", "atoms", "formula_key",
]


class _Node:
    __slots__ = ()

    def __str__(self):
        return render(self)


@dataclass(frozen=True)
class Atom(_Node):
    name: str

    def __post_init__(self):
        if not _ATOM_RE.fullmatch(self.name) or self.name in _KEYWORDS:
            raise ValueError(f"invalid atom name {self.name!r}")


@dataclass(frozen=True)
class Bot(_Node):
    pass


@dataclass(frozen=True)
class Top(_Node):
    pass


@dataclass(frozen=True)
class And(_Node):
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Or(_Node):
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Imp(_Node):
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Box(_Node):
    body: "Formula"


@dataclass(frozen=True)
class Dia(_Node):
    body: "Formula"


Formula = Union[Atom, Bot, Top, And, Or, Imp, Box, Dia]

BOT = Bot()
TOP = Top()

_ATOM_RE = re.compile(r"[a-z][a-z0-9_]*")
_KEYWORDS = frozenset({"bot", "top"})
_BINARY = (And, Or, Imp)
_UNARY = (Box, Dia)


def neg(a: Formula) -> Imp:
    return Imp(a, BOT)


def iff(a: Formula, b: Formula) -> And:
    return And(Imp(a, b), Imp(b, a))


# --------------------------------------------------------------------------
# Tokenizer and parser
# --------------------------------------------------------------------------


class ParseError(ValueError):
    """Syntax error carrying the byte offset and the set of expected tokens."""

    def __init__(self, text: str, offset: int, expected, found: str | None = None):
        self.text = text
        self.offset = offset
        self.expected = frozenset(expected)
        self.found = found
        what = "end of input" if found is None else repr(found)
        exp = ", ".join(sorted(self.expected)) or "nothing"
        super().__init__(f"at offset {offset}: unexpected {what}; expected one of: {exp}")


# Longest tokens first.  The sequent punctuation is only produced when the
# tokenizer is asked for it (see fik.sequent.parse_sequent).
_FORMULA_TOKENS = ("<->", "->", "<>", "[]", "\\/", "|", "&", "~", "(", ")")
_SEQUENT_TOKENS = ("=>", ",", "[", "]", "<", ">")


@dataclass(frozen=True)
class Token:
    kind: str  # the symbol itself, "ATOM", or "EOF"
    text: str
    offset: int


def tokenize(text: str, sequent: bool = False) -> list[Token]:
    symbols = _FORMULA_TOKENS + _SEQUENT_TOKENS if sequent else _FORMULA_TOKENS
    symbols = sorted(symbols, key=len, reverse=True)
    tokens = []
    pos = 0

    def offset(i: int) -> int:
        return len(text[:i].encode("utf-8"))

    while pos < len(text):
        if text[pos].isspace():
            pos += 1
            continue
        m = _ATOM_RE.match(text, pos)
        if m:
            word = m.group(0)
            tokens.append(Token(word if word in _KEYWORDS else "ATOM", word, offset(pos)))
            pos = m.end()
            continue
        for sym in symbols:
            if text.startswith(sym, pos):
                tokens.append(Token(sym, sym, offset(pos)))
                pos += len(sym)
                break
        else:
            raise ParseError(text, offset(pos), _PRIMARY_START, text[pos])
    tokens.append(Token("EOF", "", offset(len(text))))
    return tokens


_PRIMARY_START = frozenset({"ATOM", "bot", "top", "~", "[]", "<>", "("})


class FormulaParser:
    """Recursive-descent parser over a token list.

    Exposed so the sequent parser can share the token stream and stop at
    sequent punctuation.
    """

    def __init__(self, text: str, tokens: list[Token]):
        self.text = text
        self.tokens = tokens
        self.pos = 0

    @property
    def peek(self) -> Token:
        return self.tokens[self.pos]

    def advance(self) -> Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def error(self, expected) -> ParseError:
        tok = self.peek
        return ParseError(self.text, tok.offset, expected, None if tok.kind == "EOF" else tok.text)

    def expect(self, kind: str) -> Token:
        if self.peek.kind != kind:
            raise self.error({kind})
        return self.advance()

    def formula(self) -> Formula:
        left = self._imp()
        if self.peek.kind == "<->":
            self.advance()
            return iff(left, self.formula())
        return left

    def _imp(self) -> Formula:
        left = self._or()
        if self.peek.kind == "->":
            self.advance()
            return Imp(left, self._imp())
        return left

    def _or(self) -> Formula:
        left = self._and()
        while self.peek.kind in ("\\/", "|"):
            self.advance()
            left = Or(left, self._and())
        return left

    def _and(self) -> Formula:
        left = self._unary()
        while self.peek.kind == "&":
            self.advance()
            left = And(left, self._unary())
        return left

    def _unary(self) -> Formula:
        tok = self.peek
        if tok.kind == "~":
            self.advance()
            return neg(self._unary())
        if tok.kind == "[]":
            self.advance()
            return Box(self._unary())
        if tok.kind == "<>":
            self.advance()
            return Dia(self._unary())
        if tok.kind == "ATOM":
            self.advance()
            return Atom(tok.text)
        if tok.kind == "bot":
            self.advance()
            return BOT
        if tok.kind == "top":
            self.advance()
            return TOP
        if tok.kind == "(":
            self.advance()
            inner = self.formula()
            self.expect(")")
            return inner
        raise self.error(_PRIMARY_START)


def parse(text: str) -> Formula:
    """Parse ``text`` into a formula, raising ParseError on bad syntax."""
    parser = FormulaParser(text, tokenize(text))
    result = parser.formula()
    if parser.peek.kind != "EOF":
        raise parser.error({"&", "\\/", "|", "->", "<->", "EOF"})
    return result


# --------------------------------------------------------------------------
# Printer
# --------------------------------------------------------------------------

# Binding strength; higher binds tighter.
_IFF, _IMP, _OR, _AND, _PREFIX, _ATOMIC = range(6)


def _is_neg(f: Formula) -> bool:
    return isinstance(f, Imp) and isinstance(f.right, Bot)


def _prec(f: Formula) -> int:
    if _is_neg(f) or isinstance(f, _UNARY):
        return _PREFIX
    if isinstance(f, Imp):
        return _IMP
    if isinstance(f, Or):
        return _OR
    if isinstance(f, And):
        return _AND
    return _ATOMIC


def _wrap(f: Formula, need_parens: bool) -> str:
    text = render(f)
    return f"({text})" if need_parens else text


@lru_cache(maxsize=1 << 16)
def render(f: Formula) -> str:
    """Print with the fewest parentheses that still parse back to ``f``."""
    if isinstance(f, Atom):
        return f.name
    if isinstance(f, Bot):
        return "bot"
    if isinstance(f, Top):
        return "top"
    if _is_neg(f):
        return "~" + _wrap(f.left, _prec(f.left) < _PREFIX)
    if isinstance(f, Box):
        return "[]" + _wrap(f.body, _prec(f.body) < _PREFIX)
    if isinstance(f, Dia):
        return "<>" + _wrap(f.body, _prec(f.body) < _PREFIX)
    if isinstance(f, Imp):
        return f"{_wrap(f.left, _prec(f.left) <= _IMP)} -> {_wrap(f.right, _prec(f.right) < _IMP)}"
    level, op = (_OR, "\\/") if isinstance(f, Or) else (_AND, "&")
    return f"{_wrap(f.left, _prec(f.left) < level)} {op} {_wrap(f.right, _prec(f.right) <= level)}"


# --------------------------------------------------------------------------
# Measures
# --------------------------------------------------------------------------


def children(f: Formula) -> tuple:
    if isinstance(f, _BINARY):
        return (f.left, f.right)
    if isinstance(f, _UNARY):
        return (f.body,)
    return ()


@lru_cache(maxsize=1 << 16)
def modal_degree(f: Formula) -> int:
    if isinstance(f, _UNARY):
        return modal_degree(f.body) + 1
    if isinstance(f, _BINARY):
        return max(modal_degree(f.left), modal_degree(f.right))
    return 0


@lru_cache(maxsize=1 << 16)
def size(f: Formula) -> int:
    """Number of AST nodes (connective and atom occurrences)."""
    return 1 + sum(size(c) for c in children(f))


def _walk(f: Formula) -> Iterator[Formula]:
    yield f
    for c in children(f):
        yield from _walk(c)


def subformulas(f: Formula) -> frozenset:
    return frozenset(_walk(f))


def atoms(f: Formula) -> frozenset:
    return frozenset(g.name for g in _walk(f) if isinstance(g, Atom))


@lru_cache(maxsize=1 << 16)
def formula_key(f: Formula) -> tuple:
    """Canonical sort key: smaller formulas first, ties broken by text."""
    return (size(f), render(f))
