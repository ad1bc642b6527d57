"""Hilbert-style derivations: axiom-schema matching and step checking.

The intuitionistic base is a fixed choice of ten schemas (the logic only
asks for "the axioms of IPL"; any complete base would do):

    IPL1   p -> q -> p
    IPL2   (p -> q -> r) -> (p -> q) -> p -> r
    IPL3   p & q -> p
    IPL4   p & q -> q
    IPL5   p -> q -> p & q
    IPL6   p -> p \\/ q
    IPL7   q -> p \\/ q
    IPL8   (p -> r) -> (q -> r) -> p \\/ q -> r
    IPL9   bot -> p
    IPL10  top

followed by the modal schemas K_box, K_dia, N, DP and wCD.  In a schema the
atoms p, q, r are metavariables.  Rules are modus ponens and necessitation.

Derivation files have one step per line::

    1. <>bot -> bot ; ax N
    2. (<>bot -> bot) -> top -> <>bot -> bot ; ax IPL1 {p:=<>bot -> bot, q:=top}
    3. top -> <>bot -> bot ; mp 1 2

``mp i j`` needs step j to be ``step i -> this step``; ``nec i`` needs this
step to be ``[]`` of step i.  Blank lines and lines starting with ``#`` are
skipped.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Mapping, Optional, Union

from .formula import And, Atom, Box, Dia, Formula, Imp, Or, ParseError, parse

__all__ = [
    "AxiomSchema", "SCHEMAS", "Axiom", "MP", "Nec", "Step", "Derivation", "CheckResult",
    "match_axiom", "match_schema", "instantiate", "check_derivation", "parse_derivation",
    "load_derivation", "format_derivation", "DerivationSyntaxError",
]


@dataclass(frozen=True)
class AxiomSchema:
    id: str
    shape: Formula

    def metavariables(self) -> frozenset:
        from .formula import atoms

        return atoms(self.shape)


_SCHEMA_TEXT = (
    ("IPL1", "p -> q -> p"),
    ("IPL2", "(p -> q -> r) -> (p -> q) -> p -> r"),
    ("IPL3", "p & q -> p"),
    ("IPL4", "p & q -> q"),
    ("IPL5", "p -> q -> p & q"),
    ("IPL6", "p -> p \\/ q"),
    ("IPL7", "q -> p \\/ q"),
    ("IPL8", "(p -> r) -> (q -> r) -> p \\/ q -> r"),
    ("IPL9", "bot -> p"),
    ("IPL10", "top"),
    ("K_box", "[](p -> q) -> []p -> []q"),
    ("K_dia", "[](p -> q) -> <>p -> <>q"),
    ("N", "~<>bot"),
    ("DP", "<>(p \\/ q) -> <>p \\/ <>q"),
    ("wCD", "[](p \\/ q) -> (<>p -> []q) -> []q"),
)

SCHEMAS = tuple(AxiomSchema(name, parse(text)) for name, text in _SCHEMA_TEXT)
_BY_ID = {s.id: s for s in SCHEMAS}


def match_schema(shape: Formula, f: Formula, binding: Optional[dict] = None) -> Optional[dict]:
    """Extend ``binding`` so that ``shape`` under it is ``f``; None if impossible."""
    binding = {} if binding is None else dict(binding)
    stack = [(shape, f)]
    while stack:
        pat, g = stack.pop()
        if isinstance(pat, Atom):
            bound = binding.get(pat.name)
            if bound is None:
                binding[pat.name] = g
            elif bound != g:
                return None
        elif type(pat) is not type(g):
            return None
        elif isinstance(pat, (And, Or, Imp)):
            stack.append((pat.left, g.left))
            stack.append((pat.right, g.right))
        elif isinstance(pat, (Box, Dia)):
            stack.append((pat.body, g.body))
    return binding


def instantiate(shape: Formula, binding: Mapping) -> Formula:
    if isinstance(shape, Atom):
        return binding.get(shape.name, shape)
    if isinstance(shape, (And, Or, Imp)):
        return type(shape)(instantiate(shape.left, binding), instantiate(shape.right, binding))
    if isinstance(shape, (Box, Dia)):
        return type(shape)(instantiate(shape.body, binding))
    return shape


def match_axiom(f: Formula) -> Optional[tuple]:
    """``(schema id, substitution)`` for the first schema ``f`` instantiates."""
    for schema in SCHEMAS:
        binding = match_schema(schema.shape, f)
        if binding is not None:
            return schema.id, binding
    return None


# --------------------------------------------------------------------------
# Derivations
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class Axiom:
    schema: Optional[str] = None   # None: any schema
    substitution: Mapping = field(default_factory=dict)


@dataclass(frozen=True)
class MP:
    minor: int  # index of A
    major: int  # index of A -> B


@dataclass(frozen=True)
class Nec:
    premise: int


Justification = Union[Axiom, MP, Nec]


@dataclass(frozen=True)
class Step:
    formula: Formula
    justification: Justification


@dataclass
class Derivation:
    steps: list


@dataclass
class CheckResult:
    ok: bool
    failed_at: Optional[int] = None  # 1-based step index
    reason: str = ""

    def __bool__(self):
        return self.ok


def _check_step(i: int, step: Step, steps: list) -> Optional[str]:
    j = step.justification
    f = step.formula

    def earlier(k):
        if not 1 <= k < i:
            raise IndexError(f"step {k} is not an earlier step")
        return steps[k - 1].formula

    try:
        if isinstance(j, Axiom):
            if j.schema is None:
                return None if match_axiom(f) else "not an instance of any axiom schema"
            schema = _BY_ID.get(j.schema)
            if schema is None:
                return f"unknown schema {j.schema}"
            extra = set(j.substitution) - schema.metavariables()
            if extra:
                return f"{j.schema} has no metavariable {sorted(extra)[0]}"
            binding = match_schema(schema.shape, f, j.substitution)
            if binding is None:
                return f"not an instance of {j.schema} under the given substitution"
            return None
        if isinstance(j, MP):
            a, imp = earlier(j.minor), earlier(j.major)
            if imp != Imp(a, f):
                return f"step {j.major} is not step {j.minor} -> this formula"
            return None
        if isinstance(j, Nec):
            if f != Box(earlier(j.premise)):
                return f"not the necessitation of step {j.premise}"
            return None
    except IndexError as exc:
        return str(exc)
    return f"unknown justification {j!r}"


def check_derivation(d: Derivation) -> CheckResult:
    """Check every step in order; reports the first failing step."""
    for i, step in enumerate(d.steps, start=1):
        reason = _check_step(i, step, d.steps)
        if reason is not None:
            return CheckResult(False, i, reason)
    return CheckResult(True)


class DerivationSyntaxError(ValueError):
    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


_LINE = re.compile(r"\s*(\d+)\.\s*(.*?)\s*;\s*(.*?)\s*$")
_AX = re.compile(r"ax(?:\s+([A-Za-z0-9_]+))?\s*(?:\{(.*)\})?$")


def _parse_substitution(text: str) -> dict:
    out = {}
    for part in filter(None, (p.strip() for p in text.split(","))):
        name, sep, value = part.partition(":=")
        if not sep:
            raise ValueError(f"expected name:=formula, got {part!r}")
        out[name.strip()] = parse(value)
    return out


def parse_derivation(text: str) -> Derivation:
    steps = []
    for line_no, line in enumerate(text.splitlines(), start=1):
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        m = _LINE.match(line)
        if not m:
            raise DerivationSyntaxError(line_no, "expected 'INDEX. FORMULA ; JUSTIFICATION'")
        index, ftext, jtext = int(m.group(1)), m.group(2), m.group(3)
        if index != len(steps) + 1:
            raise DerivationSyntaxError(line_no, f"expected step {len(steps) + 1}, found {index}")
        try:
            formula = parse(ftext)
            words = jtext.split()
            if words and words[0] == "mp" and len(words) == 3:
                just = MP(int(words[1]), int(words[2]))
            elif words and words[0] == "nec" and len(words) == 2:
                just = Nec(int(words[1]))
            else:
                am = _AX.match(jtext)
                if not am:
                    raise ValueError(f"bad justification {jtext!r}")
                just = Axiom(am.group(1), _parse_substitution(am.group(2) or ""))
        except (ParseError, ValueError) as exc:
            raise DerivationSyntaxError(line_no, str(exc)) from exc
        steps.append(Step(formula, just))
    return Derivation(steps)


def load_derivation(path) -> Derivation:
    with open(path) as fh:
        return parse_derivation(fh.read())


def format_derivation(d: Derivation) -> str:
    lines = []
    for i, step in enumerate(d.steps, start=1):
        j = step.justification
        if isinstance(j, MP):
            just = f"mp {j.minor} {j.major}"
        elif isinstance(j, Nec):
            just = f"nec {j.premise}"
        else:
            sub = ", ".join(f"{k}:={v}" for k, v in sorted(j.substitution.items()))
            just = "ax" + (f" {j.schema}" if j.schema else "") + (f" {{{sub}}}" if sub else "")
        lines.append(f"{i}. {step.formula} ; {just}")
    return "\n".join(lines) + "\n"
