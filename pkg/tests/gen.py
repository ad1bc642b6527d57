"""Seeded random formulas and sequents, plus hypothesis strategies for them."""

from __future__ import annotations

import random

from hypothesis import strategies as st

from fik.formula import BOT, TOP, And, Atom, Box, Dia, Imp, Or
from fik.sequent import Sequent

_BINARY = (And, Or, Imp)
_UNARY = (Box, Dia)


def random_formula(rng: random.Random, max_size: int = 9, atoms=("p", "q")):
    """A formula with between 1 and ``max_size`` nodes."""
    return _build(rng, rng.randint(1, max_size), atoms)


def _build(rng, n, atoms):
    if n == 1:
        return rng.choice([Atom(a) for a in atoms] * 3 + [BOT, TOP])
    if n == 2 or rng.random() < 0.3:
        return rng.choice(_UNARY)(_build(rng, n - 1, atoms))
    k = rng.randint(1, n - 2)
    return rng.choice(_BINARY)(_build(rng, k, atoms), _build(rng, n - 1 - k, atoms))


def formula_suite(count: int, seed: int, max_size: int = 9, atoms=("p", "q")) -> list:
    rng = random.Random(seed)
    return [random_formula(rng, max_size, atoms) for _ in range(count)]


def random_sequent(rng: random.Random, depth: int = 2, atoms=("a", "b", "c"), formula_size: int = 3):
    """Small nested sequent; blocks appear with decreasing probability by depth."""
    ante = [random_formula(rng, formula_size, atoms) for _ in range(rng.randint(0, 2))]
    succ = [random_formula(rng, formula_size, atoms) for _ in range(rng.randint(0, 2))]
    boxes, imps = [], []
    if depth > 0:
        boxes = [random_sequent(rng, depth - 1, atoms, formula_size) for _ in range(rng.randint(0, 2))]
        imps = [random_sequent(rng, depth - 1, atoms, formula_size) for _ in range(rng.randint(0, 2))]
    return Sequent(ante, succ, boxes, imps)


# hypothesis strategies ------------------------------------------------------

atom_names = st.sampled_from(["p", "q", "r"])

formulas = st.recursive(
    st.one_of(atom_names.map(Atom), st.just(BOT), st.just(TOP)),
    lambda sub: st.one_of(
        st.builds(And, sub, sub), st.builds(Or, sub, sub), st.builds(Imp, sub, sub),
        st.builds(Box, sub), st.builds(Dia, sub),
    ),
    max_leaves=6,
)

small_formulas = st.recursive(
    st.one_of(st.sampled_from(["p", "q"]).map(Atom), st.just(BOT)),
    lambda sub: st.one_of(
        st.builds(And, sub, sub), st.builds(Or, sub, sub), st.builds(Imp, sub, sub),
        st.builds(Box, sub), st.builds(Dia, sub),
    ),
    max_leaves=4,
)


def _sequents(depth: int):
    fs = st.frozensets(small_formulas, max_size=2)
    if depth == 0:
        return st.builds(Sequent, fs, fs)
    inner = _sequents(depth - 1)
    return st.builds(Sequent, fs, fs, st.frozensets(inner, max_size=2), st.frozensets(inner, max_size=2))


sequents = _sequents(2)
