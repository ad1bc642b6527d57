"""Finite bi-relational models and the forcing relation.

A model is ``(W, <=, R, V)``: ``<=`` is a pre-order stored explicitly (it is
validated, never silently closed), ``R`` is the modal accessibility relation
and ``V`` a hereditary valuation.  Only forward-confluent models count:

    z <= x and R z y   implies   R x t and y <= t for some t.

Forcing clauses: implication and box quantify over ``<=``-successors, diamond
is local::

    w ||- B -> C  iff  every w' >= w forcing B forces C
    w ||- []B     iff  every v with w <= w', R w' v forces B
    w ||- <>B     iff  some v with R w v forces B

The second half of the module is a brute-force validity oracle.  It walks all
models up to a given number of worlds in a fixed order and evaluates the
query with numpy over whole batches of accessibility relations at once.  It
shares no code with the sequent calculus.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Iterable, Iterator, Mapping, NamedTuple, Optional

import numpy as np

from .formula import And, Atom, Bot, Box, Dia, Formula, Imp, Or, Top, atoms as formula_atoms

__all__ = [
    "Model", "Violation", "validate_model", "truth_set", "forces", "forces_sequent",
    "forces_succedent", "sequent_truth_set", "valid_in_model", "enumerate_models", "find_countermodel_bruteforce",
    "generated_submodel", "truth_tables", "model_to_dict", "model_from_dict", "load_model", "dump_model",
]


@dataclass(frozen=True, eq=True)
class Model:
    worlds: tuple
    leq: frozenset
    acc: frozenset
    val: Mapping

    def __post_init__(self):
        object.__setattr__(self, "worlds", tuple(self.worlds))
        object.__setattr__(self, "leq", frozenset(tuple(p) for p in self.leq))
        object.__setattr__(self, "acc", frozenset(tuple(p) for p in self.acc))
        val = {w: frozenset(self.val.get(w, ())) for w in self.worlds}
        object.__setattr__(self, "val", val)

    def __hash__(self):
        return hash((self.worlds, self.leq, self.acc, tuple(sorted(self.val.items(), key=repr))))

    @cached_property
    def _up(self) -> dict:
        up = {w: set() for w in self.worlds}
        for x, y in self.leq:
            if x in up:
                up[x].add(y)
        return {w: frozenset(s) for w, s in up.items()}

    @cached_property
    def _succ(self) -> dict:
        succ = {w: set() for w in self.worlds}
        for x, y in self.acc:
            if x in succ:
                succ[x].add(y)
        return {w: frozenset(s) for w, s in succ.items()}

    def up(self, w) -> frozenset:
        """Worlds ``w'`` with ``w <= w'`` as recorded (no closure applied)."""
        return self._up[w]

    def succ(self, w) -> frozenset:
        return self._succ[w]

    def __str__(self):
        def rel(r):
            return ", ".join(f"{a}{b}" if len(a) == len(b) == 1 else f"({a},{b})"
                             for a, b in sorted(r))
        vals = "; ".join(f"{w}:{','.join(sorted(self.val[w]))}" for w in self.worlds if self.val[w])
        return f"W={list(self.worlds)} <=[{rel(self.leq)}] R[{rel(self.acc)}] V[{vals}]"


class Violation(NamedTuple):
    condition: str  # reflexivity | transitivity | hereditary | forward-confluence | unknown-world
    witness: tuple


def validate_model(m: Model) -> list[Violation]:
    """All violated model conditions, each with the offending worlds."""
    report = []
    known = set(m.worlds)
    for rel_name, rel in (("leq", m.leq), ("r", m.acc)):
        for pair in sorted(rel, key=repr):
            if not set(pair) <= known:
                report.append(Violation("unknown-world", (rel_name,) + pair))
    for w in m.val:
        if w not in known:
            report.append(Violation("unknown-world", ("val", w)))
    if report:
        return report
    for w in m.worlds:
        if (w, w) not in m.leq:
            report.append(Violation("reflexivity", (w,)))
    for x in m.worlds:
        for y in m.up(x):
            for z in m.up(y):
                if (x, z) not in m.leq:
                    report.append(Violation("transitivity", (x, y, z)))
    for x in m.worlds:
        for y in m.up(x):
            missing = m.val[x] - m.val[y]
            for p in sorted(missing):
                report.append(Violation("hereditary", (x, y, p)))
    for z in m.worlds:
        for x in m.up(z):
            for y in m.succ(z):
                if not any(t in m.up(y) for t in m.succ(x)):
                    report.append(Violation("forward-confluence", (x, y, z)))
    return report


# --------------------------------------------------------------------------
# Forcing
# --------------------------------------------------------------------------


def truth_set(m: Model, a: Formula, _memo: Optional[dict] = None) -> frozenset:
    """The set of worlds of ``m`` forcing ``a``, straight from the clauses."""
    memo = {} if _memo is None else _memo
    if a in memo:
        return memo[a]
    W = m.worlds
    if isinstance(a, Atom):
        res = frozenset(w for w in W if a.name in m.val[w])
    elif isinstance(a, Bot):
        res = frozenset()
    elif isinstance(a, Top):
        res = frozenset(W)
    elif isinstance(a, And):
        res = truth_set(m, a.left, memo) & truth_set(m, a.right, memo)
    elif isinstance(a, Or):
        res = truth_set(m, a.left, memo) | truth_set(m, a.right, memo)
    elif isinstance(a, Imp):
        b, c = truth_set(m, a.left, memo), truth_set(m, a.right, memo)
        res = frozenset(w for w in W if all(v in c for v in m.up(w) if v in b))
    elif isinstance(a, Box):
        b = truth_set(m, a.body, memo)
        res = frozenset(w for w in W if all(m.succ(v) <= b for v in m.up(w)))
    elif isinstance(a, Dia):
        b = truth_set(m, a.body, memo)
        res = frozenset(w for w in W if m.succ(w) & b)
    else:
        raise TypeError(f"not a formula: {a!r}")
    memo[a] = res
    return res


def _check_world(m: Model, w) -> None:
    if w not in m.val:
        raise KeyError(f"unknown world {w!r}")


def forces(m: Model, w, a: Formula) -> bool:
    _check_world(m, w)
    return w in truth_set(m, a)


def _sequent_truth(m: Model, s, memo: dict) -> frozenset:
    key = ("seq", s)
    if key in memo:
        return memo[key]
    W = frozenset(m.worlds)
    whole_ante = W
    for a in s.ante:
        whole_ante = whole_ante & truth_set(m, a, memo)
    res = (W - whole_ante) | _succedent_truth(m, s, memo)
    memo[key] = res
    return res


def _succedent_truth(m: Model, s, memo: dict) -> frozenset:
    key = ("succ", s)
    if key in memo:
        return memo[key]
    res = set()
    for a in s.succ:
        res |= truth_set(m, a, memo)
    for t in s.boxes:
        good = _sequent_truth(m, t, memo)
        res |= {w for w in m.worlds if m.succ(w) <= good}
    for t in s.imps:
        good = _sequent_truth(m, t, memo)
        res |= {w for w in m.worlds if m.up(w) <= good}
    res = frozenset(res)
    memo[key] = res
    return res


def forces_sequent(m: Model, w, s) -> bool:
    """``w`` forces ``G => D``: some member of G fails or some entry of D holds.

    ``[T]`` is forced when every R-successor forces T, ``<T>`` when every
    ``<=``-successor does; the empty succedent is never forced.
    """
    _check_world(m, w)
    return w in _sequent_truth(m, s, {})


def sequent_truth_set(m: Model, s) -> frozenset:
    """The set of worlds forcing the sequent ``s``."""
    return _sequent_truth(m, s, {})


def forces_succedent(m: Model, w, s) -> bool:
    _check_world(m, w)
    return w in _succedent_truth(m, s, {})


def valid_in_model(m: Model, a: Formula) -> bool:
    return truth_set(m, a) == frozenset(m.worlds)


def generated_submodel(m: Model, root) -> Model:
    """Restriction of ``m`` to the worlds reachable from ``root`` via ``<=`` and R.

    Forcing at a world depends only on this part of the model, so the root
    keeps exactly the formulas it forced before.
    """
    _check_world(m, root)
    seen = {root}
    todo = [root]
    while todo:
        w = todo.pop()
        for v in itertools.chain(m.up(w), m.succ(w)):
            if v not in seen:
                seen.add(v)
                todo.append(v)
    keep = tuple(w for w in m.worlds if w in seen)
    return Model(
        keep,
        frozenset(p for p in m.leq if p[0] in seen and p[1] in seen),
        frozenset(p for p in m.acc if p[0] in seen and p[1] in seen),
        {w: m.val[w] for w in keep},
    )


# --------------------------------------------------------------------------
# Exhaustive enumeration
#
# Worlds are 0..n-1.  A relation is an n*n bitmask, bit i*n+j standing for
# the pair (i, j).  A valuation over k atoms is a k*n bitmask whose slice
# [a*n, (a+1)*n) is the set of worlds where atom a holds.  Models of each
# size are listed by pre-order mask, then valuation mask, then R mask, all
# ascending.  No isomorphism reduction.
# --------------------------------------------------------------------------


def _world_name(i: int) -> str:
    return f"w{i}"


def _pairs(mask: int, n: int) -> list:
    return [(i, j) for i in range(n) for j in range(n) if mask >> (i * n + j) & 1]


@lru_cache(maxsize=None)
def _preorders(n: int) -> tuple:
    diag = sum(1 << (i * n + i) for i in range(n))
    found = []
    for mask in range(1 << (n * n)):
        if mask & diag != diag:
            continue
        rel = _pairs(mask, n)
        if all(mask >> (i * n + k) & 1 for i, j in rel for j2, k in rel if j == j2):
            found.append(mask)
    return tuple(found)


def _up_masks(n: int, leq: int) -> list:
    return [sum(1 << j for j in range(n) if leq >> (i * n + j) & 1) for i in range(n)]


@lru_cache(maxsize=None)
def _valuations(n: int, leq: int, k: int) -> tuple:
    up = _up_masks(n, leq)
    upsets = [u for u in range(1 << n) if all(up[w] & ~u == 0 for w in range(n) if u >> w & 1)]
    vals = [sum(u << (a * n) for a, u in enumerate(combo))
            for combo in itertools.product(upsets, repeat=k)]
    return tuple(sorted(vals))


@lru_cache(maxsize=None)
def _fc_frames(n: int, leq: int) -> np.ndarray:
    """All R masks forward-confluent with the given pre-order, ascending."""
    rs = np.arange(1 << (n * n), dtype=np.int64)
    full = (1 << n) - 1
    succ = [(rs >> (w * n)) & full for w in range(n)]
    up = _up_masks(n, leq)
    ok = np.ones(rs.shape, dtype=bool)
    for z in range(n):
        for x in range(n):
            if x == z or not leq >> (z * n + x) & 1:
                continue
            for y in range(n):
                has_edge = ((succ[z] >> y) & 1).astype(bool)
                covered = (succ[x] & up[y]) != 0
                ok &= ~has_edge | covered
    return rs[ok]


def _build_model(n: int, leq: int, val: int, r: int, atom_names: tuple) -> Model:
    names = [_world_name(i) for i in range(n)]
    valuation = {names[w]: frozenset(p for a, p in enumerate(atom_names) if val >> (a * n + w) & 1)
                 for w in range(n)}
    return Model(
        tuple(names),
        frozenset((names[i], names[j]) for i, j in _pairs(leq, n)),
        frozenset((names[i], names[j]) for i, j in _pairs(r, n)),
        valuation,
    )


def enumerate_models(max_worlds: int, atoms: Iterable[str]) -> Iterator[Model]:
    """Every valid model with 1..max_worlds worlds over ``atoms``, each once."""
    if max_worlds < 1:
        raise ValueError("max_worlds must be at least 1")
    atom_names = tuple(sorted(set(atoms)))
    k = len(atom_names)
    for n in range(1, max_worlds + 1):
        for leq in _preorders(n):
            frames = _fc_frames(n, leq)
            for val in _valuations(n, leq, k):
                for r in frames:
                    yield _build_model(n, leq, val, int(r), atom_names)


class _Batch:
    """One pre-order, a block of valuations, and all FC relations for it."""

    def __init__(self, n: int, leq: int, vals: np.ndarray, rs: np.ndarray, k: int):
        self.n = n
        self.full = (1 << n) - 1
        self.up = _up_masks(n, leq)
        self.r = np.tile(rs, len(vals))
        self.val = np.repeat(vals, len(rs))
        self.succ = [(self.r >> (w * n)) & self.full for w in range(n)]
        self.ursucc = []
        for w in range(n):
            acc = np.zeros_like(self.r)
            for v in range(n):
                if self.up[w] >> v & 1:
                    acc |= self.succ[v]
            self.ursucc.append(acc)
        self.atom = [(self.val >> (a * n)) & self.full for a in range(k)]

    def per_world(self, cond_for_world) -> np.ndarray:
        out = np.zeros_like(self.r)
        for w in range(self.n):
            out |= np.where(cond_for_world(w), 1 << w, 0)
        return out


def _evaluate(f: Formula, batch: _Batch, index: dict, memo: dict) -> np.ndarray:
    if f in memo:
        return memo[f]
    if isinstance(f, Atom):
        res = batch.atom[index[f.name]]
    elif isinstance(f, Bot):
        res = np.zeros_like(batch.r)
    elif isinstance(f, Top):
        res = np.full_like(batch.r, batch.full)
    elif isinstance(f, And):
        res = _evaluate(f.left, batch, index, memo) & _evaluate(f.right, batch, index, memo)
    elif isinstance(f, Or):
        res = _evaluate(f.left, batch, index, memo) | _evaluate(f.right, batch, index, memo)
    elif isinstance(f, Imp):
        bad = _evaluate(f.left, batch, index, memo) & ~_evaluate(f.right, batch, index, memo)
        res = batch.per_world(lambda w: (bad & batch.up[w]) == 0)
    elif isinstance(f, Box):
        missing = ~_evaluate(f.body, batch, index, memo) & batch.full
        res = batch.per_world(lambda w: (batch.ursucc[w] & missing) == 0)
    elif isinstance(f, Dia):
        body = _evaluate(f.body, batch, index, memo)
        res = batch.per_world(lambda w: (batch.succ[w] & body) != 0)
    else:
        raise TypeError(f"not a formula: {f!r}")
    memo[f] = res
    return res


_BATCH_LIMIT = 1 << 20


def _batches(max_worlds: int, k: int) -> Iterator[tuple]:
    """``(n, leq mask, batch)`` covering every model in enumeration order."""
    for n in range(1, max_worlds + 1):
        for leq in _preorders(n):
            rs = _fc_frames(n, leq)
            vals = np.array(_valuations(n, leq, k), dtype=np.int64)
            step = max(1, _BATCH_LIMIT // len(rs))
            for start in range(0, len(vals), step):
                yield n, leq, _Batch(n, leq, vals[start:start + step], rs, k)


def find_countermodel_bruteforce(a: Formula, max_worlds: int) -> Optional[tuple]:
    """First enumerated ``(model, world)`` where ``a`` fails, or None.

    Atoms are those of ``a``.  None only means no countermodel exists up to
    ``max_worlds`` worlds; it is not a validity verdict.
    """
    if max_worlds < 1:
        raise ValueError("max_worlds must be at least 1")
    atom_names = tuple(sorted(formula_atoms(a)))
    index = {p: i for i, p in enumerate(atom_names)}
    for n, leq, batch in _batches(max_worlds, len(atom_names)):
        res = _evaluate(a, batch, index, {})
        bad = np.flatnonzero(res != batch.full)
        if len(bad):
            i = int(bad[0])
            r, val, truth = int(batch.r[i]), int(batch.val[i]), int(res[i])
            world = next(w for w in range(n) if not truth >> w & 1)
            return _build_model(n, leq, val, r, atom_names), _world_name(world)
    return None


def truth_tables(formulas: Iterable[Formula], max_worlds: int) -> Iterator[tuple]:
    """Truth of each formula in every enumerated model, a batch at a time.

    Yields ``(n, leq_pairs, tables, model_at)``: ``tables`` maps each formula
    to an array with one world bitmask per model of the batch, and
    ``model_at(i)`` rebuilds the i-th model of the batch.
    """
    formulas = list(formulas)
    atom_names = tuple(sorted(set().union(*(formula_atoms(f) for f in formulas))))
    index = {p: i for i, p in enumerate(atom_names)}
    for n, leq, batch in _batches(max_worlds, len(atom_names)):
        memo = {}
        tables = {f: _evaluate(f, batch, index, memo) for f in formulas}

        def model_at(i, n=n, leq=leq, batch=batch):
            return _build_model(n, leq, int(batch.val[i]), int(batch.r[i]), atom_names)

        yield n, _pairs(leq, n), tables, model_at


# --------------------------------------------------------------------------
# Model documents
# --------------------------------------------------------------------------


def model_to_dict(m: Model) -> dict:
    return {
        "worlds": [str(w) for w in m.worlds],
        "leq": [[str(a), str(b)] for a, b in sorted(m.leq, key=lambda p: (m.worlds.index(p[0]), m.worlds.index(p[1])))],
        "r": [[str(a), str(b)] for a, b in sorted(m.acc, key=lambda p: (m.worlds.index(p[0]), m.worlds.index(p[1])))],
        "val": {str(w): sorted(m.val[w]) for w in m.worlds},
    }


def model_from_dict(doc: Mapping, close_leq: bool = False) -> Model:
    """Build a model from the document format.

    With ``close_leq`` the reflexive pairs are added before anything is
    checked; otherwise the pre-order is taken exactly as written.
    """
    try:
        worlds = [str(w) for w in doc["worlds"]]
        leq = {(str(a), str(b)) for a, b in doc.get("leq", [])}
        acc = {(str(a), str(b)) for a, b in doc.get("r", [])}
        raw_val = doc.get("val", {})
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"malformed model document: {exc}") from exc
    if len(set(worlds)) != len(worlds):
        raise ValueError("duplicate world names")
    if close_leq:
        leq |= {(w, w) for w in worlds}
    unknown = set(raw_val) - set(worlds)
    if unknown:
        raise ValueError(f"valuation mentions unknown worlds: {sorted(unknown)}")
    val = {w: frozenset(str(p) for p in raw_val.get(w, [])) for w in worlds}
    return Model(tuple(worlds), frozenset(leq), frozenset(acc), val)


def load_model(path, close_leq: bool = False) -> Model:
    with open(path) as fh:
        return model_from_dict(json.load(fh), close_leq=close_leq)


def dump_model(m: Model, path) -> None:
    with open(path, "w") as fh:
        json.dump(model_to_dict(m), fh, indent=2)
        fh.write("\n")
