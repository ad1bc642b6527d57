"""Command-line driver: ``fik prove | check-model | oracle | bench``.

Exit codes for ``prove``: 0 provable, 1 unprovable, 2 usage or parse error,
3 step budget exceeded.  Formulas may be given inline, as ``@path`` to read
a file, or as ``-`` (or omitted) to read standard input.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Optional

from .calculus import BudgetExceeded, prove
from .countermodel import annotated_dict, to_dot
from .formula import ParseError, parse, render
from .kripke import find_countermodel_bruteforce, forces, load_model, model_to_dict, validate_model

EXIT_OK, EXIT_REFUTED, EXIT_USAGE, EXIT_BUDGET = 0, 1, 2, 3
ORACLE_CAP = 4


class UsageError(Exception):
    pass


def _color(text: str, code: str) -> str:
    mode = os.environ.get("FIK_COLOR", "auto")
    if mode == "never" or not sys.stdout.isatty():
        return text
    return f"\033[{code}m{text}\033[0m"


def _read_formula_text(arg: Optional[str]) -> str:
    if arg is None or arg == "-":
        return sys.stdin.read().strip()
    if arg.startswith("@"):
        try:
            with open(arg[1:]) as fh:
                return fh.read().strip()
        except OSError as exc:
            raise UsageError(f"cannot read {arg[1:]}: {exc.strerror}") from exc
    return arg


def _parse_formula(arg: Optional[str]):
    text = _read_formula_text(arg)
    try:
        return parse(text)
    except ParseError as exc:
        raise UsageError(f"parse error {exc}") from exc


def _write(path: str, text: str) -> None:
    with open(path, "w") as fh:
        fh.write(text)


# --------------------------------------------------------------------------
# prove
# --------------------------------------------------------------------------


def cmd_prove(args) -> int:
    goal = _parse_formula(args.formula)
    start = time.perf_counter()
    try:
        result = prove(goal, budget=args.budget, debug=args.debug)
    except BudgetExceeded as exc:
        print(f"budget exceeded after {exc.stats.steps} rule applications", file=sys.stderr)
        return EXIT_BUDGET
    elapsed = time.perf_counter() - start
    provable = result.verdict == "PROVABLE"

    if args.derivation:
        if args.format == "json":
            _write(args.derivation, json.dumps(result.tree.to_dict(), indent=1) + "\n")
        else:
            _write(args.derivation, result.tree.render() + "\n")
    model_doc = None
    if not provable:
        report = result.report
        model_doc = annotated_dict(result.model, report.sequent_of)
        model_doc["root"] = result.root_world
        if args.model:
            _write(args.model, json.dumps(model_doc, indent=2) + "\n")
        if args.dot:
            _write(args.dot, to_dot(result.model, report.sequent_of, args.elide_preorder_closure))

    if args.format == "json":
        doc = {
            "formula": render(goal),
            "verdict": result.verdict,
            "elapsed": round(elapsed, 6),
            "statistics": result.stats.as_dict(),
        }
        if model_doc is not None:
            doc["countermodel"] = model_doc
            doc["leaf"] = str(result.leaf)
        print(json.dumps(doc, indent=2))
    else:
        word = _color(result.verdict, "32" if provable else "31")
        print(f"{word}  {render(goal)}")
        st = result.stats
        print(f"rule applications: {st.steps}  max sequent size: {st.max_sequent_size}"
              f"  blocked: {st.blocked_hits}  time: {elapsed:.3f}s")
        if not provable:
            m = result.model
            print(f"countermodel ({len(m.worlds)} worlds, verified), refuted at {result.root_world}:")
            for w in m.worlds:
                atoms = ",".join(sorted(m.val[w])) or "-"
                print(f"  {w}  V={{{atoms}}}  {result.report.sequent_of[w]}")
            order = {w: i for i, w in enumerate(m.worlds)}
            strict = sorted(((a, b) for a, b in m.leq if a != b), key=lambda p: (order[p[0]], order[p[1]]))
            print("  <=: " + (", ".join(f"{a}<={b}" for a, b in strict) or "(reflexive only)"))
            acc = sorted(m.acc, key=lambda p: (order[p[0]], order[p[1]]))
            print("  R:  " + (", ".join(f"{a}R{b}" for a, b in acc) or "(empty)"))
    return EXIT_OK if provable else EXIT_REFUTED


# --------------------------------------------------------------------------
# check-model
# --------------------------------------------------------------------------


def cmd_check_model(args) -> int:
    try:
        model = load_model(args.model, close_leq=args.close_leq)
    except (OSError, ValueError) as exc:
        raise UsageError(f"cannot load model: {exc}") from exc
    violations = validate_model(model)
    if violations:
        for v in violations:
            print(f"violation: {v.condition} {v.witness}")
        return EXIT_USAGE
    goal = _parse_formula(args.formula)
    if args.world not in model.val:
        raise UsageError(f"unknown world {args.world!r}")
    if forces(model, args.world, goal):
        print(f"{args.world} forces {render(goal)}")
        return EXIT_OK
    print(f"{args.world} does not force {render(goal)}")
    return EXIT_REFUTED


# --------------------------------------------------------------------------
# oracle
# --------------------------------------------------------------------------


def cmd_oracle(args) -> int:
    goal = _parse_formula(args.formula)
    if not 1 <= args.n <= args.cap:
        raise UsageError(f"-n must be between 1 and {args.cap}")
    found = find_countermodel_bruteforce(goal, args.n)
    if found is None:
        print(f"none up to {args.n} worlds")
        return EXIT_OK
    model, world = found
    print(f"countermodel found, refuted at {world}: {model}")
    if args.model:
        doc = model_to_dict(model)
        doc["root"] = world
        _write(args.model, json.dumps(doc, indent=2) + "\n")
    return EXIT_REFUTED


# --------------------------------------------------------------------------
# bench
# --------------------------------------------------------------------------


@dataclass
class BenchLine:
    line_no: int
    text: str
    expect: str


def parse_corpus(text: str) -> list:
    entries = []
    for line_no, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        formula, sep, tail = stripped.partition("#")
        tail = tail.strip()
        if not sep or not tail.startswith("expect:"):
            raise UsageError(f"line {line_no}: missing '# expect: provable|unprovable'")
        expect = tail[len("expect:"):].strip().lower()
        if expect not in ("provable", "unprovable"):
            raise UsageError(f"line {line_no}: unknown expectation {expect!r}")
        try:
            parse(formula)
        except ParseError as exc:
            raise UsageError(f"line {line_no}: parse error {exc}") from exc
        entries.append(BenchLine(line_no, formula.strip(), expect))
    return entries


def _bench_one(text: str, budget: Optional[int]) -> tuple:
    start = time.perf_counter()
    try:
        result = prove(parse(text), budget=budget)
    except BudgetExceeded:
        return "BUDGET", time.perf_counter() - start, 0, 0
    return result.verdict, time.perf_counter() - start, result.stats.steps, result.stats.max_sequent_size


def cmd_bench(args) -> int:
    try:
        with open(args.corpus) as fh:
            entries = parse_corpus(fh.read())
    except OSError as exc:
        raise UsageError(f"cannot read {args.corpus}: {exc.strerror}") from exc
    texts = [e.text for e in entries]
    budgets = [args.budget] * len(texts)
    if args.jobs > 1 and len(texts) > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_bench_one, texts, budgets))
    else:
        results = list(map(_bench_one, texts, budgets))
    failures = []
    print(f"{'line':>4}  {'verdict':<10}  {'expected':<10}  {'time':>8}  {'steps':>6}  {'size':>5}  formula")
    for entry, (verdict, elapsed, steps, size) in zip(entries, results):
        ok = verdict.lower() == entry.expect
        if not ok:
            failures.append(entry)
        mark = "" if ok else _color("  MISMATCH", "31")
        print(f"{entry.line_no:>4}  {verdict:<10}  {entry.expect.upper():<10}  {elapsed:>7.3f}s"
              f"  {steps:>6}  {size:>5}  {entry.text}{mark}")
    for entry in failures:
        print(f"expectation not met on line {entry.line_no}: {entry.text}", file=sys.stderr)
    return EXIT_REFUTED if failures else EXIT_OK


# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fik", description="Decision procedure for the modal logic FIK.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("prove", help="decide a formula")
    p.add_argument("formula", nargs="?", help="formula text, @file, or - for stdin")
    p.add_argument("--derivation", metavar="PATH", help="write the derivation tree")
    p.add_argument("--model", metavar="PATH", help="write the countermodel (JSON)")
    p.add_argument("--dot", metavar="PATH", help="write the countermodel as Graphviz DOT")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.add_argument("--budget", type=int, metavar="STEPS", help="stop after this many rule applications")
    p.add_argument("--elide-preorder-closure", action="store_true",
                   help="omit reflexive and implied pre-order edges in DOT output")
    p.add_argument("--debug", action="store_true", help="check search invariants while running")
    p.set_defaults(func=cmd_prove)

    c = sub.add_parser("check-model", help="evaluate a formula at a world of a model file")
    c.add_argument("model", help="model JSON file")
    c.add_argument("formula")
    c.add_argument("world")
    c.add_argument("--close-leq", action="store_true", help="add reflexive pre-order pairs before checking")
    c.set_defaults(func=cmd_check_model)

    o = sub.add_parser("oracle", help="search small models for a countermodel")
    o.add_argument("formula")
    o.add_argument("-n", type=int, default=3, help="largest number of worlds (default 3)")
    o.add_argument("--cap", type=int, default=ORACLE_CAP, help=argparse.SUPPRESS)
    o.add_argument("--model", metavar="PATH", help="write the countermodel found (JSON)")
    o.set_defaults(func=cmd_oracle)

    b = sub.add_parser("bench", help="run a corpus with expected verdicts")
    b.add_argument("corpus")
    b.add_argument("--jobs", type=int, default=1)
    b.add_argument("--budget", type=int, metavar="STEPS")
    b.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"fik: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
